#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vmdaug/errors.hpp"

namespace vmdaug {

// ============================================================================
// Labels
// ============================================================================

enum class StabilityLabel { stable, unstable };

inline std::string to_string(StabilityLabel l) {
    return l == StabilityLabel::stable ? "stable" : "unstable";
}

inline StabilityLabel parse_label(std::string_view token) {
    if (token == "stable") return StabilityLabel::stable;
    if (token == "unstable") return StabilityLabel::unstable;
    throw LabelError("unknown label token: '" + std::string(token) + "'");
}

// ============================================================================
// Core time-series types
// ============================================================================

/// One uniformly sampled real-valued time series.
struct Signal {
    std::vector<double> samples;
    double fs = 1.0; // sampling rate, samples per second

    std::size_t size() const { return samples.size(); }

    void validate() const {
        if (!(fs > 0.0)) throw ArgumentError("signal sampling rate must be positive");
        if (samples.size() < 2) throw ArgumentError("signal needs at least 2 samples");
        for (double v : samples) {
            if (!std::isfinite(v)) throw DataError("signal contains a non-finite value");
        }
    }
};

/// Bus-by-time matrix of phasor angles in radians. Row-major storage.
struct AngleMatrix {
    std::size_t buses = 0;
    std::size_t steps = 0;
    std::vector<double> values; // buses x steps
    double fs = 1.0;

    double& at(std::size_t bus, std::size_t t) { return values[bus * steps + t]; }
    double at(std::size_t bus, std::size_t t) const { return values[bus * steps + t]; }

    Signal row(std::size_t bus) const {
        Signal s;
        s.fs = fs;
        s.samples.assign(values.begin() + static_cast<std::ptrdiff_t>(bus * steps),
                         values.begin() + static_cast<std::ptrdiff_t>((bus + 1) * steps));
        return s;
    }

    void validate() const {
        if (buses == 0) throw ArgumentError("angle matrix needs at least one bus row");
        if (steps < 2) throw ArgumentError("angle matrix needs at least 2 time steps");
        if (!(fs > 0.0)) throw ArgumentError("angle matrix sampling rate must be positive");
        if (values.size() != buses * steps) {
            throw InternalError("angle matrix storage does not match its dimensions");
        }
        for (double v : values) {
            if (!std::isfinite(v)) throw DataError("angle matrix contains a non-finite value");
        }
    }
};

struct LabeledSample {
    Signal signal;
    StabilityLabel label = StabilityLabel::stable;
};

/// Collection of equal-length, equal-rate labeled samples.
struct LabeledDataset {
    std::vector<LabeledSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    std::size_t length() const { return samples.empty() ? 0 : samples.front().signal.size(); }
    double fs() const { return samples.empty() ? 0.0 : samples.front().signal.fs; }

    std::size_t count(StabilityLabel l) const {
        std::size_t n = 0;
        for (const auto& s : samples) n += (s.label == l) ? 1 : 0;
        return n;
    }

    void validate() const {
        const std::size_t len = length();
        const double rate = fs();
        for (const auto& s : samples) {
            s.signal.validate();
            if (s.signal.size() != len) throw FormatError("dataset samples have unequal lengths");
            if (s.signal.fs != rate) throw FormatError("dataset samples have unequal sampling rates");
        }
    }
};

} // namespace vmdaug
