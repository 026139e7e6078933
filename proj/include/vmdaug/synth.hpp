#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "vmdaug/errors.hpp"
#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Ringdown specification
// ============================================================================

inline constexpr double kDefaultTargetFrequencyHz = 0.8;
inline constexpr double kDefaultZetaThreshold = 0.05;

struct RingdownModeSpec {
    double frequency = 0.8; // Hz
    double zeta = 0.1;      // damping ratio, |zeta| < 1
    double amplitude = 1.0;
    double phase = 0.0;     // radians
};

struct RingdownSpec {
    std::vector<RingdownModeSpec> modes;
    double trend_slope = 0.0;  // units per second
    double noise_sigma = 0.0;  // white Gaussian noise level
    int length = 400;
    double fs = 60.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (length < 2) throw ArgumentError("ringdown length must be >= 2");
        if (!(fs > 0.0)) throw ArgumentError("sampling rate must be positive");
        if (noise_sigma < 0.0) throw ArgumentError("noise sigma must be >= 0");
        for (const auto& m : modes) {
            if (std::abs(m.zeta) >= 1.0) throw ArgumentError("|zeta| must be < 1");
            if (!(m.frequency >= 0.0 && m.frequency < fs / 2.0)) {
                throw ArgumentError("mode frequency must lie in [0, fs/2)");
            }
            if (m.amplitude < 0.0) throw ArgumentError("mode amplitude must be >= 0");
        }
    }
};

/// Continuous-time pole real part for a damped frequency and damping ratio.
inline double sigma_from_zeta(double zeta, double frequency_hz) {
    return -zeta * 2.0 * std::numbers::pi * frequency_hz / std::sqrt(1.0 - zeta * zeta);
}

// ============================================================================
// Generation
// ============================================================================

/// Synthesizes one labeled ringdown: a sum of damped sinusoids plus a linear
/// trend and white Gaussian noise. The ground-truth label comes from the
/// damping ratio of the spec mode nearest the target frequency.
inline LabeledSample gen_ringdown(const RingdownSpec& spec,
                                  double zeta_threshold = kDefaultZetaThreshold,
                                  double target_frequency = kDefaultTargetFrequencyHz) {
    spec.validate();
    if (spec.modes.empty()) throw ArgumentError("ringdown spec has no modes");
    double max_amp = 0.0;
    for (const auto& m : spec.modes) max_amp = std::max(max_amp, m.amplitude);
    if (max_amp == 0.0) throw DataError("degenerate ringdown: all mode amplitudes are zero");

    Rng rng(spec.seed);
    LabeledSample out;
    out.signal.fs = spec.fs;
    out.signal.samples.resize(static_cast<std::size_t>(spec.length));
    for (int i = 0; i < spec.length; ++i) {
        const double t = static_cast<double>(i) / spec.fs;
        double v = spec.trend_slope * t;
        for (const auto& m : spec.modes) {
            const double sigma = sigma_from_zeta(m.zeta, m.frequency);
            v += m.amplitude * std::exp(sigma * t) *
                 std::cos(2.0 * std::numbers::pi * m.frequency * t + m.phase);
        }
        if (spec.noise_sigma > 0.0) v += spec.noise_sigma * rng.normal();
        out.signal.samples[static_cast<std::size_t>(i)] = v;
    }

    const RingdownModeSpec* nearest = &spec.modes.front();
    for (const auto& m : spec.modes) {
        if (std::abs(m.frequency - target_frequency) <
            std::abs(nearest->frequency - target_frequency)) {
            nearest = &m;
        }
    }
    out.label = nearest->zeta >= zeta_threshold ? StabilityLabel::stable : StabilityLabel::unstable;
    return out;
}

/// Knobs for randomized corpus generation. The primary mode carries the
/// class information; secondary modes stay outside a guard band around the
/// target frequency so the primary is always the mode nearest the target.
struct GenOptions {
    int length = 400;
    double fs = 60.0;
    double noise_scale = 0.01;  // noise sigma as a fraction of the primary amplitude
    bool with_trend = true;
};

struct GeneratedDataset {
    LabeledDataset data;
    std::vector<RingdownSpec> truth; // per-sample generating parameters
};

namespace detail {

inline RingdownSpec random_ringdown_spec(bool stable, std::uint64_t seed, const GenOptions& opt) {
    Rng rng(seed);
    RingdownSpec spec;
    spec.length = opt.length;
    spec.fs = opt.fs;
    spec.seed = derive_seed(seed, 0xD1CE);

    RingdownModeSpec primary;
    primary.frequency = rng.uniform(0.6, 1.0);
    primary.zeta = stable ? rng.uniform(0.06, 0.20) : rng.uniform(-0.02, 0.04);
    primary.amplitude = rng.uniform(0.5, 2.0);
    primary.phase = rng.uniform(-std::numbers::pi, std::numbers::pi);
    spec.modes.push_back(primary);

    const int n_secondary = 1 + static_cast<int>(rng.index(2));
    for (int i = 0; i < n_secondary; ++i) {
        RingdownModeSpec sec;
        sec.frequency = rng.bernoulli(0.5) ? rng.uniform(0.2, 0.45) : rng.uniform(1.3, 2.0);
        sec.zeta = rng.uniform(0.05, 0.30);
        sec.amplitude = primary.amplitude * rng.uniform(0.05, 0.40);
        sec.phase = rng.uniform(-std::numbers::pi, std::numbers::pi);
        spec.modes.push_back(sec);
    }
    spec.trend_slope = opt.with_trend ? rng.uniform(-0.5, 0.5) : 0.0;
    spec.noise_sigma = opt.noise_scale * primary.amplitude;
    return spec;
}

} // namespace detail

/// Generates n labeled ringdowns with randomized mode parameters.
/// `class_balance` is the stable fraction; class counts land within 1 of
/// n * balance. Deterministic per seed.
inline GeneratedDataset gen_dataset_detailed(std::size_t n, double class_balance,
                                             std::uint64_t seed, const GenOptions& opt = {}) {
    if (n < 2) throw ArgumentError("dataset size must be >= 2");
    if (!(class_balance > 0.0 && class_balance < 1.0)) {
        throw ArgumentError("class balance must lie in (0, 1)");
    }
    const auto n_stable = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * class_balance));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(seed, 0x0DDE));
    shuffle_rng.shuffle(order);

    GeneratedDataset out;
    out.data.samples.resize(n);
    out.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool stable = i < n_stable;
        const auto spec = detail::random_ringdown_spec(stable, derive_seed(seed, i), opt);
        out.truth[order[i]] = spec;
        out.data.samples[order[i]] = gen_ringdown(spec);
    }
    return out;
}

inline LabeledDataset gen_dataset(std::size_t n, double class_balance, std::uint64_t seed,
                                  const GenOptions& opt = {}) {
    return gen_dataset_detailed(n, class_balance, seed, opt).data;
}

} // namespace vmdaug
