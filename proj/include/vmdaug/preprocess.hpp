#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "vmdaug/errors.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Center-of-angle weights
// ============================================================================

/// Non-negative per-bus weights summing to 1 (inertia proxies).
struct CoaWeights {
    std::vector<double> weights;

    static CoaWeights uniform(std::size_t n_buses) {
        CoaWeights w;
        w.weights.assign(n_buses, 1.0 / static_cast<double>(n_buses));
        return w;
    }

    void validate(std::size_t n_buses) const {
        if (weights.size() != n_buses) {
            throw ArgumentError("weight count does not match bus count");
        }
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ArgumentError("weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ArgumentError("weights must sum to 1");
    }
};

// ============================================================================
// Pipeline stages
// ============================================================================

/// Removes the weighted average of all bus rows from each column.
inline AngleMatrix subtract_center_of_angle(const AngleMatrix& a, const CoaWeights& w) {
    a.validate();
    w.validate(a.buses);
    AngleMatrix out = a;
    for (std::size_t t = 0; t < a.steps; ++t) {
        double center = 0.0;
        for (std::size_t i = 0; i < a.buses; ++i) center += w.weights[i] * a.at(i, t);
        for (std::size_t i = 0; i < a.buses; ++i) out.at(i, t) = a.at(i, t) - center;
    }
    return out;
}

/// Removes 2*pi jumps so successive differences stay inside (-pi, pi].
/// Every sample moves by an integer multiple of 2*pi; the first is unchanged.
inline Signal unwrap(const Signal& s) {
    s.validate();
    Signal out = s;
    long long k = 0;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t t = 1; t < s.samples.size(); ++t) {
        const double d = s.samples[t] - s.samples[t - 1];
        k -= static_cast<long long>(std::floor((d + std::numbers::pi) / two_pi));
        out.samples[t] = s.samples[t] + two_pi * static_cast<double>(k);
    }
    return out;
}

/// Subtracts the initial value: out[t] = s[t] - s[0].
inline Signal deviation(const Signal& s) {
    if (s.samples.empty()) throw ArgumentError("deviation needs a non-empty signal");
    Signal out = s;
    const double first = s.samples[0];
    for (double& v : out.samples) v -= first;
    return out;
}

/// Subtracts the least-squares affine fit over the sample index.
inline Signal detrend_linear(const Signal& s) {
    s.validate();
    const std::size_t n = s.samples.size();
    const double t_mean = 0.5 * static_cast<double>(n - 1);
    double y_mean = 0.0;
    for (double v : s.samples) y_mean += v;
    y_mean /= static_cast<double>(n);

    double cov = 0.0, var = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double dt = static_cast<double>(t) - t_mean;
        cov += dt * (s.samples[t] - y_mean);
        var += dt * dt;
    }
    const double slope = cov / var;
    const double intercept = y_mean - slope * t_mean;

    Signal out = s;
    for (std::size_t t = 0; t < n; ++t) {
        out.samples[t] -= intercept + slope * static_cast<double>(t);
    }
    return out;
}

/// Per-bus preprocessing: center-of-angle removal, unwrapping, deviation
/// from the initial value, then linear detrending, in that order.
inline std::vector<Signal> preprocess_pipeline(const AngleMatrix& a, const CoaWeights& w) {
    AngleMatrix centered = subtract_center_of_angle(a, w);
    std::vector<Signal> out;
    out.reserve(a.buses);
    for (std::size_t i = 0; i < a.buses; ++i) {
        out.push_back(detrend_linear(deviation(unwrap(centered.row(i)))));
    }
    return out;
}

} // namespace vmdaug
