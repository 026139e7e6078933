#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "vmdaug/errors.hpp"
#include "vmdaug/fft.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Configuration and result types
// ============================================================================

struct VmdConfig {
    int k_modes = 3;                 // number of modes K
    double bandwidth_penalty = 2000; // quadratic penalty on mode bandwidth
    double dual_ascent_step = 0.0;   // tau; 0 leaves slack for noise
    double tolerance = 1e-7;         // relative update norm for convergence
    int max_iterations = 500;

    enum class Init { zero, uniform_spread };
    Init init_scheme = Init::uniform_spread;

    void validate() const {
        if (k_modes < 1) throw ArgumentError("k_modes must be >= 1");
        if (!(bandwidth_penalty > 0.0)) throw ArgumentError("bandwidth_penalty must be positive");
        if (dual_ascent_step < 0.0) throw ArgumentError("dual_ascent_step must be >= 0");
        if (!(tolerance > 0.0 && tolerance < 1.0)) throw ArgumentError("tolerance must lie in (0, 1)");
        if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    }
};

/// Band-limited modes extracted from one signal, with their center
/// frequencies in Hz and per-iteration solver diagnostics.
struct ModeSet {
    std::vector<Signal> modes;
    std::vector<double> center_freqs_hz;
    int iterations_used = 0;
    bool converged = false;
    std::vector<double> objective_history; // augmented-Lagrangian value per iteration
};

// ============================================================================
// Operations
// ============================================================================

/// Sum of squared samples.
inline double mode_energy(const Signal& u) {
    double e = 0.0;
    for (double v : u.samples) e += v * v;
    return e;
}

/// Decomposes a signal into K band-limited modes by alternating spectral
/// updates: each mode spectrum is refit through a Wiener-like filter
/// 1 / (1 + 2*penalty*(w - w_k)^2) on the one-sided spectrum of the
/// mirror-extended signal, center frequencies move to the power-weighted
/// mean frequency, and an optional dual variable ascends on the
/// reconstruction residual.
inline ModeSet decompose(const Signal& s, const VmdConfig& cfg) {
    cfg.validate();
    if (!(s.fs > 0.0)) throw ArgumentError("signal sampling rate must be positive");
    if (s.samples.size() < 4) throw ArgumentError("signal too short to decompose (need >= 4 samples)");
    for (double v : s.samples) {
        if (!std::isfinite(v)) throw DataError("cannot decompose a signal with non-finite values");
    }
    const std::size_t n = s.samples.size();
    const std::size_t k_modes = static_cast<std::size_t>(cfg.k_modes);
    if (k_modes > n / 2) throw ArgumentError("k_modes exceeds half the signal length");

    // Mirror-extend by half the length on each side to tame edge ringing.
    const std::size_t left = n / 2;
    const std::size_t right = n - left;
    const std::size_t m = 2 * n;
    detail::cvec mirrored(m);
    for (std::size_t i = 0; i < left; ++i) mirrored[i] = s.samples[left - 1 - i];
    for (std::size_t i = 0; i < n; ++i) mirrored[left + i] = s.samples[i];
    for (std::size_t i = 0; i < right; ++i) mirrored[left + n + i] = s.samples[n - 1 - i];

    // One-sided spectrum on the shifted grid: bin i holds (i - m/2) / m
    // cycles per sample; the negative half is zeroed.
    detail::cvec f_hat = detail::fft(mirrored);
    detail::fftshift(f_hat);
    const std::size_t half = m / 2;
    for (std::size_t i = 0; i < half; ++i) f_hat[i] = 0.0;

    std::vector<double> freqs(m);
    for (std::size_t i = 0; i < m; ++i) {
        freqs[i] = (static_cast<double>(i) - static_cast<double>(half)) / static_cast<double>(m);
    }

    std::vector<double> omega(k_modes, 0.0);
    if (cfg.init_scheme == VmdConfig::Init::uniform_spread) {
        for (std::size_t k = 0; k < k_modes; ++k) {
            omega[k] = 0.5 * static_cast<double>(k) / static_cast<double>(k_modes);
        }
    }

    std::vector<detail::cvec> u_hat(k_modes, detail::cvec(m));
    std::vector<detail::cvec> u_hat_prev(k_modes, detail::cvec(m));
    detail::cvec lambda_hat(m);
    const double alpha2 = 2.0 * cfg.bandwidth_penalty;
    const double eps = std::numeric_limits<double>::epsilon();

    ModeSet result;
    result.converged = false;

    int iter = 0;
    for (; iter < cfg.max_iterations; ++iter) {
        // Running sum of all current mode spectra, refreshed once per sweep.
        detail::cvec total(m);
        for (std::size_t k = 0; k < k_modes; ++k) {
            for (std::size_t i = half; i < m; ++i) total[i] += u_hat[k][i];
        }

        for (std::size_t k = 0; k < k_modes; ++k) {
            double num = 0.0, den = 0.0;
            for (std::size_t i = half; i < m; ++i) {
                const std::complex<double> residual =
                    f_hat[i] - (total[i] - u_hat[k][i]) - 0.5 * lambda_hat[i];
                const double d = freqs[i] - omega[k];
                const std::complex<double> updated = residual / (1.0 + alpha2 * d * d);
                total[i] += updated - u_hat[k][i];
                u_hat[k][i] = updated;
                const double power = std::norm(updated);
                num += freqs[i] * power;
                den += power;
            }
            if (den > 0.0) omega[k] = num / den; // empty mode keeps its frequency
        }

        if (cfg.dual_ascent_step > 0.0) {
            for (std::size_t i = half; i < m; ++i) {
                lambda_hat[i] += cfg.dual_ascent_step * (total[i] - f_hat[i]);
            }
        }

        // Augmented-Lagrangian value: mode bandwidths plus the residual term
        // the spectral updates minimize.
        double objective = 0.0;
        for (std::size_t i = half; i < m; ++i) {
            for (std::size_t k = 0; k < k_modes; ++k) {
                const double d = freqs[i] - omega[k];
                objective += alpha2 * d * d * std::norm(u_hat[k][i]);
            }
            objective += std::norm(f_hat[i] - total[i] - 0.5 * lambda_hat[i]);
        }
        result.objective_history.push_back(objective);

        double diff = 0.0;
        for (std::size_t k = 0; k < k_modes; ++k) {
            double delta = 0.0, prev_norm = 0.0;
            for (std::size_t i = half; i < m; ++i) {
                delta += std::norm(u_hat[k][i] - u_hat_prev[k][i]);
                prev_norm += std::norm(u_hat_prev[k][i]);
            }
            diff += delta / (prev_norm + eps);
        }
        u_hat_prev = u_hat;
        if (diff < cfg.tolerance) {
            result.converged = true;
            ++iter;
            break;
        }
    }
    result.iterations_used = iter;

    // Rebuild time-domain modes: mirror the one-sided spectrum to a
    // conjugate-symmetric one, invert, keep the middle section.
    result.modes.reserve(k_modes);
    result.center_freqs_hz.reserve(k_modes);
    for (std::size_t k = 0; k < k_modes; ++k) {
        detail::cvec full(m);
        for (std::size_t i = half; i < m; ++i) full[i] = u_hat[k][i];
        for (std::size_t i = half + 1; i < m; ++i) full[m - i] = std::conj(u_hat[k][i]);
        full[0] = std::conj(full[m - 1]);
        detail::ifftshift(full);
        detail::cvec time = detail::ifft(full);

        Signal mode;
        mode.fs = s.fs;
        mode.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) mode.samples[i] = time[left + i].real();
        result.modes.push_back(std::move(mode));

        const double freq_hz = std::clamp(omega[k] * s.fs, 0.0, s.fs / 2.0);
        result.center_freqs_hz.push_back(freq_hz);
    }
    return result;
}

/// Pointwise sum of all modes.
inline Signal reconstruct(const ModeSet& m) {
    if (m.modes.empty()) throw ArgumentError("cannot reconstruct from an empty mode set");
    Signal out = m.modes.front();
    for (std::size_t k = 1; k < m.modes.size(); ++k) {
        if (m.modes[k].samples.size() != out.samples.size()) {
            throw InternalError("mode lengths disagree in reconstruct");
        }
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            out.samples[i] += m.modes[k].samples[i];
        }
    }
    return out;
}

namespace detail {

/// Index of the trend-carrying mode: the lowest center frequency,
/// ties broken toward the lower mode index.
inline std::size_t trend_mode_index(const ModeSet& m) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < m.center_freqs_hz.size(); ++k) {
        if (m.center_freqs_hz[k] < m.center_freqs_hz[best]) best = k;
    }
    return best;
}

} // namespace detail

/// Decomposes the signal and returns the sum of all modes except the
/// trend-carrying one.
inline Signal augment(const Signal& s, const VmdConfig& cfg) {
    if (cfg.k_modes < 2) throw ArgumentError("augmentation needs at least 2 modes");
    ModeSet ms = decompose(s, cfg);
    const std::size_t drop = detail::trend_mode_index(ms);
    Signal out;
    out.fs = s.fs;
    out.samples.assign(s.samples.size(), 0.0);
    for (std::size_t k = 0; k < ms.modes.size(); ++k) {
        if (k == drop) continue;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            out.samples[i] += ms.modes[k].samples[i];
        }
    }
    return out;
}

/// Applies `augment` to every sample, preserving labels.
inline LabeledDataset augment_dataset(const LabeledDataset& d, const VmdConfig& cfg) {
    LabeledDataset out;
    out.samples.reserve(d.size());
    for (const auto& s : d.samples) {
        out.samples.push_back({augment(s.signal, cfg), s.label});
    }
    return out;
}

} // namespace vmdaug
