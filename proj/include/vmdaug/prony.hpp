#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "vmdaug/errors.hpp"
#include "vmdaug/signal.hpp"
#include "vmdaug/vmd.hpp"

namespace vmdaug {

// ============================================================================
// Types
// ============================================================================

/// One real damped sinusoid A * exp(sigma * t) * cos(2*pi*f*t + phi).
struct DampedMode {
    double frequency = 0.0;     // Hz, in [0, fs/2]
    double damping_sigma = 0.0; // 1/s; negative = decaying
    double amplitude = 0.0;
    double phase = 0.0;         // radians in (-pi, pi]
};

struct LabelConfig {
    double target_frequency = 0.8;        // Hz; mode of interest
    double damping_ratio_threshold = 0.05; // stable iff zeta >= threshold
    int prony_order = 2;

    void validate() const {
        if (!(target_frequency > 0.0)) throw ArgumentError("target frequency must be positive");
        if (!(damping_ratio_threshold > 0.0 && damping_ratio_threshold < 1.0)) {
            throw ArgumentError("damping ratio threshold must lie in (0, 1)");
        }
        if (prony_order < 2 || prony_order % 2 != 0) {
            throw ArgumentError("prony order must be an even integer >= 2");
        }
    }
};

// ============================================================================
// Operations
// ============================================================================

/// The mode with the largest energy; ties break toward the lower index.
inline const Signal& largest_energy_imf(const ModeSet& m) {
    if (m.modes.empty()) throw ArgumentError("mode set is empty");
    std::size_t best = 0;
    double best_energy = mode_energy(m.modes[0]);
    for (std::size_t k = 1; k < m.modes.size(); ++k) {
        const double e = mode_energy(m.modes[k]);
        if (e > best_energy) {
            best = k;
            best_energy = e;
        }
    }
    return m.modes[best];
}

/// Fits a sum of damped sinusoids by forward linear prediction: solve the
/// prediction coefficients in least squares, take the roots of the companion
/// polynomial as discrete poles, then fit complex amplitudes through a
/// Vandermonde least-squares pass. Conjugate pole pairs merge into one
/// DampedMode. Roots with |z| > 1.5 are discarded as numerical artifacts.
inline std::vector<DampedMode> prony_fit(const Signal& s, int order) {
    s.validate();
    const std::size_t n = s.samples.size();
    if (order < 2 || order % 2 != 0) throw ArgumentError("prony order must be an even integer >= 2");
    if (static_cast<std::size_t>(order) > n / 4) {
        throw ArgumentError("prony order exceeds a quarter of the signal length");
    }
    const std::size_t p = static_cast<std::size_t>(order);
    const std::size_t rows = n - p;

    Eigen::MatrixXd pred(rows, p);
    Eigen::VectorXd target(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < p; ++i) pred(r, i) = s.samples[p + r - 1 - i];
        target(r) = s.samples[p + r];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(pred);
    if (qr.rank() < static_cast<Eigen::Index>(p)) {
        throw FitError("prediction matrix is rank-deficient; lower the order");
    }
    Eigen::VectorXd coeffs = qr.solve(target);

    // Companion matrix of z^p - a_1 z^{p-1} - ... - a_p.
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t i = 0; i + 1 < p; ++i) companion(i + 1, i) = 1.0;
    for (std::size_t i = 0; i < p; ++i) companion(i, p - 1) = coeffs(static_cast<Eigen::Index>(p - 1 - i));
    Eigen::EigenSolver<Eigen::MatrixXd> eig(companion);

    std::vector<std::complex<double>> roots;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const std::complex<double> z = eig.eigenvalues()(i);
        if (std::abs(z) > 1.5) continue; // explosive pole artifact
        if (std::abs(z) < 1e-12) continue;
        roots.push_back(z);
    }
    if (roots.empty()) throw FitError("no usable poles found");

    Eigen::MatrixXcd vand(n, roots.size());
    for (std::size_t j = 0; j < roots.size(); ++j) {
        std::complex<double> zp = 1.0;
        for (std::size_t t = 0; t < n; ++t) {
            vand(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = zp;
            zp *= roots[j];
        }
    }
    Eigen::VectorXcd samples(n);
    for (std::size_t t = 0; t < n; ++t) samples(static_cast<Eigen::Index>(t)) = s.samples[t];
    Eigen::VectorXcd amps = vand.colPivHouseholderQr().solve(samples);

    std::vector<DampedMode> modes;
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const std::complex<double> z = roots[j];
        if (z.imag() < 0.0) continue; // conjugate twin of a kept root
        const std::complex<double> c = amps(static_cast<Eigen::Index>(j));
        DampedMode mode;
        mode.damping_sigma = std::log(std::abs(z)) * s.fs;
        mode.frequency = std::abs(std::arg(z)) * s.fs / (2.0 * std::numbers::pi);
        mode.amplitude = (z.imag() > 0.0 ? 2.0 : 1.0) * std::abs(c);
        mode.phase = std::arg(c);
        if (mode.phase <= -std::numbers::pi) mode.phase = std::numbers::pi;
        modes.push_back(mode);
    }
    std::sort(modes.begin(), modes.end(), [](const DampedMode& a, const DampedMode& b) {
        if (a.frequency != b.frequency) return a.frequency < b.frequency;
        return a.amplitude > b.amplitude;
    });
    return modes;
}

/// zeta = -sigma / sqrt(sigma^2 + (2*pi*f)^2), in [-1, 1].
inline double damping_ratio(const DampedMode& m) {
    const double omega = 2.0 * std::numbers::pi * m.frequency;
    if (m.damping_sigma == 0.0 && omega == 0.0) {
        throw ArgumentError("damping ratio undefined for a (0, 0) mode");
    }
    return -m.damping_sigma / std::hypot(m.damping_sigma, omega);
}

/// Outcome of labeling one signal: the matched mode and its damping ratio.
struct LabelDecision {
    DampedMode mode;
    double zeta = 0.0;
    StabilityLabel label = StabilityLabel::unstable;
};

/// Labels one signal: decompose, take the largest-energy mode, fit damped
/// sinusoids, pick the fitted mode nearest the target frequency, and compare
/// its damping ratio to the threshold. A sample with no fitted mode inside
/// [target/2, 2*target] raises LabelError.
inline LabelDecision decide_label(const Signal& s, const VmdConfig& vmd_cfg, const LabelConfig& lbl_cfg) {
    lbl_cfg.validate();
    ModeSet ms = decompose(s, vmd_cfg);
    const Signal& imf = largest_energy_imf(ms);
    auto modes = prony_fit(imf, lbl_cfg.prony_order);

    const double target = lbl_cfg.target_frequency;
    const DampedMode* best = nullptr;
    for (const auto& m : modes) {
        if (m.frequency < target / 2.0 || m.frequency > 2.0 * target) continue;
        if (!best || std::abs(m.frequency - target) < std::abs(best->frequency - target)) {
            best = &m;
        }
    }
    if (!best) {
        throw LabelError("no fitted mode within [target/2, 2*target] of the target frequency");
    }
    LabelDecision out;
    out.mode = *best;
    out.zeta = damping_ratio(*best);
    out.label = out.zeta >= lbl_cfg.damping_ratio_threshold ? StabilityLabel::stable
                                                            : StabilityLabel::unstable;
    return out;
}

inline LabeledSample label_sample(const Signal& s, const VmdConfig& vmd_cfg, const LabelConfig& lbl_cfg) {
    return {s, decide_label(s, vmd_cfg, lbl_cfg).label};
}

} // namespace vmdaug
