#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vmdaug/errors.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Types
// ============================================================================

/// RBF kernel settings. An unset bandwidth selects the median heuristic.
struct KernelConfig {
    std::optional<double> bandwidth_sigma; // nullopt = median heuristic
    double kernel_bound = 1.0;             // K with |k(x,y)| <= K; 1 for RBF

    void validate() const {
        if (bandwidth_sigma && !(*bandwidth_sigma > 0.0)) {
            throw ArgumentError("kernel bandwidth must be positive");
        }
        if (!(kernel_bound > 0.0)) throw ArgumentError("kernel bound must be positive");
    }
};

enum class Verdict { rejected, not_rejected };

inline std::string to_string(Verdict v) {
    return v == Verdict::rejected ? "rejected" : "not-rejected";
}

/// Two-sample test outcome: both statistics, both thresholds, both verdicts.
struct MmdReport {
    double mmd_biased = 0.0;
    double mmd_unbiased_sq = 0.0; // may be negative
    double rademacher_threshold = 0.0;
    double asymptotic_threshold = 0.0;
    double alpha = 0.0;
    std::size_t m = 0;
    double sigma_used = 0.0;
    Verdict verdict_rademacher = Verdict::not_rejected;
    Verdict verdict_asymptotic = Verdict::not_rejected;
};

using SampleSet = std::vector<std::vector<double>>;

// ============================================================================
// Kernel and bandwidth
// ============================================================================

/// Gaussian kernel exp(-||x - y||^2 / (2 sigma^2)), in (0, 1].
inline double rbf_kernel(const std::vector<double>& x, const std::vector<double>& y, double sigma) {
    if (x.size() != y.size()) throw ArgumentError("kernel arguments have different dimensions");
    if (!(sigma > 0.0)) throw ArgumentError("kernel bandwidth must be positive");
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sq += d * d;
    }
    return std::exp(-sq / (2.0 * sigma * sigma));
}

/// Median pairwise distance over the pooled set, divided by sqrt(2).
/// Falls back to 1.0 when every point coincides.
inline double median_heuristic_sigma(const SampleSet& x, const SampleSet& y) {
    const std::size_t total = x.size() + y.size();
    if (total < 2) throw ArgumentError("median heuristic needs at least 2 pooled points");
    auto point = [&](std::size_t i) -> const std::vector<double>& {
        return i < x.size() ? x[i] : y[i - x.size()];
    };
    std::vector<double> dists;
    dists.reserve(total * (total - 1) / 2);
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t j = i + 1; j < total; ++j) {
            const auto& a = point(i);
            const auto& b = point(j);
            if (a.size() != b.size()) throw ArgumentError("pooled points have different dimensions");
            double sq = 0.0;
            for (std::size_t d = 0; d < a.size(); ++d) {
                const double diff = a[d] - b[d];
                sq += diff * diff;
            }
            dists.push_back(std::sqrt(sq));
        }
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t n = dists.size();
    const double median = (n % 2 == 1) ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
    if (median <= 0.0) return 1.0;
    return median / std::sqrt(2.0);
}

// ============================================================================
// Statistics
// ============================================================================

namespace detail {

struct GramSums {
    double xx_full = 0.0;   // sum over all (i, j) within X, diagonal included
    double yy_full = 0.0;
    double xy_full = 0.0;
    double xx_offdiag = 0.0;
    double yy_offdiag = 0.0;
};

inline GramSums gram_sums(const SampleSet& x, const SampleSet& y, double sigma) {
    GramSums g;
    const std::size_t m = x.size(), n = y.size();
    for (std::size_t i = 0; i < m; ++i) {
        g.xx_full += 1.0; // k(x_i, x_i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double k = rbf_kernel(x[i], x[j], sigma);
            g.xx_full += 2.0 * k;
            g.xx_offdiag += 2.0 * k;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.yy_full += 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = rbf_kernel(y[i], y[j], sigma);
            g.yy_full += 2.0 * k;
            g.yy_offdiag += 2.0 * k;
        }
    }
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            g.xy_full += rbf_kernel(x[i], y[j], sigma);
        }
    }
    return g;
}

inline void check_sets(const SampleSet& x, const SampleSet& y, std::size_t min_each) {
    if (x.size() < min_each || y.size() < min_each) {
        throw ArgumentError("sample sets are too small");
    }
    const std::size_t dim = x.front().size();
    for (const auto& v : x) {
        if (v.size() != dim) throw ArgumentError("samples have different dimensions");
    }
    for (const auto& v : y) {
        if (v.size() != dim) throw ArgumentError("samples have different dimensions");
    }
}

} // namespace detail

/// Biased MMD estimate: sqrt of mean(XX) - 2 mean(XY) + mean(YY), with the
/// argument clamped at zero before the square root.
inline double mmd_biased(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_sets(x, y, 1);
    const auto g = detail::gram_sums(x, y, sigma);
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    const double sq = g.xx_full / (m * m) - 2.0 * g.xy_full / (m * n) + g.yy_full / (n * n);
    return std::sqrt(std::max(0.0, sq));
}

/// Unbiased estimate of MMD^2 (U-statistic; may be negative).
inline double mmd_unbiased_sq(const SampleSet& x, const SampleSet& y, double sigma) {
    detail::check_sets(x, y, 2);
    const auto g = detail::gram_sums(x, y, sigma);
    const double m = static_cast<double>(x.size());
    const double n = static_cast<double>(y.size());
    return g.xx_offdiag / (m * (m - 1.0)) + g.yy_offdiag / (n * (n - 1.0)) -
           2.0 * g.xy_full / (m * n);
}

inline double mmd_biased(const SampleSet& x, const SampleSet& y, const KernelConfig& k) {
    k.validate();
    return mmd_biased(x, y, k.bandwidth_sigma ? *k.bandwidth_sigma : median_heuristic_sigma(x, y));
}

inline double mmd_unbiased_sq(const SampleSet& x, const SampleSet& y, const KernelConfig& k) {
    k.validate();
    return mmd_unbiased_sq(x, y,
                           k.bandwidth_sigma ? *k.bandwidth_sigma : median_heuristic_sigma(x, y));
}

// ============================================================================
// Acceptance-region bounds
// ============================================================================

/// sqrt(2K/m) * (1 + sqrt(2 ln(1/alpha))); threshold for the biased statistic.
inline double rademacher_bound(std::size_t m, double kernel_bound, double alpha) {
    if (m < 1) throw ArgumentError("sample count must be >= 1");
    if (!(kernel_bound > 0.0)) throw ArgumentError("kernel bound must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    return std::sqrt(2.0 * kernel_bound / static_cast<double>(m)) *
           (1.0 + std::sqrt(2.0 * std::log(1.0 / alpha)));
}

/// (4K/sqrt(m)) * sqrt(ln(1/alpha)); threshold for the unbiased squared statistic.
inline double asymptotic_bound(std::size_t m, double kernel_bound, double alpha) {
    if (m < 1) throw ArgumentError("sample count must be >= 1");
    if (!(kernel_bound > 0.0)) throw ArgumentError("kernel bound must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    return 4.0 * kernel_bound / std::sqrt(static_cast<double>(m)) *
           std::sqrt(std::log(1.0 / alpha));
}

// ============================================================================
// Two-sample test
// ============================================================================

/// Runs both tests at level alpha. Requires m = n, the regime both bounds
/// are stated for. Rejected iff statistic >= threshold.
inline MmdReport two_sample_test(const SampleSet& x, const SampleSet& y,
                                 const KernelConfig& k, double alpha) {
    k.validate();
    if (x.size() != y.size()) {
        throw ArgumentError("two-sample test requires equally sized sets (bounds assume m = n)");
    }
    detail::check_sets(x, y, 2);
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");

    MmdReport r;
    r.alpha = alpha;
    r.m = x.size();
    r.sigma_used = k.bandwidth_sigma ? *k.bandwidth_sigma : median_heuristic_sigma(x, y);

    const auto g = detail::gram_sums(x, y, r.sigma_used);
    const double m = static_cast<double>(x.size());
    const double sq = (g.xx_full - 2.0 * g.xy_full + g.yy_full) / (m * m);
    r.mmd_biased = std::sqrt(std::max(0.0, sq));
    r.mmd_unbiased_sq = (g.xx_offdiag + g.yy_offdiag) / (m * (m - 1.0)) - 2.0 * g.xy_full / (m * m);

    r.rademacher_threshold = rademacher_bound(r.m, k.kernel_bound, alpha);
    r.asymptotic_threshold = asymptotic_bound(r.m, k.kernel_bound, alpha);
    r.verdict_rademacher =
        r.mmd_biased >= r.rademacher_threshold ? Verdict::rejected : Verdict::not_rejected;
    r.verdict_asymptotic =
        r.mmd_unbiased_sq >= r.asymptotic_threshold ? Verdict::rejected : Verdict::not_rejected;
    return r;
}

/// Extracts the raw signal vectors of a dataset for two-sample testing.
inline SampleSet to_sample_set(const LabeledDataset& d) {
    SampleSet out;
    out.reserve(d.size());
    for (const auto& s : d.samples) out.push_back(s.signal.samples);
    return out;
}

} // namespace vmdaug
