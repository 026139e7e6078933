#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vmdaug/dataset_io.hpp"
#include "vmdaug/encoder.hpp"
#include "vmdaug/errors.hpp"
#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Confusion counts and metrics
// ============================================================================

/// Counts with the unstable class as positive.
struct ConfusionCounts {
    long tp = 0; // unstable classified unstable
    long tn = 0; // stable classified stable
    long fp = 0; // stable classified unstable
    long fn = 0; // unstable classified stable

    long total() const { return tp + tn + fp + fn; }
};

inline ConfusionCounts confusion(const std::vector<StabilityLabel>& predictions,
                                 const std::vector<StabilityLabel>& labels) {
    if (predictions.size() != labels.size()) {
        throw ArgumentError("prediction and label counts differ");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool pred_unstable = predictions[i] == StabilityLabel::unstable;
        const bool true_unstable = labels[i] == StabilityLabel::unstable;
        if (pred_unstable && true_unstable) ++c.tp;
        else if (!pred_unstable && !true_unstable) ++c.tn;
        else if (pred_unstable && !true_unstable) ++c.fp;
        else ++c.fn;
    }
    return c;
}

/// A metric with a zero denominator is undefined, not zero.
using Metric = std::optional<double>;

inline Metric accuracy(const ConfusionCounts& c) {
    const long denom = c.total();
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(denom);
}

inline Metric precision(const ConfusionCounts& c) {
    const long denom = c.tp + c.fp;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

inline Metric recall(const ConfusionCounts& c) {
    const long denom = c.tp + c.fn;
    if (denom == 0) return std::nullopt;
    return static_cast<double>(c.tp) / static_cast<double>(denom);
}

// ============================================================================
// Cross-evaluation
// ============================================================================

struct CellMetrics {
    Metric accuracy;
    Metric precision;
    Metric recall;
    ConfusionCounts counts;
};

/// The four train/test pairings over two datasets A (original) and
/// B (augmented), each reporting accuracy, precision and recall.
struct TstrTrtsTable {
    CellMetrics train_a_test_a;
    CellMetrics train_b_test_b;
    CellMetrics train_a_test_b;
    CellMetrics train_b_test_a;
};

/// Trains a fresh model on `training` with the given seed and evaluates it
/// on `testing` at the default decision threshold.
inline CellMetrics run_cell(const LabeledDataset& training, const LabeledDataset& testing,
                            EncoderConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    EncoderModel model = init_model(cfg);
    train(model, training, cfg);

    std::vector<StabilityLabel> predictions, labels;
    predictions.reserve(testing.size());
    labels.reserve(testing.size());
    for (const auto& s : testing.samples) {
        predictions.push_back(classify(model, s.signal));
        labels.push_back(s.label);
    }
    CellMetrics out;
    out.counts = confusion(predictions, labels);
    out.accuracy = accuracy(out.counts);
    out.precision = precision(out.counts);
    out.recall = recall(out.counts);
    return out;
}

/// Seed streams used by the cross-evaluation and the size sweep, exposed so
/// callers can reproduce any individual cell.
inline std::uint64_t tstr_cell_seed(std::uint64_t base, int cell) {
    return derive_seed(base, 0x7E57 + static_cast<std::uint64_t>(cell));
}

inline std::uint64_t sweep_cell_seed(std::uint64_t base, std::size_t index) {
    return derive_seed(base, 0x511EE7 + index);
}

/// Splits each dataset with the same fraction and seed (paired samples end
/// up on the same side), then trains the four train/test pairings with
/// per-cell derived seeds.
inline TstrTrtsTable tstr_trts(const LabeledDataset& original, const LabeledDataset& augmented,
                               const EncoderConfig& cfg, double train_fraction = 2.0 / 3.0) {
    const std::uint64_t split_seed = derive_seed(cfg.seed, 0x5712);
    auto [train_a, test_a] = split_dataset(original, train_fraction, split_seed);
    auto [train_b, test_b] = split_dataset(augmented, train_fraction, split_seed);

    TstrTrtsTable t;
    t.train_a_test_a = run_cell(train_a, test_a, cfg, tstr_cell_seed(cfg.seed, 0));
    t.train_b_test_b = run_cell(train_b, test_b, cfg, tstr_cell_seed(cfg.seed, 1));
    t.train_a_test_b = run_cell(train_a, test_b, cfg, tstr_cell_seed(cfg.seed, 2));
    t.train_b_test_a = run_cell(train_b, test_a, cfg, tstr_cell_seed(cfg.seed, 3));
    return t;
}

// ============================================================================
// Data-size sweep
// ============================================================================

struct SweepRow {
    std::size_t size = 0;
    CellMetrics metrics;
};

/// Holds out a fixed evaluation set, then trains on stratified subsets of
/// the remaining pool at each requested size.
inline std::vector<SweepRow> data_size_sweep(const LabeledDataset& merged,
                                             const std::vector<std::size_t>& sizes,
                                             const EncoderConfig& cfg,
                                             double holdout_fraction = 0.25) {
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) {
        throw ArgumentError("holdout fraction must lie in (0, 1)");
    }
    const std::uint64_t split_seed = derive_seed(cfg.seed, 0x4E1D);
    auto [pool, holdout] = split_dataset(merged, 1.0 - holdout_fraction, split_seed);
    for (std::size_t s : sizes) {
        if (s > merged.size()) throw ArgumentError("sweep size exceeds the dataset size");
        if (s > pool.size()) {
            throw ArgumentError("sweep size exceeds the training pool left after the holdout");
        }
        if (s < 2) throw ArgumentError("sweep sizes must be >= 2");
    }

    std::vector<SweepRow> rows;
    rows.reserve(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const LabeledDataset part =
            stratified_subset(pool, sizes[i], derive_seed(cfg.seed, 0xCAFE + i));
        SweepRow row;
        row.size = sizes[i];
        row.metrics = run_cell(part, holdout, cfg, sweep_cell_seed(cfg.seed, i));
        rows.push_back(row);
    }
    return rows;
}

} // namespace vmdaug
