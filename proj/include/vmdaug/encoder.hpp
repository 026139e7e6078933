#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "vmdaug/errors.hpp"
#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

// ============================================================================
// Configuration
// ============================================================================

/// Classifier hyperparameters. The paper-scale preset (128/256/512 filters)
/// is the default; the desk preset (16/32/64) keeps CPU runs fast.
struct EncoderConfig {
    std::array<int, 3> filters{128, 256, 512};
    std::array<int, 3> kernel_sizes{5, 11, 21};
    int classes = 2;
    int attention_split = 256; // must equal filters[2] / 2
    double learning_rate = 1e-5;
    int epochs = 20;
    int batch_size = 16;
    std::uint64_t seed = 0;
    double dropout_rate = 0.2;
    bool use_instance_norm = true;
    bool use_max_pool = true;

    enum class Scale { paper, desk };
    Scale scale_preset = Scale::paper;

    static EncoderConfig paper_preset() { return {}; }

    static EncoderConfig desk_preset() {
        EncoderConfig c;
        c.filters = {16, 32, 64};
        c.attention_split = 32;
        c.scale_preset = Scale::desk;
        return c;
    }

    void validate() const {
        for (int f : filters) {
            if (f < 1) throw ArgumentError("filter counts must be positive");
        }
        for (int k : kernel_sizes) {
            if (k < 1 || k % 2 == 0) throw ArgumentError("kernel sizes must be odd and positive");
        }
        if (filters[2] % 2 != 0) throw ArgumentError("final filter count must be even");
        if (attention_split != filters[2] / 2) {
            throw ArgumentError("attention_split must equal half the final filter count");
        }
        if (classes < 2) throw ArgumentError("need at least 2 classes");
        if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
        if (epochs < 0) throw ArgumentError("epochs must be >= 0");
        if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
            throw ArgumentError("dropout rate must lie in [0, 1)");
        }
    }
};

// ============================================================================
// Parameters
// ============================================================================

/// Every trainable tensor of the network, in a fixed iteration order shared
/// by the optimizer state, checkpoints and the finite-difference harness.
struct ParamSet {
    struct Block {
        Eigen::MatrixXd conv_w;   // Cout x (Cin * k)
        Eigen::MatrixXd conv_b;   // Cout x 1
        Eigen::MatrixXd in_gamma; // Cout x 1
        Eigen::MatrixXd in_beta;  // Cout x 1
        Eigen::MatrixXd prelu_a;  // Cout x 1
    };
    std::array<Block, 3> blocks;
    Eigen::MatrixXd dense_w;   // classes x H
    Eigen::MatrixXd dense_b;   // classes x 1
    Eigen::MatrixXd out_gamma; // classes x 1
    Eigen::MatrixXd out_beta;  // classes x 1

    template <class F>
    void for_each(F&& f) {
        for (auto& b : blocks) {
            f(b.conv_w);
            f(b.conv_b);
            f(b.in_gamma);
            f(b.in_beta);
            f(b.prelu_a);
        }
        f(dense_w);
        f(dense_b);
        f(out_gamma);
        f(out_beta);
    }

    template <class F>
    void for_each(F&& f) const {
        const_cast<ParamSet*>(this)->for_each([&](Eigen::MatrixXd& m) {
            f(static_cast<const Eigen::MatrixXd&>(m));
        });
    }

    std::vector<Eigen::MatrixXd*> tensors() {
        std::vector<Eigen::MatrixXd*> out;
        for_each([&](Eigen::MatrixXd& m) { out.push_back(&m); });
        return out;
    }

    std::vector<const Eigen::MatrixXd*> tensors() const {
        std::vector<const Eigen::MatrixXd*> out;
        for_each([&](const Eigen::MatrixXd& m) { out.push_back(&m); });
        return out;
    }

    static std::vector<std::string> tensor_names() {
        std::vector<std::string> out;
        for (int i = 1; i <= 3; ++i) {
            const std::string n = std::to_string(i);
            out.push_back("conv" + n + "_w");
            out.push_back("conv" + n + "_b");
            out.push_back("in" + n + "_gamma");
            out.push_back("in" + n + "_beta");
            out.push_back("prelu" + n + "_alpha");
        }
        out.insert(out.end(), {"dense_w", "dense_b", "out_gamma", "out_beta"});
        return out;
    }

    ParamSet zeros_like() const {
        ParamSet out = *this;
        out.for_each([](Eigen::MatrixXd& m) { m.setZero(); });
        return out;
    }
};

struct EncoderModel {
    EncoderConfig config;
    ParamSet params;
    ParamSet adam_m;
    ParamSet adam_v;
    long adam_step = 0;
};

/// Closed-form trainable-parameter count for a configuration.
inline long parameter_count(const EncoderConfig& cfg) {
    long total = 0;
    int c_in = 1;
    for (int i = 0; i < 3; ++i) {
        const long c_out = cfg.filters[static_cast<std::size_t>(i)];
        const long k = cfg.kernel_sizes[static_cast<std::size_t>(i)];
        total += c_out * (c_in * k + 1); // conv weights + bias
        total += 3 * c_out;              // IN gamma/beta + PReLU alpha
        c_in = static_cast<int>(c_out);
    }
    const long h = cfg.attention_split;
    total += cfg.classes * (h + 1); // dense
    total += 2 * cfg.classes;       // output IN
    return total;
}

/// Builds a model with seeded uniform fan-in initialization.
inline EncoderModel init_model(const EncoderConfig& cfg) {
    cfg.validate();
    EncoderModel m;
    m.config = cfg;
    Rng rng(cfg.seed);
    auto fill_uniform = [&](Eigen::MatrixXd& t, int rows, int cols, double limit) {
        t.resize(rows, cols);
        for (Eigen::Index r = 0; r < t.rows(); ++r) {
            for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = rng.uniform(-limit, limit);
        }
    };
    int c_in = 1;
    for (int i = 0; i < 3; ++i) {
        auto& blk = m.params.blocks[static_cast<std::size_t>(i)];
        const int c_out = cfg.filters[static_cast<std::size_t>(i)];
        const int k = cfg.kernel_sizes[static_cast<std::size_t>(i)];
        const double limit = std::sqrt(1.0 / static_cast<double>(c_in * k));
        fill_uniform(blk.conv_w, c_out, c_in * k, limit);
        blk.conv_b = Eigen::MatrixXd::Zero(c_out, 1);
        blk.in_gamma = Eigen::MatrixXd::Ones(c_out, 1);
        blk.in_beta = Eigen::MatrixXd::Zero(c_out, 1);
        blk.prelu_a = Eigen::MatrixXd::Constant(c_out, 1, 0.25);
        c_in = c_out;
    }
    const int h = cfg.attention_split;
    fill_uniform(m.params.dense_w, cfg.classes, h, std::sqrt(1.0 / static_cast<double>(h)));
    m.params.dense_b = Eigen::MatrixXd::Zero(cfg.classes, 1);
    m.params.out_gamma = Eigen::MatrixXd::Ones(cfg.classes, 1);
    m.params.out_beta = Eigen::MatrixXd::Zero(cfg.classes, 1);

    m.adam_m = m.params.zeros_like();
    m.adam_v = m.params.zeros_like();
    m.adam_step = 0;
    return m;
}

// ============================================================================
// Forward pass
// ============================================================================

namespace detail {

inline constexpr double kInstanceNormEps = 1e-9;

/// Batch activation: row (b * channels + c) holds the time series of
/// channel c for sample b.
struct Act {
    int batch = 0;
    int channels = 0;
    int length = 0;
    Eigen::MatrixXd m;

    static Act zeros(int b, int c, int l) {
        Act a;
        a.batch = b;
        a.channels = c;
        a.length = l;
        a.m = Eigen::MatrixXd::Zero(b * c, l);
        return a;
    }
};

inline Eigen::MatrixXd im2col(const Act& x, int k) {
    const int pad = (k - 1) / 2;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.batch * x.length, x.channels * k);
    for (int b = 0; b < x.batch; ++b) {
        for (int c = 0; c < x.channels; ++c) {
            const Eigen::Index row = b * x.channels + c;
            for (int dk = 0; dk < k; ++dk) {
                const int off = dk - pad;
                const int t0 = std::max(0, -off);
                const int t1 = std::min(x.length, x.length - off);
                for (int t = t0; t < t1; ++t) {
                    p(b * x.length + t, c * k + dk) = x.m(row, t + off);
                }
            }
        }
    }
    return p;
}

struct BlockTrace {
    Eigen::MatrixXd patches;      // im2col of the block input
    Act norm_x;                   // (x - mu) / sqrt(var + eps), pre-affine
    std::vector<double> inv_std;  // per (b, c) row
    Act act_in;                   // PReLU input
    Act act_out;                  // PReLU output
    Eigen::MatrixXd dropout_mask; // empty when dropout is off
    std::vector<std::uint8_t> pool_argmax;
    int in_channels = 0;
    int in_length = 0;
};

struct ForwardTrace {
    std::array<BlockTrace, 3> blocks;
    Act features;              // final block output feeding the attention
    Eigen::MatrixXd attn_soft; // (B * H) x L, softmax over time
    Eigen::MatrixXd u;         // B x H pooled feature vectors
    Eigen::MatrixXd norm_z;    // B x C normalized logits, pre-affine
    std::vector<double> out_inv_std;
    Eigen::MatrixXd probs;     // B x C
};

inline void softmax_rows_inplace(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double mx = m.row(r).maxCoeff();
        m.row(r) = (m.row(r).array() - mx).exp();
        m.row(r) /= m.row(r).sum();
    }
}

} // namespace detail

/// Runs the network on a batch and returns per-sample class probabilities
/// (rows sum to 1). Passing a generator enables dropout with masks drawn
/// from it; passing a trace captures activations for the backward pass.
inline Eigen::MatrixXd forward(const EncoderModel& model, const std::vector<Signal>& batch,
                               Rng* dropout_rng = nullptr, detail::ForwardTrace* trace = nullptr) {
    const EncoderConfig& cfg = model.config;
    cfg.validate();
    if (batch.empty()) throw ArgumentError("forward needs a non-empty batch");
    const int max_kernel = *std::max_element(cfg.kernel_sizes.begin(), cfg.kernel_sizes.end());
    const std::size_t len = batch.front().size();
    if (len < static_cast<std::size_t>(max_kernel)) {
        throw ArgumentError("signals shorter than the largest convolution kernel");
    }
    for (const auto& s : batch) {
        if (s.size() != len) throw ArgumentError("batch signals have unequal lengths");
    }
    const int b_n = static_cast<int>(batch.size());

    detail::ForwardTrace local_trace;
    detail::ForwardTrace& tr = trace ? *trace : local_trace;

    detail::Act x = detail::Act::zeros(b_n, 1, static_cast<int>(len));
    for (int b = 0; b < b_n; ++b) {
        for (std::size_t t = 0; t < len; ++t) {
            x.m(b, static_cast<Eigen::Index>(t)) = batch[static_cast<std::size_t>(b)].samples[t];
        }
    }

    for (int blk_i = 0; blk_i < 3; ++blk_i) {
        const auto& blk = model.params.blocks[static_cast<std::size_t>(blk_i)];
        auto& bt = tr.blocks[static_cast<std::size_t>(blk_i)];
        const int c_out = cfg.filters[static_cast<std::size_t>(blk_i)];
        const int k = cfg.kernel_sizes[static_cast<std::size_t>(blk_i)];
        bt.in_channels = x.channels;
        bt.in_length = x.length;

        // Convolution, stride 1, zero-padded to preserve length.
        bt.patches = detail::im2col(x, k);
        Eigen::MatrixXd y_mat = bt.patches * blk.conv_w.transpose(); // (B*L) x Cout
        detail::Act conv = detail::Act::zeros(b_n, c_out, x.length);
        for (int b = 0; b < b_n; ++b) {
            conv.m.middleRows(static_cast<Eigen::Index>(b) * c_out, c_out) =
                y_mat.middleRows(static_cast<Eigen::Index>(b) * x.length, x.length).transpose();
        }
        conv.m.colwise() += Eigen::VectorXd(
            blk.conv_b.col(0).replicate(b_n, 1));

        // Instance normalization per sample per channel.
        bt.act_in = conv;
        if (cfg.use_instance_norm) {
            bt.norm_x = detail::Act::zeros(b_n, c_out, conv.length);
            bt.inv_std.assign(static_cast<std::size_t>(conv.m.rows()), 0.0);
            for (Eigen::Index r = 0; r < conv.m.rows(); ++r) {
                const int c = static_cast<int>(r % c_out);
                const double mu = conv.m.row(r).mean();
                const double var =
                    (conv.m.row(r).array() - mu).square().sum() / static_cast<double>(conv.length);
                const double inv_std = 1.0 / std::sqrt(var + detail::kInstanceNormEps);
                bt.inv_std[static_cast<std::size_t>(r)] = inv_std;
                bt.norm_x.m.row(r) = (conv.m.row(r).array() - mu) * inv_std;
                bt.act_in.m.row(r) =
                    bt.norm_x.m.row(r) * blk.in_gamma(c, 0) + Eigen::RowVectorXd::Constant(conv.length, blk.in_beta(c, 0));
            }
        }

        // PReLU with a per-channel slope.
        bt.act_out = bt.act_in;
        for (Eigen::Index r = 0; r < bt.act_out.m.rows(); ++r) {
            const int c = static_cast<int>(r % c_out);
            const double a = blk.prelu_a(c, 0);
            bt.act_out.m.row(r) =
                bt.act_in.m.row(r).array().max(0.0) + a * bt.act_in.m.row(r).array().min(0.0);
        }

        detail::Act stage = bt.act_out;
        if (dropout_rng && cfg.dropout_rate > 0.0) {
            const double keep = 1.0 - cfg.dropout_rate;
            bt.dropout_mask.resize(stage.m.rows(), stage.m.cols());
            for (Eigen::Index r = 0; r < stage.m.rows(); ++r) {
                for (Eigen::Index t = 0; t < stage.m.cols(); ++t) {
                    bt.dropout_mask(r, t) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
                }
            }
            stage.m.array() *= bt.dropout_mask.array();
        } else {
            bt.dropout_mask.resize(0, 0);
        }

        if (cfg.use_max_pool && stage.length >= 2) {
            const int lp = stage.length / 2;
            detail::Act pooled = detail::Act::zeros(b_n, c_out, lp);
            bt.pool_argmax.assign(static_cast<std::size_t>(stage.m.rows()) * static_cast<std::size_t>(lp), 0);
            for (Eigen::Index r = 0; r < stage.m.rows(); ++r) {
                for (int t = 0; t < lp; ++t) {
                    const double a = stage.m(r, 2 * t);
                    const double b = stage.m(r, 2 * t + 1);
                    const bool second = b > a;
                    pooled.m(r, t) = second ? b : a;
                    bt.pool_argmax[static_cast<std::size_t>(r) * static_cast<std::size_t>(lp) +
                                   static_cast<std::size_t>(t)] = second ? 1 : 0;
                }
            }
            x = std::move(pooled);
        } else {
            bt.pool_argmax.clear();
            x = std::move(stage);
        }
    }
    tr.features = x;

    // Channel-split attention: softmax over time on the second half weights
    // the first half; summing over time pools each channel to one feature.
    const int h = cfg.attention_split;
    const int c3 = cfg.filters[2];
    tr.attn_soft.resize(static_cast<Eigen::Index>(b_n) * h, x.length);
    tr.u.resize(b_n, h);
    for (int b = 0; b < b_n; ++b) {
        for (int c = 0; c < h; ++c) {
            const Eigen::Index row_a = static_cast<Eigen::Index>(b) * c3 + c;
            const Eigen::Index row_b = row_a + h;
            Eigen::RowVectorXd s = x.m.row(row_b);
            const double mx = s.maxCoeff();
            s = (s.array() - mx).exp();
            s /= s.sum();
            tr.attn_soft.row(static_cast<Eigen::Index>(b) * h + c) = s;
            tr.u(b, c) = x.m.row(row_a).dot(s);
        }
    }

    // Dense layer, instance normalization over the class axis, softmax.
    Eigen::MatrixXd z = tr.u * model.params.dense_w.transpose();
    z.rowwise() += model.params.dense_b.col(0).transpose();

    Eigen::MatrixXd z_in = z;
    if (cfg.use_instance_norm) {
        tr.norm_z.resize(b_n, cfg.classes);
        tr.out_inv_std.assign(static_cast<std::size_t>(b_n), 0.0);
        for (int b = 0; b < b_n; ++b) {
            const double mu = z.row(b).mean();
            const double var =
                (z.row(b).array() - mu).square().sum() / static_cast<double>(cfg.classes);
            const double inv_std = 1.0 / std::sqrt(var + detail::kInstanceNormEps);
            tr.out_inv_std[static_cast<std::size_t>(b)] = inv_std;
            tr.norm_z.row(b) = (z.row(b).array() - mu) * inv_std;
            z_in.row(b) = tr.norm_z.row(b).array() * model.params.out_gamma.col(0).transpose().array() +
                          model.params.out_beta.col(0).transpose().array();
        }
    }
    detail::softmax_rows_inplace(z_in);
    tr.probs = z_in;
    return z_in;
}

// ============================================================================
// Loss
// ============================================================================

inline Eigen::MatrixXd one_hot(const std::vector<StabilityLabel>& labels, int classes) {
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i), labels[i] == StabilityLabel::unstable ? 1 : 0) = 1.0;
    }
    return y;
}

/// Mean categorical cross entropy over the batch, with predicted
/// probabilities clamped to [1e-12, 1].
inline double cross_entropy(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& onehot) {
    if (probs.rows() != onehot.rows() || probs.cols() != onehot.cols()) {
        throw ArgumentError("probability and label shapes disagree");
    }
    double total = 0.0;
    for (Eigen::Index b = 0; b < probs.rows(); ++b) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            if (onehot(b, c) != 0.0) {
                total -= onehot(b, c) * std::log(std::clamp(probs(b, c), 1e-12, 1.0));
            }
        }
    }
    return total / static_cast<double>(probs.rows());
}

// ============================================================================
// Backward pass
// ============================================================================

/// Exact gradients of the mean cross entropy with respect to every
/// parameter. When `dropout_rng` is given the same masks drawn in the
/// internal forward pass are reused for the backward pass.
inline ParamSet backward(const EncoderModel& model, const std::vector<Signal>& batch,
                         const Eigen::MatrixXd& onehot, Rng* dropout_rng = nullptr,
                         double* loss_out = nullptr, Eigen::MatrixXd* probs_out = nullptr) {
    const EncoderConfig& cfg = model.config;
    detail::ForwardTrace tr;
    Eigen::MatrixXd probs = forward(model, batch, dropout_rng, &tr);
    if (probs.rows() != onehot.rows() || probs.cols() != onehot.cols()) {
        throw ArgumentError("probability and label shapes disagree");
    }
    if (loss_out) *loss_out = cross_entropy(probs, onehot);
    if (probs_out) *probs_out = probs;

    const int b_n = static_cast<int>(probs.rows());
    const int h = cfg.attention_split;
    const int c3 = cfg.filters[2];
    ParamSet grads = model.params.zeros_like();

    // Softmax + cross entropy.
    Eigen::MatrixXd dz = (probs - onehot) / static_cast<double>(b_n); // B x C

    // Output instance normalization.
    if (cfg.use_instance_norm) {
        Eigen::MatrixXd dz_raw(b_n, cfg.classes);
        for (int b = 0; b < b_n; ++b) {
            grads.out_gamma.col(0) +=
                (dz.row(b).array() * tr.norm_z.row(b).array()).matrix().transpose();
            grads.out_beta.col(0) += dz.row(b).transpose();
            Eigen::RowVectorXd dxhat =
                dz.row(b).array() * model.params.out_gamma.col(0).transpose().array();
            const double mean_dxhat = dxhat.mean();
            const double mean_dxhat_xhat = (dxhat.array() * tr.norm_z.row(b).array()).mean();
            dz_raw.row(b) = tr.out_inv_std[static_cast<std::size_t>(b)] *
                            (dxhat.array() - mean_dxhat -
                             tr.norm_z.row(b).array() * mean_dxhat_xhat);
        }
        dz = std::move(dz_raw);
    }

    // Dense layer.
    grads.dense_w = dz.transpose() * tr.u;
    grads.dense_b.col(0) = dz.colwise().sum().transpose();
    Eigen::MatrixXd du = dz * model.params.dense_w; // B x H

    // Attention.
    detail::Act dfeat = detail::Act::zeros(b_n, c3, tr.features.length);
    for (int b = 0; b < b_n; ++b) {
        for (int c = 0; c < h; ++c) {
            const Eigen::Index row_a = static_cast<Eigen::Index>(b) * c3 + c;
            const Eigen::Index row_b = row_a + h;
            const Eigen::RowVectorXd s = tr.attn_soft.row(static_cast<Eigen::Index>(b) * h + c);
            const double g = du(b, c);
            dfeat.m.row(row_a) = g * s;
            Eigen::RowVectorXd ds = g * tr.features.m.row(row_a);
            const double dot = (ds.array() * s.array()).sum();
            dfeat.m.row(row_b) = (s.array() * (ds.array() - dot)).matrix();
        }
    }

    // Blocks in reverse.
    detail::Act dx = std::move(dfeat);
    for (int blk_i = 2; blk_i >= 0; --blk_i) {
        const auto& blk = model.params.blocks[static_cast<std::size_t>(blk_i)];
        auto& gblk = grads.blocks[static_cast<std::size_t>(blk_i)];
        const auto& bt = tr.blocks[static_cast<std::size_t>(blk_i)];
        const int c_out = cfg.filters[static_cast<std::size_t>(blk_i)];
        const int k = cfg.kernel_sizes[static_cast<std::size_t>(blk_i)];

        // Un-pool: route each gradient to the argmax position.
        detail::Act dstage;
        if (!bt.pool_argmax.empty()) {
            dstage = detail::Act::zeros(b_n, c_out, bt.act_out.length);
            const int lp = dx.length;
            for (Eigen::Index r = 0; r < dstage.m.rows(); ++r) {
                for (int t = 0; t < lp; ++t) {
                    const int off = bt.pool_argmax[static_cast<std::size_t>(r) * static_cast<std::size_t>(lp) +
                                                   static_cast<std::size_t>(t)];
                    dstage.m(r, 2 * t + off) = dx.m(r, t);
                }
            }
        } else {
            dstage = std::move(dx);
        }

        if (bt.dropout_mask.size() > 0) {
            dstage.m.array() *= bt.dropout_mask.array();
        }

        // PReLU.
        detail::Act dact = dstage;
        for (Eigen::Index r = 0; r < dact.m.rows(); ++r) {
            const int c = static_cast<int>(r % c_out);
            const double a = blk.prelu_a(c, 0);
            double da = 0.0;
            for (Eigen::Index t = 0; t < dact.m.cols(); ++t) {
                const double xin = bt.act_in.m(r, t);
                if (xin <= 0.0) {
                    da += dstage.m(r, t) * xin;
                    dact.m(r, t) = dstage.m(r, t) * a;
                }
            }
            gblk.prelu_a(c, 0) += da;
        }

        // Instance normalization.
        detail::Act dconv = dact;
        if (cfg.use_instance_norm) {
            for (Eigen::Index r = 0; r < dact.m.rows(); ++r) {
                const int c = static_cast<int>(r % c_out);
                gblk.in_gamma(c, 0) += (dact.m.row(r).array() * bt.norm_x.m.row(r).array()).sum();
                gblk.in_beta(c, 0) += dact.m.row(r).sum();
                Eigen::RowVectorXd dxhat = dact.m.row(r) * blk.in_gamma(c, 0);
                const double mean_dxhat = dxhat.mean();
                const double mean_dxhat_xhat =
                    (dxhat.array() * bt.norm_x.m.row(r).array()).mean();
                dconv.m.row(r) = bt.inv_std[static_cast<std::size_t>(r)] *
                                 (dxhat.array() - mean_dxhat -
                                  bt.norm_x.m.row(r).array() * mean_dxhat_xhat);
            }
        }

        // Convolution.
        const int l = bt.in_length;
        Eigen::MatrixXd dy_mat(static_cast<Eigen::Index>(b_n) * l, c_out);
        for (int b = 0; b < b_n; ++b) {
            dy_mat.middleRows(static_cast<Eigen::Index>(b) * l, l) =
                dconv.m.middleRows(static_cast<Eigen::Index>(b) * c_out, c_out).transpose();
        }
        gblk.conv_w += dy_mat.transpose() * bt.patches;
        gblk.conv_b.col(0) += dy_mat.colwise().sum().transpose();

        if (blk_i > 0) {
            Eigen::MatrixXd dpatches = dy_mat * blk.conv_w; // (B*L) x (Cin*k)
            const int c_in = bt.in_channels;
            const int pad = (k - 1) / 2;
            dx = detail::Act::zeros(b_n, c_in, l);
            for (int b = 0; b < b_n; ++b) {
                for (int c = 0; c < c_in; ++c) {
                    const Eigen::Index row = static_cast<Eigen::Index>(b) * c_in + c;
                    for (int dk = 0; dk < k; ++dk) {
                        const int off = dk - pad;
                        const int t0 = std::max(0, -off);
                        const int t1 = std::min(l, l - off);
                        for (int t = t0; t < t1; ++t) {
                            dx.m(row, t + off) += dpatches(static_cast<Eigen::Index>(b) * l + t, c * k + dk);
                        }
                    }
                }
            }
        }
    }
    return grads;
}

// ============================================================================
// Optimizer
// ============================================================================

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One Adam update over every parameter tensor.
inline void adam_step(EncoderModel& model, const ParamSet& grads, double lr) {
    grads.for_each([](const Eigen::MatrixXd& g) {
        if (!g.allFinite()) throw TrainingError("non-finite gradient in Adam step");
    });
    model.adam_step += 1;
    const double t = static_cast<double>(model.adam_step);
    const double corr1 = 1.0 - std::pow(kAdamBeta1, t);
    const double corr2 = 1.0 - std::pow(kAdamBeta2, t);

    auto params = model.params.tensors();
    auto ms = model.adam_m.tensors();
    auto vs = model.adam_v.tensors();
    auto gs = grads.tensors();
    for (std::size_t i = 0; i < params.size(); ++i) {
        Eigen::MatrixXd& p = *params[i];
        Eigen::MatrixXd& m = *ms[i];
        Eigen::MatrixXd& v = *vs[i];
        const Eigen::MatrixXd& g = *gs[i];
        m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
        v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
        p.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + kAdamEps);
    }
}

// ============================================================================
// Training and inference
// ============================================================================

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_accuracy; // on-the-fly accuracy of the training passes
    double final_accuracy = 0.0;        // clean pass over the training set
    std::uint64_t params_checksum = 0;
};

namespace detail {

inline std::uint64_t fnv1a_bytes(const unsigned char* data, std::size_t n, std::uint64_t hash) {
    for (std::size_t i = 0; i < n; ++i) {
        hash ^= data[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::uint64_t checksum(const ParamSet& p) {
    std::uint64_t hash = 14695981039346656037ULL;
    p.for_each([&](const Eigen::MatrixXd& m) {
        hash = fnv1a_bytes(reinterpret_cast<const unsigned char*>(m.data()),
                           static_cast<std::size_t>(m.size()) * sizeof(double), hash);
    });
    return hash;
}

} // namespace detail

/// Classifies one signal: stable iff the unstable-class probability is
/// below delta (class index 1 is the unstable class).
inline StabilityLabel classify(const EncoderModel& model, const Signal& s, double delta = 0.5) {
    Eigen::MatrixXd probs = forward(model, {s});
    return probs(0, 1) < delta ? StabilityLabel::stable : StabilityLabel::unstable;
}

/// Mini-batch training with seeded shuffling and dropout. Deterministic for
/// a fixed seed.
inline TrainReport train(EncoderModel& model, const LabeledDataset& d, const EncoderConfig& cfg) {
    cfg.validate();
    d.validate();
    if (d.empty()) throw TrainingError("cannot train on an empty dataset");
    if (d.count(StabilityLabel::stable) == 0 || d.count(StabilityLabel::unstable) == 0) {
        throw TrainingError("training data must contain both classes");
    }

    TrainReport report;
    if (cfg.epochs == 0) {
        report.params_checksum = detail::checksum(model.params);
        return report;
    }

    Rng rng(cfg.seed);
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<Signal> batch;
            std::vector<StabilityLabel> labels;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(d.samples[order[i]].signal);
                labels.push_back(d.samples[order[i]].label);
            }
            const Eigen::MatrixXd onehot = one_hot(labels, cfg.classes);
            double batch_loss = 0.0;
            Eigen::MatrixXd probs;
            ParamSet grads = backward(model, batch, onehot, &rng, &batch_loss, &probs);
            adam_step(model, grads, cfg.learning_rate);

            loss_sum += batch_loss * static_cast<double>(end - start);
            for (Eigen::Index b = 0; b < probs.rows(); ++b) {
                const StabilityLabel pred =
                    probs(b, 1) < 0.5 ? StabilityLabel::stable : StabilityLabel::unstable;
                correct += pred == labels[static_cast<std::size_t>(b)] ? 1 : 0;
            }
        }
        report.epoch_loss.push_back(loss_sum / static_cast<double>(n));
        report.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
    }

    std::size_t correct = 0;
    for (const auto& s : d.samples) {
        correct += classify(model, s.signal) == s.label ? 1 : 0;
    }
    report.final_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    report.params_checksum = detail::checksum(model.params);
    return report;
}

} // namespace vmdaug
