#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "vmdaug/encoder.hpp"
#include "vmdaug/errors.hpp"
#include "vmdaug/mmd.hpp"
#include "vmdaug/prony.hpp"
#include "vmdaug/synth.hpp"
#include "vmdaug/vmd.hpp"

namespace vmdaug {

// ============================================================================
// Strict JSON helpers: unknown keys are rejected everywhere.
// ============================================================================

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                         const std::string& where) {
    if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& a : allowed) known = known || key == a;
        if (!known) throw FormatError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace detail

// ============================================================================
// Per-module adapters
// ============================================================================

inline nlohmann::json to_json(const VmdConfig& c) {
    return {{"k_modes", c.k_modes},
            {"bandwidth_penalty", c.bandwidth_penalty},
            {"dual_ascent_step", c.dual_ascent_step},
            {"tolerance", c.tolerance},
            {"max_iterations", c.max_iterations},
            {"init_scheme", c.init_scheme == VmdConfig::Init::zero ? "zero" : "uniform-spread"}};
}

inline VmdConfig vmd_config_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"k_modes", "bandwidth_penalty", "dual_ascent_step", "tolerance",
                             "max_iterations", "init_scheme"},
                         "vmd config");
    VmdConfig c;
    detail::maybe_get(j, "k_modes", c.k_modes);
    detail::maybe_get(j, "bandwidth_penalty", c.bandwidth_penalty);
    detail::maybe_get(j, "dual_ascent_step", c.dual_ascent_step);
    detail::maybe_get(j, "tolerance", c.tolerance);
    detail::maybe_get(j, "max_iterations", c.max_iterations);
    if (j.contains("init_scheme")) {
        const std::string s = j.at("init_scheme").get<std::string>();
        if (s == "zero") c.init_scheme = VmdConfig::Init::zero;
        else if (s == "uniform-spread") c.init_scheme = VmdConfig::Init::uniform_spread;
        else throw FormatError("vmd config: unknown init scheme '" + s + "'");
    }
    return c;
}

inline nlohmann::json to_json(const LabelConfig& c) {
    return {{"target_frequency", c.target_frequency},
            {"damping_ratio_threshold", c.damping_ratio_threshold},
            {"prony_order", c.prony_order}};
}

inline LabelConfig label_config_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"target_frequency", "damping_ratio_threshold", "prony_order"},
                         "label config");
    LabelConfig c;
    detail::maybe_get(j, "target_frequency", c.target_frequency);
    detail::maybe_get(j, "damping_ratio_threshold", c.damping_ratio_threshold);
    detail::maybe_get(j, "prony_order", c.prony_order);
    return c;
}

inline nlohmann::json to_json(const KernelConfig& c) {
    nlohmann::json j{{"kernel_bound", c.kernel_bound}};
    if (c.bandwidth_sigma) j["bandwidth_sigma"] = *c.bandwidth_sigma;
    else j["bandwidth_sigma"] = "median-heuristic";
    return j;
}

inline KernelConfig kernel_config_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"bandwidth_sigma", "kernel_bound"}, "kernel config");
    KernelConfig c;
    detail::maybe_get(j, "kernel_bound", c.kernel_bound);
    if (j.contains("bandwidth_sigma")) {
        const auto& v = j.at("bandwidth_sigma");
        if (v.is_string()) {
            if (v.get<std::string>() != "median-heuristic") {
                throw FormatError("kernel config: bandwidth must be a number or 'median-heuristic'");
            }
            c.bandwidth_sigma.reset();
        } else {
            c.bandwidth_sigma = v.get<double>();
        }
    }
    return c;
}

inline nlohmann::json to_json(const EncoderConfig& c) {
    return {{"filters", {c.filters[0], c.filters[1], c.filters[2]}},
            {"kernel_sizes", {c.kernel_sizes[0], c.kernel_sizes[1], c.kernel_sizes[2]}},
            {"classes", c.classes},
            {"attention_split", c.attention_split},
            {"learning_rate", c.learning_rate},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed},
            {"dropout_rate", c.dropout_rate},
            {"use_instance_norm", c.use_instance_norm},
            {"use_max_pool", c.use_max_pool},
            {"scale_preset", c.scale_preset == EncoderConfig::Scale::desk ? "desk" : "paper"}};
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    detail::require_keys(j,
                         {"filters", "kernel_sizes", "classes", "attention_split", "learning_rate",
                          "epochs", "batch_size", "seed", "dropout_rate", "use_instance_norm",
                          "use_max_pool", "scale_preset"},
                         "encoder config");
    EncoderConfig c;
    if (j.contains("scale_preset")) {
        const std::string s = j.at("scale_preset").get<std::string>();
        if (s == "desk") c = EncoderConfig::desk_preset();
        else if (s == "paper") c = EncoderConfig::paper_preset();
        else throw FormatError("encoder config: unknown scale preset '" + s + "'");
    }
    if (j.contains("filters")) {
        auto f = j.at("filters").get<std::vector<int>>();
        if (f.size() != 3) throw FormatError("encoder config: filters must have 3 entries");
        c.filters = {f[0], f[1], f[2]};
        c.attention_split = c.filters[2] / 2;
    }
    if (j.contains("kernel_sizes")) {
        auto k = j.at("kernel_sizes").get<std::vector<int>>();
        if (k.size() != 3) throw FormatError("encoder config: kernel_sizes must have 3 entries");
        c.kernel_sizes = {k[0], k[1], k[2]};
    }
    detail::maybe_get(j, "classes", c.classes);
    detail::maybe_get(j, "attention_split", c.attention_split);
    detail::maybe_get(j, "learning_rate", c.learning_rate);
    detail::maybe_get(j, "epochs", c.epochs);
    detail::maybe_get(j, "batch_size", c.batch_size);
    detail::maybe_get(j, "seed", c.seed);
    detail::maybe_get(j, "dropout_rate", c.dropout_rate);
    detail::maybe_get(j, "use_instance_norm", c.use_instance_norm);
    detail::maybe_get(j, "use_max_pool", c.use_max_pool);
    return c;
}

inline nlohmann::json to_json(const GenOptions& o) {
    return {{"length", o.length},
            {"fs", o.fs},
            {"noise_scale", o.noise_scale},
            {"with_trend", o.with_trend}};
}

inline GenOptions gen_options_from_json(const nlohmann::json& j) {
    detail::require_keys(j, {"length", "fs", "noise_scale", "with_trend"}, "gen options");
    GenOptions o;
    detail::maybe_get(j, "length", o.length);
    detail::maybe_get(j, "fs", o.fs);
    detail::maybe_get(j, "noise_scale", o.noise_scale);
    detail::maybe_get(j, "with_trend", o.with_trend);
    return o;
}

inline nlohmann::json to_json(const RingdownSpec& s) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : s.modes) {
        modes.push_back({{"frequency", m.frequency},
                         {"zeta", m.zeta},
                         {"amplitude", m.amplitude},
                         {"phase", m.phase}});
    }
    return {{"modes", modes},
            {"trend_slope", s.trend_slope},
            {"noise_sigma", s.noise_sigma},
            {"length", s.length},
            {"fs", s.fs},
            {"seed", s.seed}};
}

inline nlohmann::json to_json(const MmdReport& r) {
    return {{"mmd_biased", r.mmd_biased},
            {"mmd_unbiased_sq", r.mmd_unbiased_sq},
            {"rademacher_threshold", r.rademacher_threshold},
            {"asymptotic_threshold", r.asymptotic_threshold},
            {"alpha", r.alpha},
            {"m", r.m},
            {"sigma_used", r.sigma_used},
            {"verdict_rademacher", to_string(r.verdict_rademacher)},
            {"verdict_asymptotic", to_string(r.verdict_asymptotic)}};
}

} // namespace vmdaug
