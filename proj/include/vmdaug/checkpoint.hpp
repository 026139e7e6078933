#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "vmdaug/config_json.hpp"
#include "vmdaug/encoder.hpp"
#include "vmdaug/errors.hpp"

namespace vmdaug {

inline constexpr const char* kCheckpointFormat = "vmdaug-encoder-v1";

namespace detail {

inline nlohmann::json tensors_to_json(const ParamSet& p) {
    nlohmann::json out = nlohmann::json::object();
    const auto names = ParamSet::tensor_names();
    auto tensors = p.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const Eigen::MatrixXd& m = *tensors[i];
        std::vector<double> data;
        data.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
        }
        out[names[i]] = {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
    }
    return out;
}

inline void tensors_from_json(const nlohmann::json& j, ParamSet& p, const std::string& where) {
    const auto names = ParamSet::tensor_names();
    require_keys(j, names, where);
    auto tensors = p.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        if (!j.contains(names[i])) throw FormatError(where + ": missing tensor '" + names[i] + "'");
        const auto& tj = j.at(names[i]);
        require_keys(tj, {"rows", "cols", "data"}, where + "." + names[i]);
        const auto rows = tj.at("rows").get<Eigen::Index>();
        const auto cols = tj.at("cols").get<Eigen::Index>();
        Eigen::MatrixXd& m = *tensors[i];
        if (rows != m.rows() || cols != m.cols()) {
            throw FormatError(where + ": tensor '" + names[i] + "' shape does not match the config");
        }
        const auto data = tj.at("data").get<std::vector<double>>();
        if (data.size() != static_cast<std::size_t>(m.size())) {
            throw FormatError(where + ": tensor '" + names[i] + "' has the wrong element count");
        }
        std::size_t idx = 0;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[idx++];
        }
    }
}

} // namespace detail

/// Writes the full model (config, parameters, optimizer state) as JSON.
/// Tensor data is stored row-major.
inline void save_model(const EncoderModel& model, const std::string& path) {
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["config"] = to_json(model.config);
    j["adam_step"] = model.adam_step;
    j["params"] = detail::tensors_to_json(model.params);
    j["adam_m"] = detail::tensors_to_json(model.adam_m);
    j["adam_v"] = detail::tensors_to_json(model.adam_v);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open checkpoint for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw FormatError("failed writing checkpoint: " + path);
}

inline EncoderModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": invalid JSON: " + e.what());
    }
    detail::require_keys(j, {"format", "config", "adam_step", "params", "adam_m", "adam_v"},
                         "checkpoint");
    if (!j.contains("format") || j.at("format").get<std::string>() != kCheckpointFormat) {
        throw FormatError(path + ": not a recognized model checkpoint");
    }
    const EncoderConfig cfg = encoder_config_from_json(j.at("config"));
    EncoderModel model = init_model(cfg); // allocates the right shapes
    model.adam_step = j.at("adam_step").get<long>();
    detail::tensors_from_json(j.at("params"), model.params, "checkpoint.params");
    detail::tensors_from_json(j.at("adam_m"), model.adam_m, "checkpoint.adam_m");
    detail::tensors_from_json(j.at("adam_v"), model.adam_v, "checkpoint.adam_v");
    return model;
}

} // namespace vmdaug
