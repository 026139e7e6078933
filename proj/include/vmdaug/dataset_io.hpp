#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vmdaug/errors.hpp"
#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"

namespace vmdaug {

enum class FileFormat { csv, json };

// ============================================================================
// Number formatting / parsing (locale-free, round-trip exact)
// ============================================================================

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

/// Parses a decimal token. Accepts nan/inf spellings so that non-finite rows
/// can be distinguished from malformed rows.
inline std::optional<double> parse_double(std::string_view tok) {
    tok = trim(tok);
    if (tok.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec == std::errc() && res.ptr == tok.data() + tok.size()) return v;
    std::string lower(tok);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string_view body = lower;
    double sign = 1.0;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
        sign = body.front() == '-' ? -1.0 : 1.0;
        body.remove_prefix(1);
    }
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (body == "inf" || body == "infinity") return sign * std::numeric_limits<double>::infinity();
    return std::nullopt;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        lines.push_back(line);
    }
    return lines;
}

inline bool is_label_token(std::string_view tok) {
    tok = trim(tok);
    return tok == "stable" || tok == "unstable";
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FormatError("failed writing file: " + path);
}

inline double checked_value(std::optional<double> v, const std::string& path, std::size_t line_no) {
    if (!v) {
        throw FormatError(path + ": line " + std::to_string(line_no) + " has a non-numeric value");
    }
    if (!std::isfinite(*v)) {
        throw DataError(path + ": line " + std::to_string(line_no) + " contains a non-finite value");
    }
    return *v;
}

} // namespace detail

// ============================================================================
// CSV / JSON datasets
// ============================================================================

/// Loads a labeled dataset. CSV layout: one sample per row, comma-separated
/// values, final column the label token; an optional header row is detected
/// and skipped. CSV files carry no sampling rate, so `fs` supplies it.
inline LabeledDataset load_dataset(const std::string& path, FileFormat format, double fs = 60.0) {
    LabeledDataset d;
    if (format == FileFormat::csv) {
        auto lines = detail::read_lines(path);
        if (lines.empty()) throw FormatError(path + ": file is empty");

        std::size_t first = 0;
        {
            auto toks = detail::split_csv_line(lines[0]);
            bool data_row = toks.size() >= 2 && detail::is_label_token(toks.back());
            for (std::size_t i = 0; data_row && i + 1 < toks.size(); ++i) {
                data_row = detail::parse_double(toks[i]).has_value();
            }
            if (!data_row) first = 1; // header row
        }
        if (first >= lines.size()) throw FormatError(path + ": no data rows");

        std::size_t width = 0;
        for (std::size_t li = first; li < lines.size(); ++li) {
            auto toks = detail::split_csv_line(lines[li]);
            if (toks.size() < 2) throw FormatError(path + ": row has no value columns");
            if (width == 0) width = toks.size();
            if (toks.size() != width) throw FormatError(path + ": ragged row at line " + std::to_string(li + 1));
            LabeledSample s;
            s.signal.fs = fs;
            s.signal.samples.reserve(toks.size() - 1);
            for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
                s.signal.samples.push_back(detail::checked_value(detail::parse_double(toks[i]), path, li + 1));
            }
            s.label = parse_label(detail::trim(toks.back()));
            d.samples.push_back(std::move(s));
        }
    } else {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw FormatError("cannot open file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(path + ": invalid JSON: " + e.what());
        }
        if (!j.is_object() || !j.contains("fs") || !j.contains("samples")) {
            throw FormatError(path + ": expected object with 'fs' and 'samples'");
        }
        const double rate = j.at("fs").get<double>();
        for (const auto& js : j.at("samples")) {
            if (!js.contains("label") || !js.contains("values")) {
                throw FormatError(path + ": sample missing 'label' or 'values'");
            }
            LabeledSample s;
            s.signal.fs = rate;
            s.label = parse_label(js.at("label").get<std::string>());
            for (const auto& v : js.at("values")) {
                double x = v.get<double>();
                if (!std::isfinite(x)) throw DataError(path + ": non-finite value in JSON sample");
                s.signal.samples.push_back(x);
            }
            d.samples.push_back(std::move(s));
        }
        if (d.empty()) throw FormatError(path + ": no samples");
    }
    d.validate();
    return d;
}

inline void save_dataset(const LabeledDataset& d, const std::string& path, FileFormat format) {
    if (format == FileFormat::csv) {
        std::string out;
        for (const auto& s : d.samples) {
            for (double v : s.signal.samples) {
                detail::append_double(out, v);
                out.push_back(',');
            }
            out += to_string(s.label);
            out.push_back('\n');
        }
        detail::write_file(path, out);
    } else {
        nlohmann::json j;
        j["fs"] = d.fs();
        j["samples"] = nlohmann::json::array();
        for (const auto& s : d.samples) {
            j["samples"].push_back({{"label", to_string(s.label)}, {"values", s.signal.samples}});
        }
        detail::write_file(path, j.dump(2) + "\n");
    }
}

/// Loads an all-numeric CSV: one signal per row, optional header row.
inline std::vector<Signal> load_signals(const std::string& path, double fs = 60.0) {
    auto lines = detail::read_lines(path);
    if (lines.empty()) throw FormatError(path + ": file is empty");

    std::size_t first = 0;
    {
        auto toks = detail::split_csv_line(lines[0]);
        bool data_row = true;
        for (const auto& t : toks) data_row = data_row && detail::parse_double(t).has_value();
        if (!data_row) first = 1;
    }
    if (first >= lines.size()) throw FormatError(path + ": no data rows");

    std::vector<Signal> out;
    std::size_t width = 0;
    for (std::size_t li = first; li < lines.size(); ++li) {
        auto toks = detail::split_csv_line(lines[li]);
        if (width == 0) width = toks.size();
        if (toks.size() != width) throw FormatError(path + ": ragged row at line " + std::to_string(li + 1));
        Signal s;
        s.fs = fs;
        s.samples.reserve(toks.size());
        for (const auto& t : toks) {
            s.samples.push_back(detail::checked_value(detail::parse_double(t), path, li + 1));
        }
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

inline void save_signals(const std::vector<Signal>& signals, const std::string& path) {
    std::string out;
    for (const auto& s : signals) {
        for (std::size_t i = 0; i < s.samples.size(); ++i) {
            if (i) out.push_back(',');
            detail::append_double(out, s.samples[i]);
        }
        out.push_back('\n');
    }
    detail::write_file(path, out);
}

/// Loads a bus-by-time angle matrix from an all-numeric CSV (rows = buses).
inline AngleMatrix load_angle_matrix(const std::string& path, double fs = 60.0) {
    auto rows = load_signals(path, fs);
    AngleMatrix m;
    m.buses = rows.size();
    m.steps = rows.front().size();
    m.fs = fs;
    m.values.reserve(m.buses * m.steps);
    for (const auto& r : rows) {
        m.values.insert(m.values.end(), r.samples.begin(), r.samples.end());
    }
    m.validate();
    return m;
}

// ============================================================================
// Splitting
// ============================================================================

namespace detail {

inline std::size_t floor_count(std::size_t n, double fraction) {
    const double p = static_cast<double>(n) * fraction;
    return static_cast<std::size_t>(std::floor(p + 1e-9 + p * 1e-12));
}

/// Picks `count` indices from the dataset, stratified by label with
/// largest-remainder apportionment. Returned indices are sorted.
inline std::vector<std::size_t> stratified_pick(const LabeledDataset& d, std::size_t count, Rng& rng) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < d.size(); ++i) {
        by_class[d.samples[i].label == StabilityLabel::unstable ? 1 : 0].push_back(i);
    }
    const double fraction = static_cast<double>(count) / static_cast<double>(d.size());
    std::array<std::size_t, 2> want{};
    std::array<double, 2> rem{};
    std::size_t total = 0;
    for (int c = 0; c < 2; ++c) {
        const double exact = static_cast<double>(by_class[c].size()) * fraction;
        want[c] = floor_count(by_class[c].size(), fraction);
        rem[c] = exact - static_cast<double>(want[c]);
        total += want[c];
    }
    while (total < count) {
        int pick = (rem[0] >= rem[1] && want[0] < by_class[0].size()) || want[1] >= by_class[1].size() ? 0 : 1;
        ++want[pick];
        rem[pick] -= 1.0;
        ++total;
    }
    while (total > count) {
        int pick = (rem[0] <= rem[1] && want[0] > 0) || want[1] == 0 ? 0 : 1;
        --want[pick];
        rem[pick] += 1.0;
        --total;
    }
    std::vector<std::size_t> chosen;
    chosen.reserve(count);
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        rng.shuffle(idx);
        chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(want[c]));
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

} // namespace detail

inline LabeledDataset subset(const LabeledDataset& d, const std::vector<std::size_t>& indices) {
    LabeledDataset out;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(d.samples[i]);
    return out;
}

/// Stratified subset of `count` samples, deterministic per seed.
inline LabeledDataset stratified_subset(const LabeledDataset& d, std::size_t count, std::uint64_t seed) {
    if (count > d.size()) throw ArgumentError("subset size exceeds dataset size");
    Rng rng(seed);
    return subset(d, detail::stratified_pick(d, count, rng));
}

/// Disjoint stratified train/test partition. Train receives floor(n * f)
/// samples, apportioned across classes by largest remainder; deterministic
/// for a fixed seed. Sample order within each part follows the input order.
inline std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& d,
                                                               double train_fraction,
                                                               std::uint64_t seed) {
    if (d.empty()) throw ArgumentError("cannot split an empty dataset");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("train fraction must lie strictly inside (0, 1)");
    }
    const std::size_t target = detail::floor_count(d.size(), train_fraction);
    Rng rng(seed);
    auto train_idx = detail::stratified_pick(d, target, rng);

    std::vector<char> in_train(d.size(), 0);
    for (std::size_t i : train_idx) in_train[i] = 1;
    LabeledDataset train, test;
    for (std::size_t i = 0; i < d.size(); ++i) {
        (in_train[i] ? train : test).samples.push_back(d.samples[i]);
    }
    return {std::move(train), std::move(test)};
}

} // namespace vmdaug
