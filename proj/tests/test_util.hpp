#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "vmdaug/rng.hpp"
#include "vmdaug/signal.hpp"

namespace testutil {

/// Fresh scratch directory under the system temp root; removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("vmdaug-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline vmdaug::Signal make_signal(std::vector<double> values, double fs = 60.0) {
    vmdaug::Signal s;
    s.samples = std::move(values);
    s.fs = fs;
    return s;
}

/// Random smooth-ish test signal: a few tones plus noise.
inline vmdaug::Signal random_signal(std::uint64_t seed, std::size_t n = 400, double fs = 60.0) {
    vmdaug::Rng rng(seed);
    const double f1 = rng.uniform(0.2, 2.0);
    const double f2 = rng.uniform(2.5, 8.0);
    const double a1 = rng.uniform(0.5, 2.0);
    const double a2 = rng.uniform(0.1, 1.0);
    const double p1 = rng.uniform(0.0, 6.28);
    const double p2 = rng.uniform(0.0, 6.28);
    const double noise = rng.uniform(0.0, 0.05);
    vmdaug::Signal s;
    s.fs = fs;
    s.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        s.samples[i] = a1 * std::cos(2 * std::numbers::pi * f1 * t + p1) +
                       a2 * std::cos(2 * std::numbers::pi * f2 * t + p2) + noise * rng.normal();
    }
    return s;
}

inline double rel_l2_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::sqrt(den);
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

} // namespace testutil
