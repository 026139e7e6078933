#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "vmdaug/preprocess.hpp"
#include "vmdaug/rng.hpp"

#include "test_util.hpp"

using namespace vmdaug;
using testutil::make_signal;

namespace {

AngleMatrix make_matrix(std::vector<std::vector<double>> rows, double fs = 60.0) {
    AngleMatrix m;
    m.buses = rows.size();
    m.steps = rows.front().size();
    m.fs = fs;
    for (const auto& r : rows) m.values.insert(m.values.end(), r.begin(), r.end());
    return m;
}

/// Independent least-squares line fit via the normal equations.
std::pair<double, double> fit_line(const std::vector<double>& y) {
    const auto n = static_cast<double>(y.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = static_cast<double>(i);
        st += t;
        sy += y[i];
        stt += t * t;
        sty += t * y[i];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    const double intercept = (sy - slope * st) / n;
    return {intercept, slope};
}

double wrap_to_pi(double x) {
    return std::remainder(x, 2.0 * std::numbers::pi);
}

} // namespace

TEST_CASE("subtract_center_of_angle removes the weighted column mean") {
    SECTION("uniform weights") {
        const auto m = make_matrix({{1, 3}, {3, 5}});
        const auto out = subtract_center_of_angle(m, CoaWeights::uniform(2));
        REQUIRE(out.at(0, 0) == Catch::Approx(-1.0));
        REQUIRE(out.at(0, 1) == Catch::Approx(-1.0));
        REQUIRE(out.at(1, 0) == Catch::Approx(1.0));
        REQUIRE(out.at(1, 1) == Catch::Approx(1.0));
    }
    SECTION("single bus goes to zero") {
        const auto out = subtract_center_of_angle(make_matrix({{2, 4, 8}}), CoaWeights::uniform(1));
        for (std::size_t t = 0; t < 3; ++t) REQUIRE(out.at(0, t) == 0.0);
    }
    SECTION("non-uniform weights") {
        CoaWeights w;
        w.weights = {0.75, 0.25};
        const auto out = subtract_center_of_angle(make_matrix({{4, 4}, {0, 0}}), w);
        REQUIRE(out.at(0, 0) == Catch::Approx(1.0));
        REQUIRE(out.at(1, 0) == Catch::Approx(-3.0));
    }
    SECTION("weighted column sums vanish") {
        Rng rng(5);
        std::vector<std::vector<double>> rows(4, std::vector<double>(50));
        for (auto& r : rows) {
            for (auto& v : r) v = rng.uniform(-10, 10);
        }
        CoaWeights w;
        double sum = 0;
        for (int i = 0; i < 4; ++i) {
            w.weights.push_back(rng.uniform(0.1, 1.0));
            sum += w.weights.back();
        }
        for (auto& v : w.weights) v /= sum;
        const auto m = make_matrix(rows);
        const auto out = subtract_center_of_angle(m, w);
        for (std::size_t t = 0; t < m.steps; ++t) {
            double s = 0;
            for (std::size_t i = 0; i < m.buses; ++i) s += w.weights[i] * out.at(i, t);
            REQUIRE(std::abs(s) < 1e-9);
        }
    }
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(subtract_center_of_angle(make_matrix({{1, 2}}), CoaWeights::uniform(3)),
                          ArgumentError);
    }
}

TEST_CASE("unwrap") {
    constexpr double pi = std::numbers::pi;

    SECTION("no jump leaves the signal alone") {
        const auto out = unwrap(make_signal({0.0, 0.1, 0.2}));
        REQUIRE(out.samples == std::vector<double>{0.0, 0.1, 0.2});
    }
    SECTION("single downward wrap corrected") {
        const auto out = unwrap(make_signal({pi - 0.1, -pi + 0.1}));
        REQUIRE(out.samples[0] == Catch::Approx(pi - 0.1));
        REQUIRE(out.samples[1] == Catch::Approx(pi + 0.1));
    }
    SECTION("wrapped ramp recovered") {
        const double fs = 60.0;
        const double slope = 2.0 * pi * 0.5; // rad/s
        std::vector<double> ramp(400), wrapped(400);
        for (std::size_t i = 0; i < 400; ++i) {
            ramp[i] = slope * static_cast<double>(i) / fs;
            wrapped[i] = wrap_to_pi(ramp[i]);
        }
        const auto out = unwrap(make_signal(wrapped, fs));
        // The unwrapped curve equals the ramp up to the shared 2*pi offset of
        // the first sample (zero here).
        for (std::size_t i = 0; i < 400; ++i) {
            REQUIRE(std::abs(out.samples[i] - ramp[i]) < 1e-9);
        }
    }
    SECTION("first sample unchanged and steps below pi") {
        Rng rng(11);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> raw(60);
            double x = rng.uniform(-3, 3);
            for (auto& v : raw) {
                x += rng.uniform(-1.2, 1.2);
                v = wrap_to_pi(x);
            }
            const auto out = unwrap(make_signal(raw));
            REQUIRE(out.samples[0] == raw[0]);
            constexpr double two_pi = 2.0 * std::numbers::pi;
            for (std::size_t i = 0; i < raw.size(); ++i) {
                const double shift = (out.samples[i] - raw[i]) / two_pi;
                REQUIRE(std::abs(shift - std::round(shift)) < 1e-9);
                if (i > 0) REQUIRE(std::abs(out.samples[i] - out.samples[i - 1]) <= std::numbers::pi);
            }
        }
    }
}

TEST_CASE("deviation") {
    const auto out = deviation(make_signal({5, 6, 7}));
    REQUIRE(out.samples == std::vector<double>{0, 1, 2});

    const auto flat = deviation(make_signal({3.5, 3.5, 3.5}));
    REQUIRE(flat.samples == std::vector<double>{0, 0, 0});

    const auto sig = testutil::random_signal(3, 64);
    const auto once = deviation(sig);
    const auto twice = deviation(once);
    REQUIRE(once.samples == twice.samples);
}

TEST_CASE("detrend_linear") {
    SECTION("exact line vanishes") {
        const auto out = detrend_linear(make_signal({1, 2, 3, 4}));
        for (double v : out.samples) REQUIRE(std::abs(v) < 1e-12);
    }
    SECTION("zero signal stays zero") {
        const auto out = detrend_linear(make_signal(std::vector<double>(32, 0.0)));
        for (double v : out.samples) REQUIRE(v == 0.0);
    }
    SECTION("cosine plus line leaves the least-squares residual") {
        std::vector<double> y(200);
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] = std::cos(0.3 * static_cast<double>(i)) + 0.7 * static_cast<double>(i) - 2.0;
        }
        const auto [intercept, slope] = fit_line(y);
        const auto out = detrend_linear(make_signal(y));
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double expected = y[i] - intercept - slope * static_cast<double>(i);
            REQUIRE(out.samples[i] == Catch::Approx(expected).margin(1e-9));
        }
    }
    SECTION("residual orthogonal to constant and ramp") {
        const auto sig = testutil::random_signal(17, 128);
        const auto out = detrend_linear(sig);
        double s0 = 0, s1 = 0;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            s0 += out.samples[i];
            s1 += out.samples[i] * static_cast<double>(i);
        }
        REQUIRE(std::abs(s0) < 1e-9 * static_cast<double>(out.samples.size()));
        REQUIRE(std::abs(s1) < 1e-6 * static_cast<double>(out.samples.size()));
    }
}

TEST_CASE("preprocess_pipeline") {
    SECTION("constant rows map to zeros") {
        const auto outs = preprocess_pipeline(make_matrix({{2, 2, 2, 2}, {-1, -1, -1, -1}}),
                                              CoaWeights::uniform(2));
        REQUIRE(outs.size() == 2);
        for (const auto& s : outs) {
            for (double v : s.samples) REQUIRE(std::abs(v) < 1e-12);
        }
    }
    SECTION("single wrapped ramp row collapses to zero") {
        const double fs = 60.0;
        std::vector<double> wrapped(400);
        for (std::size_t i = 0; i < wrapped.size(); ++i) {
            wrapped[i] = wrap_to_pi(2.0 * std::numbers::pi * 0.5 * static_cast<double>(i) / fs);
        }
        const auto outs = preprocess_pipeline(make_matrix({wrapped}), CoaWeights::uniform(1));
        REQUIRE(outs.size() == 1);
        for (double v : outs[0].samples) REQUIRE(std::abs(v) < 1e-6);
    }
    SECTION("output count matches row count") {
        Rng rng(23);
        std::vector<std::vector<double>> rows(5, std::vector<double>(40));
        for (auto& r : rows) {
            for (auto& v : r) v = rng.uniform(-2, 2);
        }
        const auto outs = preprocess_pipeline(make_matrix(rows), CoaWeights::uniform(5));
        REQUIRE(outs.size() == 5);
    }
    SECTION("outputs carry no residual trend") {
        Rng rng(29);
        std::vector<std::vector<double>> rows(3, std::vector<double>(96));
        for (auto& r : rows) {
            double x = rng.uniform(-2, 2);
            for (auto& v : r) {
                x += rng.uniform(-0.8, 0.8);
                v = wrap_to_pi(x);
            }
        }
        const auto outs = preprocess_pipeline(make_matrix(rows), CoaWeights::uniform(3));
        for (const auto& s : outs) {
            const auto [intercept, slope] = fit_line(s.samples);
            REQUIRE(std::abs(intercept) < 1e-9);
            REQUIRE(std::abs(slope) < 1e-9);
        }
    }
}
