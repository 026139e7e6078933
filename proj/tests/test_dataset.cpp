#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>

#include "vmdaug/dataset_io.hpp"
#include "vmdaug/rng.hpp"

#include "test_util.hpp"

using namespace vmdaug;
using testutil::TempDir;

namespace {

LabeledDataset random_dataset(std::size_t n, std::size_t len, std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset d;
    for (std::size_t i = 0; i < n; ++i) {
        LabeledSample s;
        s.signal.fs = 60.0;
        for (std::size_t t = 0; t < len; ++t) {
            s.signal.samples.push_back(rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-6, 6)));
        }
        s.label = rng.bernoulli(0.5) ? StabilityLabel::stable : StabilityLabel::unstable;
        d.samples.push_back(std::move(s));
    }
    return d;
}

} // namespace

TEST_CASE("load_dataset parses a plain CSV") {
    TempDir dir("csv");
    std::string csv;
    for (int row = 0; row < 2; ++row) {
        for (int i = 0; i < 400; ++i) csv += std::to_string(row + i) + ",";
        csv += row == 0 ? "stable\n" : "unstable\n";
    }
    testutil::write_text(dir.file("d.csv"), csv);

    const auto d = load_dataset(dir.file("d.csv"), FileFormat::csv);
    REQUIRE(d.size() == 2);
    REQUIRE(d.length() == 400);
    REQUIRE(d.samples[0].label == StabilityLabel::stable);
    REQUIRE(d.samples[1].label == StabilityLabel::unstable);
    REQUIRE(d.samples[1].signal.samples[0] == 1.0);
}

TEST_CASE("load_dataset skips a header row") {
    TempDir dir("csv-header");
    testutil::write_text(dir.file("d.csv"), "v0,v1,v2,label\n1,2,3,stable\n4,5,6,unstable\n");
    const auto d = load_dataset(dir.file("d.csv"), FileFormat::csv);
    REQUIRE(d.size() == 2);
    REQUIRE(d.length() == 3);
}

TEST_CASE("load_dataset error paths") {
    TempDir dir("csv-errors");

    SECTION("empty file") {
        testutil::write_text(dir.file("e.csv"), "");
        REQUIRE_THROWS_AS(load_dataset(dir.file("e.csv"), FileFormat::csv), FormatError);
    }
    SECTION("NaN value") {
        testutil::write_text(dir.file("n.csv"), "1,2,NaN,stable\n");
        REQUIRE_THROWS_AS(load_dataset(dir.file("n.csv"), FileFormat::csv), DataError);
    }
    SECTION("ragged rows") {
        testutil::write_text(dir.file("r.csv"), "1,2,3,stable\n1,2,unstable\n");
        REQUIRE_THROWS_AS(load_dataset(dir.file("r.csv"), FileFormat::csv), FormatError);
    }
    SECTION("unknown label") {
        testutil::write_text(dir.file("l.csv"), "1,2,3,stable\n1,2,3,wobbly\n");
        REQUIRE_THROWS_AS(load_dataset(dir.file("l.csv"), FileFormat::csv), LabelError);
    }
    SECTION("missing file") {
        REQUIRE_THROWS_AS(load_dataset(dir.file("nope.csv"), FileFormat::csv), FormatError);
    }
}

TEST_CASE("dataset round-trips bit-exactly through CSV and JSON") {
    TempDir dir("roundtrip");
    const auto d = random_dataset(13, 17, 42);

    for (auto format : {FileFormat::csv, FileFormat::json}) {
        const auto path = dir.file(format == FileFormat::csv ? "d.csv" : "d.json");
        save_dataset(d, path, format);
        const auto back = load_dataset(path, format, 60.0);
        REQUIRE(back.size() == d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            REQUIRE(back.samples[i].label == d.samples[i].label);
            for (std::size_t t = 0; t < d.length(); ++t) {
                REQUIRE(back.samples[i].signal.samples[t] == d.samples[i].signal.samples[t]);
            }
        }
    }
}

TEST_CASE("load_signals reads all-numeric rows") {
    TempDir dir("signals");
    testutil::write_text(dir.file("s.csv"), "t0,t1,t2\n1,2,3\n-4,5.5,6e-3\n");
    const auto sigs = load_signals(dir.file("s.csv"), 30.0);
    REQUIRE(sigs.size() == 2);
    REQUIRE(sigs[0].fs == 30.0);
    REQUIRE(sigs[1].samples[2] == 6e-3);
}

TEST_CASE("split_dataset reproduces the documented sizes") {
    const auto d = random_dataset(7878, 4, 7);
    const auto [train, test] = split_dataset(d, 2.0 / 3.0, 1);
    REQUIRE(train.size() == 5252);
    REQUIRE(test.size() == 2626);
}

TEST_CASE("split_dataset is deterministic and stratified") {
    SECTION("same seed twice") {
        const auto d = random_dataset(10, 4, 3);
        const auto [a1, b1] = split_dataset(d, 0.5, 99);
        const auto [a2, b2] = split_dataset(d, 0.5, 99);
        REQUIRE(a1.size() == a2.size());
        for (std::size_t i = 0; i < a1.size(); ++i) {
            REQUIRE(a1.samples[i].signal.samples == a2.samples[i].signal.samples);
            REQUIRE(a1.samples[i].label == a2.samples[i].label);
        }
    }
    SECTION("2 per class, half split") {
        LabeledDataset d;
        for (int i = 0; i < 4; ++i) {
            LabeledSample s;
            s.signal = testutil::make_signal({double(i), double(i + 1)});
            s.label = i % 2 == 0 ? StabilityLabel::stable : StabilityLabel::unstable;
            d.samples.push_back(s);
        }
        const auto [train, test] = split_dataset(d, 0.5, 5);
        REQUIRE(train.size() == 2);
        REQUIRE(train.count(StabilityLabel::stable) == 1);
        REQUIRE(train.count(StabilityLabel::unstable) == 1);
        REQUIRE(test.count(StabilityLabel::stable) == 1);
        REQUIRE(test.count(StabilityLabel::unstable) == 1);
    }
    SECTION("invalid fraction") {
        const auto d = random_dataset(4, 4, 1);
        REQUIRE_THROWS_AS(split_dataset(d, 0.0, 1), ArgumentError);
        REQUIRE_THROWS_AS(split_dataset(d, 1.0, 1), ArgumentError);
    }
}

TEST_CASE("split_dataset partitions the multiset") {
    // Property: union equals the original multiset, intersection is empty.
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        Rng r(seed);
        const std::size_t n = 3 + r.index(40);
        const auto d = random_dataset(n, 5, seed * 31 + 1);
        const double f = r.uniform(0.15, 0.85);
        const auto [train, test] = split_dataset(d, f, seed);

        REQUIRE(train.size() + test.size() == d.size());
        auto key = [](const LabeledSample& s) {
            return std::make_pair(s.signal.samples, s.label == StabilityLabel::stable);
        };
        std::map<std::pair<std::vector<double>, bool>, int> counts;
        for (const auto& s : d.samples) counts[key(s)]++;
        for (const auto& s : train.samples) counts[key(s)]--;
        for (const auto& s : test.samples) counts[key(s)]--;
        for (const auto& [k, v] : counts) REQUIRE(v == 0);
    }
}
