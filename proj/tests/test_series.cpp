#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qkdrisk/errors.hpp"
#include "qkdrisk/series.hpp"

using namespace qkdrisk;
namespace fs = std::filesystem;

namespace {

fs::path tmp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("csv load: three ordered rows") {
    auto p = tmp_file("qkdr_three.csv");
    write_text(p, "timestamp,qber,visibility,key_rate\n10,0.01,,\n20,0.02,0.97,1200\n30,0.03,,\n");
    auto s = load_qber_csv(p.string());
    REQUIRE(s.size() == 3);
    CHECK(s.samples[0].qber == 0.01);
    CHECK(s.samples[1].qber == 0.02);
    CHECK(s.samples[2].qber == 0.03);
    CHECK(s.samples[1].visibility.value() == 0.97);
    CHECK(s.samples[1].key_rate.value() == 1200.0);
    CHECK_FALSE(s.samples[0].visibility.has_value());
    fs::remove(p);
}

TEST_CASE("csv load: out-of-range qber rejected with line number") {
    auto p = tmp_file("qkdr_bad.csv");
    write_text(p, "timestamp,qber\n1,0.01\n2,1.5\n3,0.03\n");
    try {
        load_qber_csv(p.string());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("1.5") != std::string::npos);
    }
    fs::remove(p);
}

TEST_CASE("csv load: error taxonomy") {
    CHECK_THROWS_AS(load_qber_csv("/nonexistent/qkdr.csv"), IoError);

    auto p = tmp_file("qkdr_empty.csv");
    write_text(p, "timestamp,qber\n");
    CHECK_THROWS_AS(load_qber_csv(p.string()), DataError);

    write_text(p, "timestamp,value\n1,0.5\n");
    CHECK_THROWS_AS(load_qber_csv(p.string()), DataError);

    write_text(p, "timestamp,qber\n1,abc\n");
    CHECK_THROWS_AS(load_qber_csv(p.string()), DataError);
    fs::remove(p);
}

TEST_CASE("csv load: rows sorted by timestamp") {
    auto p = tmp_file("qkdr_unsorted.csv");
    write_text(p, "timestamp,qber\n30,0.03\n10,0.01\n20,0.02\n");
    auto s = load_qber_csv(p.string());
    CHECK(s.samples[0].timestamp == 10);
    CHECK(s.samples[2].timestamp == 30);
    fs::remove(p);
}

TEST_CASE("csv round-trip is bit-exact") {
    std::mt19937_64 rng(7);
    QberSeries s;
    s.channel_tag = "rt";
    for (int i = 0; i < 500; ++i) {
        QberSample q;
        q.timestamp = i * 60;
        q.qber = std::uniform_real_distribution<double>(0.0, 0.11)(rng);
        if (i % 3 == 0) q.visibility = std::uniform_real_distribution<double>(0.8, 1.0)(rng);
        if (i % 5 == 0) q.key_rate = std::uniform_real_distribution<double>(0.0, 5000.0)(rng);
        q.attack_label = (i % 97 == 0);
        s.samples.push_back(q);
    }
    auto p = tmp_file("qkdr_roundtrip.csv");
    save_qber_csv(s, p.string());
    auto back = load_qber_csv(p.string());
    REQUIRE(back.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.samples[i].qber == s.samples[i].qber);
        CHECK(back.samples[i].timestamp == s.samples[i].timestamp);
        CHECK(back.samples[i].visibility == s.samples[i].visibility);
        CHECK(back.samples[i].key_rate == s.samples[i].key_rate);
        CHECK(back.samples[i].attack_label == s.samples[i].attack_label);
    }
    fs::remove(p);
}

TEST_CASE("csv load: full-scale row count") {
    QberSeries s;
    for (int i = 0; i < 47768; ++i) {
        QberSample q;
        q.timestamp = i;
        q.qber = 0.02 + 1e-7 * (i % 1000);
        s.samples.push_back(q);
    }
    auto p = tmp_file("qkdr_47768.csv");
    save_qber_csv(s, p.string());
    auto back = load_qber_csv(p.string());
    CHECK(back.size() == 47768);
    fs::remove(p);
}

TEST_CASE("zero-key epochs are flagged but retained") {
    QberSample low_vis;
    low_vis.qber = 0.02;
    low_vis.visibility = 0.85;
    CHECK(low_vis.zero_key_epoch());

    QberSample high_qber;
    high_qber.qber = 0.115;
    CHECK(high_qber.zero_key_epoch());

    QberSample fine;
    fine.qber = 0.02;
    fine.visibility = 0.95;
    CHECK_FALSE(fine.zero_key_epoch());
}

TEST_CASE("partition_folds: contiguous examples") {
    auto f = partition_folds(8, 4);
    REQUIRE(f.k() == 4);
    CHECK(f.folds[0] == std::vector<std::size_t>{0, 1});
    CHECK(f.folds[3] == std::vector<std::size_t>{6, 7});

    auto g = partition_folds(9, 4);
    CHECK(g.folds[0].size() == 3);
    CHECK(g.folds[1].size() == 2);
    CHECK(g.folds[2].size() == 2);
    CHECK(g.folds[3].size() == 2);

    auto h = partition_folds(52104, 4);
    for (const auto& fold : h.folds) CHECK(fold.size() == 13026);
}

TEST_CASE("partition_folds: errors") {
    CHECK_THROWS_AS(partition_folds(10, 1), ConfigError);
    CHECK_THROWS_AS(partition_folds(3, 4), ConfigError);
}

TEST_CASE("partition_folds: disjoint cover with balanced sizes") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 2 + rng() % 500;
        std::size_t k = 2 + rng() % std::min<std::size_t>(n - 1, 9);
        auto mode = (rep % 2) ? FoldMode::Strided : FoldMode::Contiguous;
        auto f = partition_folds(n, k, mode);

        std::vector<bool> seen(n, false);
        std::size_t lo = n, hi = 0;
        for (const auto& fold : f.folds) {
            lo = std::min(lo, fold.size());
            hi = std::max(hi, fold.size());
            for (std::size_t idx : fold) {
                REQUIRE(idx < n);
                REQUIRE_FALSE(seen[idx]);
                seen[idx] = true;
            }
        }
        CHECK(hi - lo <= 1);
        for (std::size_t i = 0; i < n; ++i) REQUIRE(seen[i]);
    }
}

TEST_CASE("partition_folds is deterministic") {
    auto a = partition_folds(1001, 7, FoldMode::Strided);
    auto b = partition_folds(1001, 7, FoldMode::Strided);
    CHECK(a.folds == b.folds);
}

TEST_CASE("series validate catches violations") {
    auto s = oracle::make_series({0.01, 0.02});
    CHECK_NOTHROW(s.validate());
    s.samples[1].timestamp = -5;
    CHECK_THROWS_AS(s.validate(), DataError);
}
