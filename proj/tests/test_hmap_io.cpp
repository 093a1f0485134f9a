#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "reliefscan/hmap_io.hpp"
#include "reliefscan/rng.hpp"

using namespace reliefscan;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / "reliefscan_io_tests";
    fs::create_directories(d);
    return d;
}

HeightMap random_map(uint64_t seed, int w, int h, double missing_frac) {
    Rng rng(seed);
    HeightMap m;
    m.width = w;
    m.height = h;
    m.pitch_um = 0.34;
    m.z.resize(static_cast<size_t>(w) * h);
    for (auto& v : m.z) {
        if (rng.uniform01() < missing_frac) {
            v = missing_value();
        } else {
            // mix of magnitudes, signs, exact ints to stress the formatter
            double u = rng.uniform(-50.0, 50.0);
            if (rng.uniform01() < 0.2) u = std::floor(u);
            if (rng.uniform01() < 0.1) u *= 1e-7;
            v = u;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("read_heightmap parses values and missing sentinel") {
    std::string text =
        "HMAP 1\nwidth 2\nheight 2\npitch_um 0.34\n"
        "1.0 2.0\nnan 4.0\n";
    HeightMap h = io::parse_heightmap(text);
    CHECK(h.width == 2);
    CHECK(h.height == 2);
    CHECK(h.pitch_um == 0.34);
    CHECK(h.at(0, 0) == 1.0);
    CHECK(h.at(1, 0) == 2.0);
    CHECK(is_missing(h.at(0, 1)));  // row 1, col 0
    CHECK(h.at(1, 1) == 4.0);
}

TEST_CASE("missing sentinel accepts nan/inf/-inf case-insensitively") {
    std::string text =
        "HMAP 1\nwidth 3\nheight 1\npitch_um 1\n"
        "NaN INF -Inf\n";
    HeightMap h = io::parse_heightmap(text);
    for (double v : h.z) CHECK(is_missing(v));
}

TEST_CASE("dimension mismatch reports the offending row") {
    std::string text = "HMAP 1\nwidth 3\nheight 1\npitch_um 0.34\n1 2\n";
    try {
        io::parse_heightmap(text);
        FAIL("expected ParseError");
    } catch (const io::ParseError& e) {
        CHECK(std::string(e.what()).find("row 0") != std::string::npos);
        CHECK(e.line() == 5);
    }
}

TEST_CASE("parser rejects wrong token counts in every direction") {
    // too few rows
    CHECK_THROWS_AS(io::parse_heightmap("HMAP 1\nwidth 2\nheight 2\npitch_um 1\n1 2\n"),
                    io::ParseError);
    // too many rows
    CHECK_THROWS_AS(
        io::parse_heightmap("HMAP 1\nwidth 1\nheight 1\npitch_um 1\n1\n2\n"), io::ParseError);
    // too many tokens in a row
    CHECK_THROWS_AS(
        io::parse_heightmap("HMAP 1\nwidth 1\nheight 1\npitch_um 1\n1 2\n"), io::ParseError);
}

TEST_CASE("header errors carry line/column") {
    CHECK_THROWS_AS(io::parse_heightmap("XMAP 1\nwidth 2\n"), io::ParseError);
    CHECK_THROWS_AS(io::parse_heightmap("HMAP 1\nwidth 0\nheight 2\npitch_um 1\n"), io::ParseError);
    CHECK_THROWS_AS(io::parse_heightmap("HMAP 1\nwidth 2\nheight 1\npitch_um -1\n1 2\n"),
                    io::ParseError);
    CHECK_THROWS_AS(io::parse_heightmap("HMAP 1\nwidth 2\nheight 1\npitch_um 1\n1 bogus\n"),
                    io::ParseError);
    try {
        io::parse_heightmap("HMAP 1\nwidth 2\nheight 1\npitch_um 1\n1 bogus\n");
    } catch (const io::ParseError& e) {
        CHECK(e.line() == 5);
        CHECK(e.column() == 3);
    }
}

TEST_CASE("writer emits canonical bytes") {
    HeightMap h;
    h.width = 2;
    h.height = 1;
    h.pitch_um = 0.34;
    h.z = {0.0, missing_value()};
    CHECK(io::serialize_heightmap(h) == "HMAP 1\nwidth 2\nheight 1\npitch_um 0.34\n0 nan\n");
}

TEST_CASE("value 0.1 round-trips exactly at 64-bit precision") {
    HeightMap h;
    h.width = 1;
    h.height = 1;
    h.pitch_um = 1.0;
    h.z = {0.1};
    HeightMap back = io::parse_heightmap(io::serialize_heightmap(h));
    CHECK(back.z[0] == 0.1);
}

TEST_CASE("meta lines round-trip in sorted order") {
    HeightMap h;
    h.width = 1;
    h.height = 1;
    h.pitch_um = 2.5;
    h.z = {3.0};
    h.meta["papyrus"] = "P248";
    h.meta["letter"] = "eta";
    std::string text = io::serialize_heightmap(h);
    CHECK(text.find("meta letter eta\nmeta papyrus P248\n") != std::string::npos);
    HeightMap back = io::parse_heightmap(text);
    CHECK(back.meta == h.meta);
}

// round-trip oracle: for canonical files, read then write reproduces the bytes, and
// the in-memory value survives read∘write bit-exactly (missing pattern included)
TEST_CASE("write/read round-trip on 100 random seeded maps") {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        HeightMap m = random_map(seed, 9, 8, 0.1);
        std::string once = io::serialize_heightmap(m);
        HeightMap back = io::parse_heightmap(once);
        REQUIRE(back.width == m.width);
        REQUIRE(back.height == m.height);
        CHECK(back.pitch_um == m.pitch_um);
        for (size_t i = 0; i < m.z.size(); ++i) {
            if (is_missing(m.z[i]))
                CHECK(is_missing(back.z[i]));
            else
                CHECK(back.z[i] == m.z[i]);
        }
        // idempotent canonicalization: write∘read∘write == write
        CHECK(io::serialize_heightmap(back) == once);
    }
}

TEST_CASE("file-level heightmap round-trip is byte-identical") {
    auto dir = temp_dir();
    auto p1 = dir / "a.hmap";
    auto p2 = dir / "b.hmap";
    HeightMap m = random_map(7, 8, 9, 0.05);
    io::write_heightmap(m, p1);
    io::write_heightmap(io::read_heightmap(p1), p2);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
}

TEST_CASE("masks: PGM round-trip and validation") {
    auto dir = temp_dir();
    auto p = dir / "m.pgm";

    LabelMask all_zero{4, 3, std::vector<uint8_t>(12, 0)};
    io::write_mask(all_zero, p);
    LabelMask back = io::read_mask(p);
    CHECK(back.count_ink() == 0);
    CHECK(back.width == 4);
    CHECK(back.height == 3);

    // random masks round-trip
    Rng rng(3);
    LabelMask m{5, 7, {}};
    m.ink.resize(35);
    for (auto& v : m.ink) v = rng.coin() ? 1 : 0;
    io::write_mask(m, p);
    LabelMask r2 = io::read_mask(p);
    CHECK(r2.ink == m.ink);

    // illegal pixel value 128
    std::ofstream bad(dir / "bad.pgm", std::ios::binary);
    bad << "P5\n1 1\n255\n" << static_cast<char>(128);
    bad.close();
    CHECK_THROWS_WITH_AS(io::read_mask(dir / "bad.pgm"),
                         doctest::Contains("illegal pixel value 128"), std::runtime_error);

    // non-PGM magic
    std::ofstream notpgm(dir / "not.pgm", std::ios::binary);
    notpgm << "P2\n1 1\n255\n0";
    notpgm.close();
    CHECK_THROWS_AS(io::read_mask(dir / "not.pgm"), std::runtime_error);
}

TEST_CASE("manifest: 14 rows across 3 papyri") {
    auto dir = temp_dir() / "corpus14";
    fs::create_directories(dir);
    std::string csv = "sample_id,papyrus_id,letter,heightmap,label\n";
    const char* papyri[3] = {"P248", "P250", "P500P2"};
    int counts[3] = {5, 5, 4};
    int k = 0;
    for (int p = 0; p < 3; ++p) {
        for (int s = 0; s < counts[p]; ++s, ++k) {
            std::string id = std::string(papyri[p]) + "_s" + std::to_string(s + 1);
            HeightMap m = random_map(100 + k, 8, 8, 0.0);
            io::write_heightmap(m, dir / (id + ".hmap"));
            io::write_mask(LabelMask{8, 8, std::vector<uint8_t>(64, 0)}, dir / (id + ".pgm"));
            csv += id + "," + papyri[p] + ",alpha," + id + ".hmap," + id + ".pgm\n";
        }
    }
    std::ofstream(dir / "manifest.csv") << csv;
    DatasetManifest m = io::read_manifest(dir / "manifest.csv");
    CHECK(m.entries.size() == 14);
    CHECK(m.papyrus_ids().size() == 3);
}

TEST_CASE("manifest error paths") {
    auto dir = temp_dir() / "badman";
    fs::create_directories(dir);

    std::ofstream(dir / "empty.csv") << "sample_id,papyrus_id,letter,heightmap,label\n";
    CHECK_THROWS_WITH_AS(io::read_manifest(dir / "empty.csv"), doctest::Contains("empty manifest"),
                         std::runtime_error);

    HeightMap m = random_map(1, 8, 8, 0.0);
    io::write_heightmap(m, dir / "a.hmap");
    io::write_mask(LabelMask{8, 8, std::vector<uint8_t>(64, 0)}, dir / "a.pgm");

    std::ofstream(dir / "dup.csv") << "sample_id,papyrus_id,letter,heightmap,label\n"
                                      "s1,P1,alpha,a.hmap,a.pgm\n"
                                      "s1,P1,beta,a.hmap,a.pgm\n";
    CHECK_THROWS_WITH_AS(io::read_manifest(dir / "dup.csv"), doctest::Contains("s1"),
                         std::runtime_error);

    std::ofstream(dir / "missing.csv") << "sample_id,papyrus_id,letter,heightmap,label\n"
                                          "s1,P1,alpha,nosuch.hmap,a.pgm\n";
    CHECK_THROWS_AS(io::read_manifest(dir / "missing.csv"), std::runtime_error);
}
