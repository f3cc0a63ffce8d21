#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "mssr/dataset.hpp"
#include "mssr/errors.hpp"
#include "mssr/resize.hpp"
#include "mssr/sample_store.hpp"
#include "oracles.hpp"

using namespace mssr;

namespace {

// Patches expected from one variant of size h x w.
std::size_t tiles(std::size_t h, std::size_t w, int scale, std::size_t patch) {
    const std::size_t s = static_cast<std::size_t>(scale);
    return ((h / s * s) / patch) * ((w / s * s) / patch);
}

std::size_t expected_count(std::size_t h, std::size_t w, const AugmentSpec& aug, const PairSpec& pairs) {
    std::vector<std::pair<std::size_t, std::size_t>> dims = {{h, w}};
    if (aug.rotate) {
        dims.push_back({w, h});
        dims.push_back({h, w});
        dims.push_back({w, h});
    }
    std::vector<double> factors = {1.0};
    if (aug.downscale) factors.insert(factors.end(), aug.downscale_factors.begin(), aug.downscale_factors.end());
    std::size_t total = 0;
    for (auto [dh, dw] : dims) {
        for (double f : factors) {
            // Exact integer floor for the factors used here (tenths).
            const auto tenths = static_cast<std::size_t>(std::lround(f * 10));
            const std::size_t vh = dh * tenths / 10, vw = dw * tenths / 10;
            if (f != 1.0 && (vh < aug.min_side || vw < aug.min_side)) continue;
            for (int s : pairs.scales) total += tiles(vh, vw, s, pairs.patch_size);
        }
    }
    return total;
}

}  // namespace

TEST_CASE("augmentation produces every rotation and downscale") {
    AugmentSpec spec;
    const auto variants = augment_variants(oracle::smooth_plane(70, 80, 1), spec);
    REQUIRE(variants.size() == 20);
    CHECK(variants[0].rotation == 0);
    CHECK(variants[0].factor == 1.0);
    CHECK(variants[0].label() == "rot0_x1.00");
    CHECK(variants[1].image.height() == 63);
    CHECK(variants[1].image.width() == 72);
    CHECK(variants[5].rotation == 90);
    CHECK(variants[5].image.height() == 80);
    CHECK(variants[5].image.width() == 70);
    CHECK(augment_variants(oracle::smooth_plane(60, 70, 1), spec).size() == 16);
    CHECK(variants[19].label() == "rot270_x0.60");
}

TEST_CASE("downscaled variants below the patch size are dropped") {
    // 50 * 0.7 = 35 and 50 * 0.6 = 30 fall below 41; 50 * 0.8 = 40 does too.
    const auto v = augment_variants(oracle::smooth_plane(50, 50, 1), AugmentSpec{});
    CHECK(v.size() == 8);
    for (const auto& a : v) CHECK(a.image.height() >= 41);
    // floor(30 * 0.7) is 21 despite the inexact product.
    AugmentSpec small;
    small.min_side = 1;
    small.rotate = false;
    const auto w = augment_variants(oracle::smooth_plane(30, 30, 1), small);
    CHECK(w[3].image.height() == 21);
}

TEST_CASE("augmentation switches") {
    AugmentSpec spec;
    spec.rotate = false;
    spec.downscale = false;
    CHECK(augment(oracle::smooth_plane(45, 45, 2), spec).size() == 1);
    spec.rotate = true;
    CHECK(augment(oracle::smooth_plane(45, 45, 2), spec).size() == 4);
    spec.rotations = {45};
    CHECK_THROWS_AS(augment(oracle::smooth_plane(45, 45, 2), spec), ArgumentError);
}

TEST_CASE("training pairs reconstruct the cropped HR image") {
    const auto hr = oracle::smooth_plane(100, 125, 3);
    PairSpec spec;
    const auto samples = make_pairs(hr, spec);
    std::size_t want = 0;
    for (int s : spec.scales) want += tiles(100, 125, s, 41);
    REQUIRE(samples.size() == want);
    // Every patch equals the matching tile of the degraded, modulo-cropped image.
    std::size_t k = 0;
    for (int scale : spec.scales) {
        const auto y = modcrop(hr, scale);
        const auto x = degrade(y, scale);
        const std::size_t rows = y.height() / 41, cols = y.width() / 41;
        for (std::size_t ty = 0; ty < rows; ++ty) {
            for (std::size_t tx = 0; tx < cols; ++tx, ++k) {
                const auto& s = samples[k];
                CHECK(s.scale == scale);
                double worst = 0.0;
                for (std::size_t i = 0; i < 41; ++i) {
                    for (std::size_t j = 0; j < 41; ++j) {
                        CHECK(s.x(i, j) == x(ty * 41 + i, tx * 41 + j));
                        worst = std::max(worst, std::abs(s.x(i, j) + s.r(i, j) - hr(ty * 41 + i, tx * 41 + j)));
                    }
                }
                CHECK(worst < 1e-12);
            }
        }
    }
}

TEST_CASE("degradation is a bicubic down/up round trip") {
    const auto hr = oracle::smooth_plane(24, 36, 5);
    const auto x = degrade(hr, 3);
    CHECK(x == bicubic_resize(bicubic_resize(hr, 8, 12), 24, 36));
    CHECK_THROWS_AS(degrade(oracle::smooth_plane(25, 36, 5), 3), ArgumentError);
}

TEST_CASE("images smaller than a patch give no pairs") {
    CHECK(make_pairs(oracle::smooth_plane(40, 200, 1), PairSpec{}).empty());
    PairSpec bad;
    bad.stride = 20;
    CHECK_THROWS_AS(make_pairs(oracle::smooth_plane(50, 50, 1), bad), ArgumentError);
}

TEST_CASE("sample store round-trip") {
    fixture::TempDir dir("store");
    SampleStore store;
    store.patch_size = 3;
    store.seed = 77;
    for (int i = 0; i < 4; ++i) {
        TrainSample s{oracle::smooth_plane(3, 3, i), oracle::smooth_plane(3, 3, i + 10), 2 + i % 3};
        store.samples.push_back(s);
        store.records.push_back({"img" + std::to_string(i) + ".png", "rot0_x1.00", s.scale, 0});
    }
    write_sample_store(dir.path(), store);
    const auto back = read_sample_store(dir.path());
    CHECK(back.patch_size == 3);
    CHECK(back.seed == 77);
    REQUIRE(back.samples.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(back.samples[i].scale == store.samples[i].scale);
        CHECK(back.records[i].source == store.records[i].source);
        for (std::size_t k = 0; k < 9; ++k) {
            CHECK(back.samples[i].x.values()[k] == static_cast<float>(store.samples[i].x.values()[k]));
        }
    }

    // Payload shorter than the manifest claims.
    std::filesystem::resize_file(dir / kSamplesName, 40);
    CHECK_THROWS_AS(read_sample_store(dir.path()), FormatError);
    CHECK_THROWS_AS(read_sample_store(dir / "missing"), IoError);
}

TEST_CASE("building a training set from a corpus") {
    fixture::TempDir dir("build");
    const std::vector<std::pair<std::size_t, std::size_t>> sizes = {{64, 80}, {90, 50}, {45, 45}, {123, 100}, {50, 60}};
    fixture::write_corpus(dir / "hr", sizes, 3);
    std::ofstream(dir / "hr" / "broken.png") << "garbage";
    std::ofstream(dir / "hr" / "notes.txt") << "ignored";

    AugmentSpec aug;
    PairSpec pairs;
    std::ostringstream log;
    const auto report = build_training_set({dir / "hr"}, aug, pairs, 5, dir / "store", &log);
    CHECK(report.images_found == 6);
    CHECK(report.images_used == 5);
    CHECK(report.warnings == 1);
    CHECK(log.str().find("broken.png") != std::string::npos);

    std::size_t want = 0;
    for (auto [h, w] : sizes) want += expected_count(h, w, aug, pairs);
    CHECK(report.total_samples == want);

    const auto store = read_sample_store(dir / "store");
    CHECK(store.samples.size() == want);
    CHECK(store.seed == 5);
    std::size_t per_scale_sum = 0;
    for (auto [s, n] : report.samples_per_scale) per_scale_sum += n;
    CHECK(per_scale_sum == want);

    CHECK_THROWS_AS(build_training_set({dir / "nope"}, aug, pairs, 0, dir / "s2"), IoError);
    std::filesystem::create_directories(dir / "empty");
    CHECK_THROWS_AS(build_training_set({dir / "empty"}, aug, pairs, 0, dir / "s3"), DatasetError);
}

TEST_CASE("benchmark loading") {
    fixture::TempDir dir("bench");
    fixture::write_corpus(dir.path(), {{31, 35}, {40, 44}}, 9);
    const auto pairs = load_benchmark(dir.path(), 3);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].name == "img0.png");
    CHECK(pairs[0].y.height() == 30);
    CHECK(pairs[0].y.width() == 33);
    CHECK(pairs[0].x == degrade(pairs[0].y, 3));
    CHECK_THROWS_AS(load_benchmark(dir.path(), 5), ArgumentError);
}
