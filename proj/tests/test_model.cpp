#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "mssr/errors.hpp"
#include "mssr/gradcheck.hpp"
#include "mssr/model.hpp"
#include "mssr/model_io.hpp"
#include "oracles.hpp"

using namespace mssr;

namespace {

template <typename T>
void randomize(MssrModel<T>& model, std::uint64_t seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    for (auto* l : model.layers()) oracle::randomize(*l, rng, scale);
    ++model.revision;
}

// Depths of every path through the two blocks plus reconstruction.
ReceptiveFields path_fields(std::size_t ns, std::size_t nl, std::size_t nr) {
    std::vector<std::size_t> depths;
    for (std::size_t a : {ns, nl})
        for (std::size_t b : {ns, nl}) depths.push_back(a + b + nr);
    std::sort(depths.begin(), depths.end());
    return {oracle::chain_field(depths.front()), oracle::chain_field(depths[1]), oracle::chain_field(depths.back())};
}

}  // namespace

TEST_CASE("receptive fields of the default network") {
    CHECK(receptive_fields(2, 9, 2) == ReceptiveFields{13, 27, 41});
    for (std::size_t nl = 2; nl < 12; ++nl)
        for (std::size_t ns = 1; ns < nl; ++ns)
            for (std::size_t nr = 1; nr < 4; ++nr) CHECK(receptive_fields(ns, nl, nr) == path_fields(ns, nl, nr));
}

TEST_CASE("layer shapes follow the architecture") {
    MssrModel<float> m;
    REQUIRE(m.block1.layers.size() == 9);
    REQUIRE(m.block2.layers.size() == 9);
    REQUIRE(m.recon.size() == 2);
    CHECK(m.block1.tap_index == 2);
    CHECK(m.block1.layers[0].in_channels == 1);
    CHECK(m.block1.layers[0].out_channels == 64);
    CHECK(m.block2.layers[0].in_channels == 64);
    CHECK(m.recon[0].out_channels == 64);
    CHECK(m.recon[1].in_channels == 64);
    CHECK(m.recon[1].out_channels == 1);
    CHECK(m.layers().size() == 20);
}

TEST_CASE("parameter count matches the per-layer tally") {
    CHECK(parameter_count(MssrModel<float>()) == 665921);
    CHECK(oracle::parameter_tally(9, 2, 64) == 665921);
    for (std::size_t w : {1, 3, 8})
        for (std::size_t nl : {2, 5})
            for (std::size_t nr : {1, 3}) {
                MssrModel<double> m(ModelConfig{nl, 1, nr, w});
                CHECK(parameter_count(m) == oracle::parameter_tally(nl, nr, w));
                CHECK(flatten_parameters(m).size() == parameter_count(m));
            }
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS_AS(MssrModel<float>(ModelConfig{9, 9, 2, 64}), ArgumentError);
    CHECK_THROWS_AS(MssrModel<float>(ModelConfig{9, 0, 2, 64}), ArgumentError);
    CHECK_THROWS_AS(MssrModel<float>(ModelConfig{9, 2, 0, 64}), ArgumentError);
    CHECK_THROWS_AS(MssrModel<float>(ModelConfig{9, 2, 2, 0}), ArgumentError);
}

TEST_CASE("a zero model predicts a zero residual") {
    MssrModel<float> m(ModelConfig{3, 1, 2, 4});
    std::mt19937_64 rng(1);
    auto x = oracle::random_tensor<float>({2, 1, 5, 9}, rng);
    auto r = model_forward(m, x);
    CHECK(r.shape() == Shape4{2, 1, 5, 9});
    for (float v : r.values()) CHECK(v == 0.0f);
    auto y = restore(m, x);
    CHECK(std::equal(y.values().begin(), y.values().end(), x.values().begin()));
    CHECK_THROWS_AS(model_forward(m, Tensor4<float>({1, 2, 5, 5})), ShapeError);
}

TEST_CASE("fusion block output is tap activation plus final activation") {
    MssrModel<double> m(ModelConfig{4, 2, 1, 3});
    randomize(m, 7);
    std::mt19937_64 rng(2);
    auto x = oracle::random_tensor<double>({1, 1, 6, 6}, rng);
    Tensor4<double> h = x;
    Tensor4<double> tap;
    for (std::size_t k = 0; k < 4; ++k) {
        h = relu_forward(oracle::conv2d(h, m.block1.layers[k]));
        if (k + 1 == 2) tap = h;
    }
    auto want = add(h, tap);
    auto got = block_forward(m.block1, x);
    for (std::size_t i = 0; i < want.values().size(); ++i) {
        CHECK(got.values()[i] == doctest::Approx(want.values()[i]).epsilon(1e-12));
    }
}

TEST_CASE("model gradients match finite differences") {
    GradCheckOptions opt;
    opt.model = ModelConfig{4, 2, 2, 3};
    opt.input_size = 6;
    const auto report = check_model_gradients(opt);
    CHECK(report.entries.size() == opt.model.layer_count());
    CHECK(report.passed());
    CHECK(report.worst() < 1e-5);
}

TEST_CASE("the gradient checker catches a corrupted gradient") {
    GradCheckOptions opt;
    opt.model = ModelConfig{3, 1, 2, 3};
    opt.input_size = 5;
    for (auto bug : {InjectedBug::bias, InjectedBug::weight}) {
        opt.inject = bug;
        CHECK_FALSE(check_model_gradients(opt).passed());
        CHECK_FALSE(run_grad_check(opt).passed());
    }
}

TEST_CASE("backward rejects a stale trace") {
    MssrModel<double> m(ModelConfig{3, 1, 1, 2});
    randomize(m, 1);
    std::mt19937_64 rng(4);
    auto x = oracle::random_tensor<double>({1, 1, 4, 4}, rng);
    auto trace = model_forward_traced(m, x);
    assign_parameters(m, flatten_parameters(m));
    CHECK_THROWS_AS(model_backward(m, trace, Tensor4<double>({1, 1, 4, 4})), ContractError);
    MssrModel<double> other = m;
    auto fresh = model_forward_traced(m, x);
    CHECK_THROWS_AS(model_backward(other, fresh, Tensor4<double>({1, 1, 4, 4})), ContractError);
    CHECK_NOTHROW(model_backward(m, fresh, Tensor4<double>({1, 1, 4, 4})));
    CHECK(m.grads_ready);
}

TEST_CASE("float and double forward passes agree") {
    MssrModel<double> md(ModelConfig{9, 2, 2, 8});
    init_he(md, 3);
    auto mf = md.cast<float>();
    std::mt19937_64 rng(9);
    auto x = oracle::random_tensor<double>({1, 1, 12, 12}, rng);
    auto rd = model_forward(md, x);
    auto rf = model_forward(mf, x.cast<float>());
    double scale = 0.0;
    for (double v : rd.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < rd.values().size(); ++i) {
        CHECK(std::abs(rd.values()[i] - rf.values()[i]) <= 1e-4 * std::max(1.0, scale));
    }
}

TEST_CASE("He initialization") {
    MssrModel<float> a, b, c;
    init_he(a, 42);
    init_he(b, 42);
    init_he(c, 43);
    CHECK(flatten_parameters(a) == flatten_parameters(b));
    CHECK(flatten_parameters(a) != flatten_parameters(c));
    const auto& layer = a.block2.layers[3];
    double sum = 0.0, sq = 0.0;
    for (float w : layer.weights) {
        sum += w;
        sq += static_cast<double>(w) * w;
    }
    const double n = static_cast<double>(layer.weights.size());
    const double stddev = std::sqrt(sq / n - (sum / n) * (sum / n));
    CHECK(std::abs(sum / n) < 0.01 * std::sqrt(2.0 / 576.0) * 10);
    CHECK(stddev == doctest::Approx(std::sqrt(2.0 / (64 * 9))).epsilon(0.03));
    for (float v : layer.bias) CHECK(v == 0.0f);
}

TEST_CASE("flatten and assign round-trip") {
    MssrModel<double> m(ModelConfig{3, 1, 2, 4});
    randomize(m, 8);
    auto flat = flatten_parameters(m);
    MssrModel<double> n(m.config);
    assign_parameters(n, flat);
    CHECK(flatten_parameters(n) == flat);
    CHECK_THROWS_AS(assign_parameters(n, std::vector<double>(flat.size() + 1)), ShapeError);
}

TEST_CASE("model files round-trip bitwise") {
    fixture::TempDir dir("model_io");
    MssrModel<float> m;
    init_he(m, 5);
    save_model(m, dir / "m.mssr");
    auto loaded = load_model(dir / "m.mssr");
    CHECK(loaded.config == m.config);
    CHECK(flatten_parameters(loaded) == flatten_parameters(m));
    CHECK(encode_model(loaded) == encode_model(m));

    MssrModel<double> md(ModelConfig{3, 1, 1, 2});
    randomize(md, 3);
    save_model(md, dir / "d.mssr");
    auto back = load_model(dir / "d.mssr");
    auto fd = flatten_parameters(md);
    auto fb = flatten_parameters(back);
    for (std::size_t i = 0; i < fd.size(); ++i) CHECK(fb[i] == static_cast<float>(fd[i]));
}

TEST_CASE("model decoding reports malformed input") {
    MssrModel<float> m(ModelConfig{3, 1, 1, 2});
    auto bytes = encode_model(m);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    try {
        decode_model(truncated);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() <= truncated.size());
    }

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_model(trailing), FormatError);

    auto magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(decode_model(magic), FormatError);

    auto version = bytes;
    version[4] = 9;
    CHECK_THROWS_AS(decode_model(version), FormatError);

    // Header width 2 -> 3 without changing the layers.
    auto shape = bytes;
    shape[12] = 3;
    CHECK_THROWS_AS(decode_model(shape), ModelShapeError);

    CHECK_THROWS_AS(load_model("/nonexistent/model.mssr"), IoError);
}
