#include <doctest.h>

#include <random>

#include "mssr/conv.hpp"
#include "mssr/errors.hpp"
#include "mssr/tensor.hpp"
#include "oracles.hpp"

using namespace mssr;

TEST_CASE("tensor construction and indexing") {
    Tensor4<float> t({2, 3, 4, 5});
    CHECK(t.shape().size() == 120);
    CHECK(t.shape().plane() == 20);
    for (float v : t.values()) CHECK(v == 0.0f);
    t(1, 2, 3, 4) = 7.0f;
    CHECK(t.values()[119] == 7.0f);
    CHECK(t.index(0, 1, 0, 0) == 20);
    CHECK_THROWS_AS(Tensor4<float>({1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
    CHECK(to_string(Shape4{1, 2, 3, 4}) == "[1x2x3x4]");
}

TEST_CASE("relu forward and backward") {
    Tensor4<double> x({1, 1, 1, 4}, {-1.0, 0.0, 0.5, 2.0});
    auto y = relu_forward(x);
    CHECK(y.values()[0] == 0.0);
    CHECK(y.values()[1] == 0.0);
    CHECK(y.values()[3] == 2.0);
    Tensor4<double> g({1, 1, 1, 4}, {1.0, 1.0, 1.0, 1.0});
    auto gx = relu_backward(x, g);
    CHECK(gx.values()[0] == 0.0);
    CHECK(gx.values()[1] == 0.0);
    CHECK(gx.values()[2] == 1.0);
    CHECK_THROWS_AS(relu_backward(x, Tensor4<double>({1, 1, 2, 2})), ShapeError);
}

TEST_CASE("add requires matching shapes") {
    Tensor4<float> a({1, 2, 2, 2});
    a.fill(1.0f);
    auto b = add(a, a);
    CHECK(b(0, 1, 1, 1) == 2.0f);
    CHECK_THROWS_AS(add(a, Tensor4<float>({1, 1, 2, 2})), ShapeError);
}

TEST_CASE("conv2d matches the direct summation oracle") {
    for (std::uint64_t seed = 0; seed < 24; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t B = 1 + seed % 2;
        const std::size_t C = 1 + seed % 5;
        const std::size_t O = 1 + (seed * 7) % 6;
        const std::size_t H = 1 + (seed * 3) % 9;
        const std::size_t W = 1 + (seed * 5) % 11;
        ConvLayer<double> layer(C, O);
        oracle::randomize(layer, rng);
        auto x = oracle::random_tensor<double>({B, C, H, W}, rng);
        auto got = conv2d_forward(x, layer);
        auto want = oracle::conv2d(x, layer);
        REQUIRE(got.shape() == want.shape());
        double worst = 0.0;
        for (std::size_t i = 0; i < got.values().size(); ++i) {
            worst = std::max(worst, std::abs(got.values()[i] - want.values()[i]));
        }
        CHECK(worst < 1e-6);

        ConvLayer<float> lf = layer.cast<float>();
        auto gf = conv2d_forward(x.cast<float>(), lf);
        for (std::size_t i = 0; i < gf.values().size(); ++i) {
            CHECK(std::abs(gf.values()[i] - want.values()[i]) < 1e-4);
        }
    }
}

TEST_CASE("conv2d rejects a channel mismatch") {
    ConvLayer<float> layer(3, 2);
    CHECK_THROWS_AS(conv2d_forward(Tensor4<float>({1, 2, 4, 4}), layer), ShapeError);
}

TEST_CASE("conv2d backward matches finite differences of <conv(x), G>") {
    std::mt19937_64 rng(11);
    ConvLayer<double> layer(2, 3);
    oracle::randomize(layer, rng);
    auto x = oracle::random_tensor<double>({2, 2, 4, 5}, rng);
    auto G = oracle::random_tensor<double>({2, 3, 4, 5}, rng);
    auto objective = [&](const ConvLayer<double>& l, const Tensor4<double>& in) {
        auto y = oracle::conv2d(in, l);
        long double s = 0;
        for (std::size_t i = 0; i < y.values().size(); ++i) s += y.values()[i] * G.values()[i];
        return static_cast<double>(s);
    };
    layer.zero_grad();
    auto gx = conv2d_backward(x, layer, G);
    const double h = 1e-5;
    // The objective is linear in each argument, so central differences are exact up to rounding.
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        ConvLayer<double> p = layer, m = layer;
        p.weights[i] += h;
        m.weights[i] -= h;
        CHECK(layer.grad_weights[i] == doctest::Approx((objective(p, x) - objective(m, x)) / (2 * h)).epsilon(1e-7));
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
        ConvLayer<double> p = layer, m = layer;
        p.bias[i] += h;
        m.bias[i] -= h;
        CHECK(layer.grad_bias[i] == doctest::Approx((objective(p, x) - objective(m, x)) / (2 * h)).epsilon(1e-7));
    }
    for (std::size_t i = 0; i < x.values().size(); ++i) {
        auto p = x, m = x;
        p.values()[i] += h;
        m.values()[i] -= h;
        CHECK(gx.values()[i] ==
              doctest::Approx((objective(layer, p) - objective(layer, m)) / (2 * h)).epsilon(1e-7));
    }
}

TEST_CASE("parameter-only backward accumulates the same gradients") {
    std::mt19937_64 rng(5);
    ConvLayer<float> a(3, 4);
    oracle::randomize(a, rng);
    ConvLayer<float> b = a;
    auto x = oracle::random_tensor<float>({2, 3, 6, 6}, rng);
    auto g = oracle::random_tensor<float>({2, 4, 6, 6}, rng);
    a.zero_grad();
    b.zero_grad();
    conv2d_backward(x, a, g);
    conv2d_backward_params(x, b, g);
    CHECK(a.grad_weights == b.grad_weights);
    CHECK(a.grad_bias == b.grad_bias);
    // Gradients accumulate across calls.
    conv2d_backward_params(x, b, g);
    for (std::size_t i = 0; i < a.grad_bias.size(); ++i) {
        CHECK(b.grad_bias[i] == doctest::Approx(2.0 * a.grad_bias[i]));
    }
}

TEST_CASE("conv2d forward is bitwise repeatable") {
    std::mt19937_64 rng(3);
    ConvLayer<float> layer(16, 16);
    oracle::randomize(layer, rng);
    auto x = oracle::random_tensor<float>({2, 16, 24, 24}, rng);
    auto a = conv2d_forward(x, layer);
    auto b = conv2d_forward(x, layer);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
}
