#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "mssr/errors.hpp"
#include "mssr/gradcheck.hpp"
#include "mssr/model_io.hpp"
#include "mssr/trainer.hpp"
#include "oracles.hpp"

using namespace mssr;

namespace {

std::vector<TrainSample> toy_samples(std::size_t n, std::size_t side, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<TrainSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        TrainSample s;
        s.x = oracle::random_plane(side, side, rng);
        s.r = oracle::random_plane(side, side, rng);
        for (double& v : s.r.values()) v = 0.2 * (v - 0.5);
        s.scale = 2 + static_cast<int>(i % 3);
        out.push_back(std::move(s));
    }
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("adam update matches a scalar reference") {
    std::vector<double> theta = {0.5, -1.0, 2.0};
    const std::vector<double> g0 = {0.1, -0.3, 0.0};
    std::vector<double> m(3, 0.0), v(3, 0.0);
    std::vector<double> ref_theta = theta, ref_m(3, 0.0), ref_v(3, 0.0);
    const double lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8, wd = 1e-4;
    for (std::uint64_t t = 1; t <= 5; ++t) {
        std::vector<double> g = g0;
        for (auto& x : g) x *= static_cast<double>(t);
        adam_update<double>(theta, g, m, v, t, lr, b1, b2, eps, wd);
        for (int i = 0; i < 3; ++i) {
            const double gi = g[i] + wd * ref_theta[i];
            ref_m[i] = b1 * ref_m[i] + (1 - b1) * gi;
            ref_v[i] = b2 * ref_v[i] + (1 - b2) * gi * gi;
            const double mh = ref_m[i] / (1 - std::pow(b1, t));
            const double vh = ref_v[i] / (1 - std::pow(b2, t));
            ref_theta[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(theta[i] == doctest::Approx(ref_theta[i]).epsilon(1e-12));
        CHECK(m[i] == doctest::Approx(ref_m[i]).epsilon(1e-12));
    }
}

TEST_CASE("the first adam step moves each parameter by about lr") {
    std::vector<float> theta = {1.0f, 1.0f};
    std::vector<float> g = {3.0f, -0.01f};
    std::vector<float> m(2), v(2);
    adam_update<float>(theta, g, m, v, 1, 1e-4, 0.9, 0.999, 1e-8, 0.0);
    CHECK(theta[0] == doctest::Approx(1.0 - 1e-4).epsilon(1e-6));
    CHECK(theta[1] == doctest::Approx(1.0 + 1e-4).epsilon(1e-6));
}

TEST_CASE("adam step requires gradients") {
    MssrModel<float> m(ModelConfig{3, 1, 1, 2});
    AdamState<float> state(parameter_count(m), TrainConfig{});
    CHECK_THROWS_AS(adam_step(m, state), ContractError);
}

TEST_CASE("batch loss is half the mean squared residual error") {
    MssrModel<double> m(ModelConfig{3, 1, 2, 4});
    init_he(m, 1);
    const auto batch = toy_samples(5, 9, 3);
    double want = 0.0;
    for (const auto& s : batch) {
        auto f = model_forward(m, plane_to_tensor<double>(s.x));
        for (std::size_t i = 0; i < s.r.size(); ++i) {
            const double d = s.r.values()[i] - f.values()[i];
            want += d * d;
        }
    }
    want /= 2.0 * static_cast<double>(batch.size());
    CHECK(batch_loss(m, batch) == doctest::Approx(want).epsilon(1e-12));
    std::vector<double> per(batch.size());
    CHECK(loss_and_grad(m, batch, per, 2) == doctest::Approx(want).epsilon(1e-12));
    double sum = 0.0;
    for (double p : per) sum += p;
    CHECK(sum / batch.size() == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("micro-batching does not change the gradient") {
    const auto batch = toy_samples(7, 8, 4);
    MssrModel<double> a(ModelConfig{3, 1, 2, 4});
    init_he(a, 2);
    MssrModel<double> b = a;
    loss_and_grad(a, batch, {}, 1);
    loss_and_grad(b, batch, {}, 16);
    const auto ga = flatten_gradients(a);
    const auto gb = flatten_gradients(b);
    for (std::size_t i = 0; i < ga.size(); ++i) CHECK(ga[i] == doctest::Approx(gb[i]).epsilon(1e-10));
}

TEST_CASE("training loss gradient matches finite differences") {
    GradCheckOptions opt;
    opt.run_tensor = false;
    opt.run_model = false;
    opt.model = ModelConfig{3, 1, 2, 3};
    opt.input_size = 6;
    const auto report = run_grad_check(opt);
    REQUIRE_FALSE(report.entries.empty());
    CHECK(report.passed());
}

TEST_CASE("learning rate schedule") {
    TrainConfig cfg;
    CHECK(lr_schedule(0, cfg) == 1e-4);
    CHECK(lr_schedule(79, cfg) == 1e-4);
    CHECK(lr_schedule(80, cfg) == doctest::Approx(1e-5));
    CHECK(lr_schedule(99, cfg) == doctest::Approx(1e-5));
}

TEST_CASE("training configuration validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lr_drop_epoch = 101;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = TrainConfig{};
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
    cfg = TrainConfig{};
    cfg.initial_lr = -1;
    CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("training writes checkpoints and a log, deterministically") {
    fixture::TempDir dir("train");
    const auto data = toy_samples(10, 8, 6);
    TrainConfig cfg;
    cfg.batch_size = 4;
    cfg.total_epochs = 3;
    cfg.lr_drop_epoch = 2;
    cfg.initial_lr = 1e-3;
    cfg.record_timing = false;
    auto run = [&](const std::string& sub) {
        MssrModel<float> m(ModelConfig{3, 1, 2, 4});
        init_he(m, cfg.seed);
        return train(m, data, cfg, dir / sub);
    };
    const auto report = run("a");
    run("b");
    CHECK(report.epochs.size() == 3);
    CHECK(report.iterations == 9);
    CHECK(report.epochs[2].lr == doctest::Approx(1e-4));
    CHECK(report.final_loss_by_scale.size() == 3);
    for (std::size_t e = 1; e <= 3; ++e) {
        CHECK(std::filesystem::exists(checkpoint_path(dir / "a", e)));
        CHECK(slurp(checkpoint_path(dir / "a", e)) == slurp(checkpoint_path(dir / "b", e)));
    }
    const std::string log = slurp(dir / "a" / kTrainLogName);
    CHECK(log == slurp(dir / "b" / kTrainLogName));
    CHECK(log.rfind(std::string(kTrainLogHeader) + "\n", 0) == 0);
    CHECK(std::count(log.begin(), log.end(), '\n') == 4);
    CHECK(load_model(checkpoint_path(dir / "a", 3)).config == ModelConfig{3, 1, 2, 4});
}

TEST_CASE("training fails early on an unwritable checkpoint directory") {
    fixture::TempDir dir("train_bad");
    std::ofstream(dir / "file") << "x";
    MssrModel<float> m(ModelConfig{3, 1, 1, 2});
    TrainConfig cfg;
    cfg.total_epochs = 1;
    cfg.lr_drop_epoch = 1;
    CHECK_THROWS_AS(train(m, toy_samples(2, 6, 1), cfg, dir / "file" / "sub"), IoError);
    CHECK_THROWS_AS(train(m, {}, cfg, dir / "ok"), ArgumentError);
}

TEST_CASE("a small network overfits a few samples") {
    const auto data = toy_samples(4, 10, 8);
    MssrModel<float> m(ModelConfig{9, 2, 2, 8});
    init_he(m, 0);
    TrainConfig cfg;
    cfg.initial_lr = 1e-3;
    AdamState<float> state(parameter_count(m), cfg);
    const double initial = batch_loss(m, data);
    for (int it = 0; it < 150; ++it) {
        loss_and_grad(m, data);
        adam_step(m, state);
    }
    CHECK(batch_loss(m, data) < initial / 5);
}
