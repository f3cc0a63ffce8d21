#include "mssr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mssr/conv.hpp"
#include "mssr/trainer.hpp"

namespace mssr {

double GradCheckReport::worst() const {
    double w = 0.0;
    for (const auto& e : entries) {
        w = std::max(w, e.max_rel_error);
    }
    return w;
}

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

namespace {

using Rng = std::mt19937_64;

Tensor4<double> random_tensor(Shape4 shape, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor4<double> t(shape);
    for (double& v : t.values()) v = dist(rng);
    return t;
}

void randomize(ConvLayer<double>& layer, Rng& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(layer.in_channels * 9)));
    for (double& w : layer.weights) w = dist(rng);
    for (double& b : layer.bias) b = 0.1 * dist(rng);
}

void corrupt(ConvLayer<double>& layer, InjectedBug bug) {
    if (bug == InjectedBug::bias) {
        layer.grad_bias[0] = 1.5 * layer.grad_bias[0] + 1e-3;
    } else if (bug == InjectedBug::weight) {
        layer.grad_weights[0] = 1.5 * layer.grad_weights[0] + 1e-3;
    }
}

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t max_coords, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (max_coords == 0 || max_coords >= n) {
        return idx;
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_coords);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double& param_at(ConvLayer<double>& layer, std::size_t i) {
    return i < layer.weights.size() ? layer.weights[i] : layer.bias[i - layer.weights.size()];
}

double grad_at(const ConvLayer<double>& layer, std::size_t i) {
    return i < layer.weights.size() ? layer.grad_weights[i] : layer.grad_bias[i - layer.weights.size()];
}

std::vector<std::uint8_t> relu_mask(const ForwardTrace<double>& trace) {
    std::vector<std::uint8_t> mask;
    // The last activation is the linear reconstruction output.
    for (std::size_t k = 0; k + 1 < trace.activations.size(); ++k) {
        for (double v : trace.activations[k].values()) mask.push_back(v > 0.0);
    }
    return mask;
}

struct Probe {
    double loss = 0.0;
    std::vector<std::uint8_t> mask;
};

// Checks every (or a sample of every) parameter of every model layer against
// central differences of `probe`, which evaluates the loss at the current
// parameters. Coordinates whose stencil changes the ReLU mask are skipped.
template <typename ProbeFn>
void compare_layers(MssrModel<double>& model, ProbeFn&& probe, const GradCheckOptions& opt, const std::string& suite,
                    Rng& rng, GradCheckReport& report) {
    const auto base = probe();
    auto layers = model.layers();
    const std::size_t per_block = model.config.n_long;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        ConvLayer<double>& layer = *layers[li];
        GradCheckEntry entry;
        entry.suite = suite;
        if (li < per_block) {
            entry.name = "block1.conv" + std::to_string(li + 1);
        } else if (li < 2 * per_block) {
            entry.name = "block2.conv" + std::to_string(li - per_block + 1);
        } else {
            entry.name = "recon.conv" + std::to_string(li - 2 * per_block + 1);
        }
        for (std::size_t i : pick_coords(layer.parameter_count(), opt.max_coords_per_layer, rng)) {
            double& p = param_at(layer, i);
            const double saved = p;
            p = saved + opt.step;
            const auto plus = probe();
            p = saved - opt.step;
            const auto minus = probe();
            p = saved;
            if (plus.mask != base.mask || minus.mask != base.mask) {
                ++entry.skipped;
                continue;
            }
            const double numeric = (plus.loss - minus.loss) / (2.0 * opt.step);
            entry.max_rel_error =
                std::max(entry.max_rel_error, relative_error(grad_at(layer, i), numeric, opt.error_floor));
            ++entry.checked;
        }
        report.entries.push_back(entry);
    }
}

void check_conv(const GradCheckOptions& opt, Rng& rng, GradCheckReport& report) {
    ConvLayer<double> layer(2, 3);
    randomize(layer, rng);
    Tensor4<double> input = random_tensor({1, 2, 5, 5}, rng, -1.0, 1.0);

    auto loss = [&]() {
        const auto out = conv2d_forward(input, layer);
        double l = 0.0;
        for (double v : out.values()) l += 0.5 * v * v;
        return l;
    };
    const auto out = conv2d_forward(input, layer);
    layer.zero_grad();
    const auto grad_input = conv2d_backward(input, layer, out);  // dL/dout = out
    corrupt(layer, opt.inject);

    GradCheckEntry params{"tensor_core", "conv2d weights+bias", 0.0, 0, 0};
    for (std::size_t i = 0; i < layer.parameter_count(); ++i) {
        double& p = param_at(layer, i);
        const double saved = p;
        p = saved + opt.step;
        const double lp = loss();
        p = saved - opt.step;
        const double lm = loss();
        p = saved;
        params.max_rel_error = std::max(
            params.max_rel_error, relative_error(grad_at(layer, i), (lp - lm) / (2.0 * opt.step), opt.error_floor));
        ++params.checked;
    }
    report.entries.push_back(params);

    GradCheckEntry inputs{"tensor_core", "conv2d input", 0.0, 0, 0};
    for (std::size_t i = 0; i < input.size(); ++i) {
        double& v = input.values()[i];
        const double saved = v;
        v = saved + opt.step;
        const double lp = loss();
        v = saved - opt.step;
        const double lm = loss();
        v = saved;
        inputs.max_rel_error = std::max(
            inputs.max_rel_error,
            relative_error(grad_input.values()[i], (lp - lm) / (2.0 * opt.step), opt.error_floor));
        ++inputs.checked;
    }
    report.entries.push_back(inputs);
}

void check_relu(const GradCheckOptions& opt, Rng& rng, GradCheckReport& report) {
    Tensor4<double> input({1, 2, 4, 4});
    std::uniform_real_distribution<double> mag(1e-3, 1.0);
    std::bernoulli_distribution sign(0.5);
    for (double& v : input.values()) v = sign(rng) ? mag(rng) : -mag(rng);
    const Tensor4<double> weights = random_tensor(input.shape(), rng, -1.0, 1.0);

    auto loss = [&]() {
        const auto out = relu_forward(input);
        double l = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) l += weights.values()[i] * out.values()[i];
        return l;
    };
    const auto grad = relu_backward(input, weights);

    GradCheckEntry entry{"tensor_core", "relu input", 0.0, 0, 0};
    for (std::size_t i = 0; i < input.size(); ++i) {
        double& v = input.values()[i];
        const double saved = v;
        if (std::abs(saved) <= opt.step) {
            ++entry.skipped;
            continue;
        }
        v = saved + opt.step;
        const double lp = loss();
        v = saved - opt.step;
        const double lm = loss();
        v = saved;
        entry.max_rel_error = std::max(
            entry.max_rel_error, relative_error(grad.values()[i], (lp - lm) / (2.0 * opt.step), opt.error_floor));
        ++entry.checked;
    }
    report.entries.push_back(entry);
}

void check_model(const GradCheckOptions& opt, Rng& rng, GradCheckReport& report) {
    MssrModel<double> model(opt.model);
    init_he(model, rng());
    for (auto* l : model.layers()) {
        std::normal_distribution<double> bias(0.0, 0.05);
        for (double& b : l->bias) b = bias(rng);
    }
    const Shape4 shape{1, 1, opt.input_size, opt.input_size};
    const auto x = random_tensor(shape, rng, 0.0, 1.0);
    const auto target = random_tensor(shape, rng, -0.5, 0.5);

    auto probe = [&]() {
        const auto trace = model_forward_traced(model, x);
        double l = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double d = trace.residual().values()[i] - target.values()[i];
            l += 0.5 * d * d;
        }
        return Probe{l, relu_mask(trace)};
    };

    model.zero_grad();
    const auto trace = model_forward_traced(model, x);
    Tensor4<double> grad(shape);
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad.values()[i] = trace.residual().values()[i] - target.values()[i];
    }
    model_backward(model, trace, grad);
    corrupt(*model.layers().front(), opt.inject);
    compare_layers(model, probe, opt, "model", rng, report);
}

void check_trainer(const GradCheckOptions& opt, Rng& rng, GradCheckReport& report) {
    ModelConfig cfg = opt.model;
    cfg.width = std::min<std::size_t>(cfg.width, 4);
    MssrModel<double> model(cfg);
    init_he(model, rng());

    std::vector<TrainSample> batch;
    std::uniform_real_distribution<double> xs(0.0, 1.0);
    std::uniform_real_distribution<double> rs(-0.1, 0.1);
    const std::size_t S = std::max<std::size_t>(opt.input_size - 1, 1);
    for (std::size_t b = 0; b < std::max<std::size_t>(opt.batch, 1); ++b) {
        TrainSample s{ImagePlane(S, S), ImagePlane(S, S), static_cast<int>(2 + b % 3)};
        for (double& v : s.x.values()) v = xs(rng);
        for (double& v : s.r.values()) v = rs(rng);
        batch.push_back(std::move(s));
    }
    Tensor4<double> x({batch.size(), 1, S, S});
    Tensor4<double> r({batch.size(), 1, S, S});
    for (std::size_t b = 0; b < batch.size(); ++b) {
        std::copy(batch[b].x.values().begin(), batch[b].x.values().end(), x.plane(b, 0));
        std::copy(batch[b].r.values().begin(), batch[b].r.values().end(), r.plane(b, 0));
    }
    auto probe = [&]() {
        const auto trace = model_forward_traced(model, x);
        double l = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double d = r.values()[i] - trace.residual().values()[i];
            l += d * d;
        }
        return Probe{l / (2.0 * static_cast<double>(batch.size())), relu_mask(trace)};
    };

    model.zero_grad();
    // Micro-batch of 2 so gradient accumulation across passes is exercised too.
    loss_and_grad(model, std::span<const TrainSample>(batch), {}, 2);
    corrupt(*model.layers().front(), opt.inject);
    compare_layers(model, probe, opt, "trainer", rng, report);
}

}  // namespace

GradCheckReport check_model_gradients(const GradCheckOptions& options) {
    GradCheckReport report;
    report.tolerance = options.tolerance;
    Rng rng(options.seed);
    check_model(options, rng, report);
    return report;
}

GradCheckReport run_grad_check(const GradCheckOptions& options) {
    GradCheckReport report;
    report.tolerance = options.tolerance;
    Rng rng(options.seed);
    if (options.run_tensor) {
        check_conv(options, rng, report);
        check_relu(options, rng, report);
    }
    if (options.run_model) {
        check_model(options, rng, report);
    }
    if (options.run_trainer) {
        check_trainer(options, rng, report);
    }
    return report;
}

}  // namespace mssr
