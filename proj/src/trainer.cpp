#include "mssr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "mssr/errors.hpp"
#include "mssr/model_io.hpp"

namespace mssr {

void TrainConfig::validate() const {
    if (batch_size == 0 || total_epochs == 0 || lr_drop_epoch == 0 || micro_batch == 0) {
        throw ArgumentError("train config: batch size, epochs, lr drop epoch and micro batch must be positive");
    }
    if (!(initial_lr > 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0) ||
        weight_decay < 0.0) {
        throw ArgumentError("train config: optimizer constants out of range");
    }
    if (lr_drop_epoch > total_epochs) {
        throw ArgumentError("train config: lr_drop_epoch (" + std::to_string(lr_drop_epoch) +
                            ") exceeds total_epochs (" + std::to_string(total_epochs) + ")");
    }
}

template <typename T>
AdamState<T>::AdamState(std::size_t parameter_count, const TrainConfig& cfg)
    : m(parameter_count, T(0)),
      v(parameter_count, T(0)),
      lr(cfg.initial_lr),
      beta1(cfg.beta1),
      beta2(cfg.beta2),
      epsilon(cfg.epsilon),
      weight_decay(cfg.weight_decay) {}

namespace {

void check_batch(std::span<const TrainSample> batch) {
    if (batch.empty()) {
        throw ArgumentError("loss_and_grad: empty batch");
    }
    const ImagePlane& ref = batch.front().x;
    for (const auto& s : batch) {
        if (!s.x.same_size(ref) || !s.r.same_size(ref)) {
            throw ShapeError("loss_and_grad: samples in a batch must share one patch size (" +
                             std::to_string(ref.height()) + "x" + std::to_string(ref.width()) + " vs " +
                             std::to_string(s.x.height()) + "x" + std::to_string(s.x.width()) + "/" +
                             std::to_string(s.r.height()) + "x" + std::to_string(s.r.width()) + ")");
        }
    }
}

template <typename T>
Tensor4<T> stack(std::span<const TrainSample> samples, bool residual) {
    const std::size_t H = samples.front().x.height();
    const std::size_t W = samples.front().x.width();
    Tensor4<T> t({samples.size(), 1, H, W});
    for (std::size_t b = 0; b < samples.size(); ++b) {
        const auto src = residual ? samples[b].r.values() : samples[b].x.values();
        std::copy(src.begin(), src.end(), t.plane(b, 0));
    }
    return t;
}

}  // namespace

template <typename T>
double loss_and_grad(MssrModel<T>& model, std::span<const TrainSample> batch, std::span<double> per_sample,
                     std::size_t micro_batch) {
    check_batch(batch);
    if (!per_sample.empty() && per_sample.size() != batch.size()) {
        throw ArgumentError("loss_and_grad: per-sample output has the wrong length");
    }
    micro_batch = std::max<std::size_t>(micro_batch, 1);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (std::size_t start = 0; start < batch.size(); start += micro_batch) {
        const auto chunk = batch.subspan(start, std::min(micro_batch, batch.size() - start));
        const auto x = stack<T>(chunk, false);
        const auto r = stack<T>(chunk, true);
        const auto trace = model_forward_traced(model, x);
        const auto& f = trace.residual();
        Tensor4<T> grad(f.shape());
        const std::size_t plane = f.height() * f.width();
        for (std::size_t b = 0; b < chunk.size(); ++b) {
            double sse = 0.0;
            for (std::size_t i = b * plane; i < (b + 1) * plane; ++i) {
                const double d = static_cast<double>(f.data()[i]) - static_cast<double>(r.data()[i]);
                sse += d * d;
                grad.data()[i] = static_cast<T>(d * inv_b);
            }
            if (!per_sample.empty()) {
                per_sample[start + b] = 0.5 * sse;
            }
            total += 0.5 * sse;
        }
        model_backward(model, trace, grad);
    }
    return total * inv_b;
}

template <typename T>
double batch_loss(const MssrModel<T>& model, std::span<const TrainSample> batch) {
    check_batch(batch);
    double total = 0.0;
    for (const auto& s : batch) {
        const auto f = model_forward(model, plane_to_tensor<T>(s.x));
        for (std::size_t i = 0; i < s.r.size(); ++i) {
            const double d = static_cast<double>(f.data()[i]) - s.r.values()[i];
            total += 0.5 * d * d;
        }
    }
    return total / static_cast<double>(batch.size());
}

template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t t,
                 double lr, double beta1, double beta2, double epsilon, double weight_decay) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
        throw ShapeError("adam_update: parameter, gradient and moment arrays differ in length");
    }
    if (t == 0) {
        throw ArgumentError("adam_update: step number is 1-based");
    }
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = static_cast<double>(grads[i]) + weight_decay * static_cast<double>(params[i]);
        const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * g;
        const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * g * g;
        m[i] = static_cast<T>(mi);
        v[i] = static_cast<T>(vi);
        params[i] = static_cast<T>(static_cast<double>(params[i]) - lr * (mi / c1) / (std::sqrt(vi / c2) + epsilon));
    }
}

template <typename T>
void adam_step(MssrModel<T>& model, AdamState<T>& state) {
    if (!model.grads_ready) {
        throw ContractError("adam_step: gradients were not populated by a backward pass");
    }
    if (state.m.size() != parameter_count(model) || state.v.size() != state.m.size()) {
        throw ShapeError("adam_step: optimizer state does not match the model's parameter count");
    }
    ++state.t;
    std::size_t offset = 0;
    for (auto* l : model.layers()) {
        auto mw = std::span<T>(state.m).subspan(offset, l->weights.size());
        auto vw = std::span<T>(state.v).subspan(offset, l->weights.size());
        adam_update<T>(l->weights, l->grad_weights, mw, vw, state.t, state.lr, state.beta1, state.beta2,
                       state.epsilon, state.weight_decay);
        offset += l->weights.size();
        auto mb = std::span<T>(state.m).subspan(offset, l->bias.size());
        auto vb = std::span<T>(state.v).subspan(offset, l->bias.size());
        adam_update<T>(l->bias, l->grad_bias, mb, vb, state.t, state.lr, state.beta1, state.beta2, state.epsilon,
                       state.weight_decay);
        offset += l->bias.size();
    }
    model.zero_grad();
    ++model.revision;
}

double lr_schedule(std::size_t epoch, const TrainConfig& config) {
    return epoch < config.lr_drop_epoch ? config.initial_lr : config.initial_lr / 10.0;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch) {
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%04zu.mssr", epoch);
    return dir / name;
}

template <typename T>
TrainReport train(MssrModel<T>& model, const std::vector<TrainSample>& dataset, const TrainConfig& config,
                  const std::filesystem::path& checkpoint_dir, std::ostream* progress) {
    config.validate();
    if (dataset.empty()) {
        throw ArgumentError("train: empty dataset");
    }
    std::error_code ec;
    std::filesystem::create_directories(checkpoint_dir, ec);
    std::ofstream log(checkpoint_dir / kTrainLogName, std::ios::trunc);
    if (!log) {
        throw IoError("train: cannot write to checkpoint directory " + checkpoint_dir.string());
    }
    log << kTrainLogHeader << '\n';
    log.flush();

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<TrainSample> batch;
    batch.reserve(config.batch_size);
    std::vector<double> per_sample;

    AdamState<T> state(parameter_count(model), config);
    model.zero_grad();
    TrainReport report;

    for (std::size_t epoch = 0; epoch < config.total_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        state.lr = lr_schedule(epoch, config);
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_total = 0.0;
        std::map<int, std::pair<double, std::size_t>> by_scale;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t n = std::min(config.batch_size, order.size() - start);
            batch.clear();
            for (std::size_t i = 0; i < n; ++i) {
                batch.push_back(dataset[order[start + i]]);
            }
            per_sample.assign(n, 0.0);
            loss_and_grad(model, std::span<const TrainSample>(batch), std::span<double>(per_sample),
                          config.micro_batch);
            adam_step(model, state);
            ++report.iterations;
            for (std::size_t i = 0; i < n; ++i) {
                epoch_total += per_sample[i];
                auto& acc = by_scale[batch[i].scale];
                acc.first += per_sample[i];
                ++acc.second;
            }
        }

        const double seconds =
            config.record_timing
                ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                : 0.0;
        EpochStats stats{epoch + 1, epoch_total / static_cast<double>(dataset.size()), state.lr, seconds};
        report.epochs.push_back(stats);
        report.final_loss_by_scale.clear();
        for (const auto& [scale, acc] : by_scale) {
            report.final_loss_by_scale[scale] = acc.first / static_cast<double>(acc.second);
        }

        save_model(model, checkpoint_path(checkpoint_dir, epoch + 1));
        char line[160];
        std::snprintf(line, sizeof(line), "%zu,%.10g,%.6g,%.3f", stats.epoch, stats.mean_loss, stats.lr,
                      stats.seconds);
        log << line << '\n';
        log.flush();
        if (progress) {
            *progress << "epoch " << stats.epoch << "/" << config.total_epochs << "  loss " << stats.mean_loss
                      << "  lr " << stats.lr << '\n';
        }
    }
    if (!log) {
        throw IoError("train: failed writing the training log");
    }
    return report;
}

template struct AdamState<float>;
template struct AdamState<double>;

#define MSSR_INSTANTIATE(T)                                                                                     \
    template double loss_and_grad(MssrModel<T>&, std::span<const TrainSample>, std::span<double>, std::size_t); \
    template double batch_loss(const MssrModel<T>&, std::span<const TrainSample>);                             \
    template void adam_update(std::span<T>, std::span<const T>, std::span<T>, std::span<T>, std::uint64_t,      \
                              double, double, double, double, double);                                         \
    template void adam_step(MssrModel<T>&, AdamState<T>&);                                                     \
    template TrainReport train(MssrModel<T>&, const std::vector<TrainSample>&, const TrainConfig&,              \
                               const std::filesystem::path&, std::ostream*);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)

#undef MSSR_INSTANTIATE

}  // namespace mssr
