#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "mssr/image.hpp"
#include "mssr/model.hpp"

namespace mssr {

/// One training pair: interpolated LR luminance `x` and residual `r` = HR - x.
struct TrainSample {
    ImagePlane x;
    ImagePlane r;
    int scale = 2;
};

struct TrainConfig {
    std::size_t batch_size = 64;
    double initial_lr = 1e-4;
    std::size_t lr_drop_epoch = 80;
    std::size_t total_epochs = 100;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;
    std::uint64_t seed = 0;
    /// Samples per forward/backward pass inside a batch; bounds activation memory.
    std::size_t micro_batch = 16;
    /// When false the `seconds` column of the training log is written as 0,
    /// which makes the log byte-reproducible.
    bool record_timing = true;

    /// Throws ArgumentError on non-positive values or lr_drop_epoch > total_epochs.
    void validate() const;
};

template <typename T>
struct AdamState {
    std::vector<T> m;
    std::vector<T> v;
    std::uint64_t t = 0;
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-4;

    AdamState() = default;
    AdamState(std::size_t parameter_count, const TrainConfig& cfg);
};

/// L = 1/(2B) * sum_i ||r_i - F(x_i)||^2 over the batch; adds dL/dtheta into
/// the model's gradient buffers. When `per_sample` is non-empty it receives
/// each sample's 0.5 * ||r_i - F(x_i)||^2.
template <typename T>
double loss_and_grad(MssrModel<T>& model, std::span<const TrainSample> batch, std::span<double> per_sample = {},
                     std::size_t micro_batch = 16);

/// Loss only, no gradients.
template <typename T>
double batch_loss(const MssrModel<T>& model, std::span<const TrainSample> batch);

/// One Adam update on raw arrays. `t` is the 1-based step number. The L2 term
/// weight_decay * theta is added to the gradient before the moment updates.
template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v, std::uint64_t t,
                 double lr, double beta1, double beta2, double epsilon, double weight_decay);

/// Applies one Adam step from the model's gradient buffers, then zeroes them.
/// Throws ContractError if no backward pass populated the gradients.
template <typename T>
void adam_step(MssrModel<T>& model, AdamState<T>& state);

/// initial_lr before lr_drop_epoch, initial_lr / 10 from then on.
double lr_schedule(std::size_t epoch, const TrainConfig& config);

struct EpochStats {
    std::size_t epoch = 0;
    double mean_loss = 0.0;
    double lr = 0.0;
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    /// Mean per-sample loss of each scale over the last epoch.
    std::map<int, double> final_loss_by_scale;
    std::size_t iterations = 0;
};

inline constexpr const char* kTrainLogName = "train_log.csv";
inline constexpr const char* kTrainLogHeader = "epoch,mean_loss,lr,seconds";

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t epoch);

/// Shuffles the whole multi-scale set every epoch, runs loss_and_grad and
/// adam_step per batch, writes a checkpoint per epoch plus train_log.csv.
template <typename T>
TrainReport train(MssrModel<T>& model, const std::vector<TrainSample>& dataset, const TrainConfig& config,
                  const std::filesystem::path& checkpoint_dir, std::ostream* progress = nullptr);

}  // namespace mssr
