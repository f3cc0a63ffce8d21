#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mssr/conv.hpp"
#include "mssr/tensor.hpp"

namespace mssr {

/// Architecture hyperparameters. Defaults give the 20-layer network
/// (9-layer long path, 2-layer tap, 2 reconstruction layers, 64 filters).
struct ModelConfig {
    std::size_t n_long = 9;
    std::size_t n_short = 2;
    std::size_t n_recon = 2;
    std::size_t width = 64;

    /// Throws ArgumentError unless 1 <= n_short < n_long, n_recon >= 1, width >= 1.
    void validate() const;
    std::size_t layer_count() const { return 2 * n_long + n_recon; }
    bool operator==(const ModelConfig&) const = default;
};

/// A stack of `layers.size()` conv+ReLU layers whose output is the sum of the
/// activation after layer `tap_index` (1-based) and the final activation.
/// The short path reuses the first `tap_index` layers of the long one.
template <typename T>
struct FusionBlock {
    std::vector<ConvLayer<T>> layers;
    std::size_t tap_index = 1;
};

template <typename T>
struct MssrModel {
    ModelConfig config;
    FusionBlock<T> block1;
    FusionBlock<T> block2;
    /// conv+ReLU for all but the last layer; the last maps width -> 1 with no ReLU.
    std::vector<ConvLayer<T>> recon;

    /// Bumped whenever parameters are replaced through the library API.
    std::uint64_t revision = 0;
    /// Set by model_backward, cleared by zero_grad / an optimizer step.
    bool grads_ready = false;

    MssrModel() : MssrModel(ModelConfig{}) {}
    /// All parameters zero.
    explicit MssrModel(const ModelConfig& cfg);

    /// Layers in canonical order: block1, block2, reconstruction.
    /// Serialization and parameter flattening follow this order.
    std::vector<ConvLayer<T>*> layers();
    std::vector<const ConvLayer<T>*> layers() const;

    void zero_grad();

    template <typename U>
    MssrModel<U> cast() const {
        MssrModel<U> out(config);
        auto dst = out.layers();
        auto src = layers();
        for (std::size_t i = 0; i < src.size(); ++i) {
            *dst[i] = src[i]->template cast<U>();
        }
        return out;
    }
};

/// Activations kept by a forward pass for the matching backward pass.
template <typename T>
struct ForwardTrace {
    const void* model = nullptr;
    std::uint64_t revision = 0;
    Tensor4<T> input;
    /// Output of every executed conv layer, post-ReLU where a ReLU follows.
    /// Size is 2 * n_long + n_recon; the last entry is the predicted residual.
    std::vector<Tensor4<T>> activations;
    Tensor4<T> block1_out;
    Tensor4<T> block2_out;

    const Tensor4<T>& residual() const { return activations.back(); }
};

template <typename T>
Tensor4<T> block_forward(const FusionBlock<T>& block, const Tensor4<T>& input);

/// Predicted residual F(x) for a 1-channel input of any spatial size.
template <typename T>
Tensor4<T> model_forward(const MssrModel<T>& model, const Tensor4<T>& x);

template <typename T>
ForwardTrace<T> model_forward_traced(const MssrModel<T>& model, const Tensor4<T>& x);

/// x + F(x).
template <typename T>
Tensor4<T> restore(const MssrModel<T>& model, const Tensor4<T>& x);

/// Accumulates dL/dtheta into every layer given dL/dF(x). Shared layers get
/// the sum of the long-path and tap contributions.
template <typename T>
void model_backward(MssrModel<T>& model, const ForwardTrace<T>& trace, const Tensor4<T>& grad_residual);

struct ReceptiveFields {
    std::size_t small = 0;
    std::size_t middle = 0;
    std::size_t large = 0;
    bool operator==(const ReceptiveFields&) const = default;
};

ReceptiveFields receptive_fields(std::size_t n_short, std::size_t n_long, std::size_t n_recon);

template <typename T>
std::size_t parameter_count(const MssrModel<T>& model);

/// He-normal weights (std = sqrt(2 / (in_channels * 9))), zero biases.
template <typename T>
void init_he(MssrModel<T>& model, std::uint64_t seed);

/// Parameters in canonical order, each layer as weights then bias.
template <typename T>
std::vector<T> flatten_parameters(const MssrModel<T>& model);
template <typename T>
std::vector<T> flatten_gradients(const MssrModel<T>& model);
template <typename T>
void assign_parameters(MssrModel<T>& model, const std::vector<T>& flat);

extern template struct MssrModel<float>;
extern template struct MssrModel<double>;

}  // namespace mssr
