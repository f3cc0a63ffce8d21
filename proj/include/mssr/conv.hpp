#pragma once

#include <cstddef>
#include <vector>

#include "mssr/tensor.hpp"

namespace mssr {

inline constexpr std::size_t kKernelSize = 3;
inline constexpr std::size_t kKernelArea = kKernelSize * kKernelSize;

/// One 3x3 convolution, stride 1, zero padding 1.
///
/// Weights are stored as [out][in][ky][kx], row-major. Gradient buffers
/// accumulate across backward calls until `zero_grad()`.
template <typename T>
struct ConvLayer {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::vector<T> weights;
    std::vector<T> bias;
    std::vector<T> grad_weights;
    std::vector<T> grad_bias;

    ConvLayer() = default;
    ConvLayer(std::size_t in, std::size_t out);

    std::size_t weight_index(std::size_t o, std::size_t c, std::size_t ky, std::size_t kx) const {
        return ((o * in_channels + c) * kKernelSize + ky) * kKernelSize + kx;
    }
    std::size_t parameter_count() const { return weights.size() + bias.size(); }

    void zero_grad();

    template <typename U>
    ConvLayer<U> cast() const {
        ConvLayer<U> out(in_channels, out_channels);
        std::copy(weights.begin(), weights.end(), out.weights.begin());
        std::copy(bias.begin(), bias.end(), out.bias.begin());
        return out;
    }
};

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvLayer<T>& layer);

/// Returns dL/dinput and adds dL/dweights, dL/dbias into the layer buffers.
template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& input, ConvLayer<T>& layer, const Tensor4<T>& grad_output);

/// Same as conv2d_backward without computing dL/dinput (first layer of a network).
template <typename T>
void conv2d_backward_params(const Tensor4<T>& input, ConvLayer<T>& layer, const Tensor4<T>& grad_output);

extern template struct ConvLayer<float>;
extern template struct ConvLayer<double>;

}  // namespace mssr
