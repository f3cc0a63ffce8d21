#include "mssr/conv.hpp"

#include <algorithm>
#include <string>

#include "mssr/errors.hpp"

namespace mssr {

template <typename T>
ConvLayer<T>::ConvLayer(std::size_t in, std::size_t out)
    : in_channels(in),
      out_channels(out),
      weights(out * in * kKernelArea, T(0)),
      bias(out, T(0)),
      grad_weights(out * in * kKernelArea, T(0)),
      grad_bias(out, T(0)) {
    if (in == 0 || out == 0) {
        throw ShapeError("ConvLayer: channel counts must be >= 1");
    }
}

template <typename T>
void ConvLayer<T>::zero_grad() {
    std::fill(grad_weights.begin(), grad_weights.end(), T(0));
    std::fill(grad_bias.begin(), grad_bias.end(), T(0));
}

namespace {

template <typename T>
void check_input(const Tensor4<T>& input, const ConvLayer<T>& layer, const char* op) {
    if (input.channels() != layer.in_channels) {
        throw ShapeError(std::string(op) + ": input " + to_string(input.shape()) + " does not match layer [" +
                         std::to_string(layer.out_channels) + "x" + std::to_string(layer.in_channels) + "x3x3]");
    }
}

template <typename T>
Shape4 output_shape(const Tensor4<T>& input, const ConvLayer<T>& layer) {
    return {input.batch(), layer.out_channels, input.height(), input.width()};
}

// Column range [x0, x1) for which x + dx - 1 stays inside [0, W).
inline void valid_span(std::size_t d, std::size_t n, std::size_t& lo, std::size_t& hi) {
    lo = d == 0 ? 1 : 0;
    hi = d == 2 ? (n > 0 ? n - 1 : 0) : n;
    if (lo > hi) {
        lo = hi;
    }
}

}  // namespace

// Every output element is reduced in the fixed order (c, ky, kx), so results
// do not depend on how output channels are split across threads.
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const ConvLayer<T>& layer) {
    check_input(input, layer, "conv2d_forward");
    Tensor4<T> out(output_shape(input, layer));
    const std::size_t H = input.height();
    const std::size_t W = input.width();
    const std::size_t C = layer.in_channels;
    const std::size_t O = layer.out_channels;
    const std::size_t B = input.batch();

#pragma omp parallel for collapse(2) schedule(static) if (O * H * W * C > 16384)
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t o = 0; o < O; ++o) {
            T* dst = out.plane(b, o);
            std::fill(dst, dst + H * W, layer.bias[o]);
            for (std::size_t c = 0; c < C; ++c) {
                const T* src = input.plane(b, c);
                for (std::size_t ky = 0; ky < kKernelSize; ++ky) {
                    std::size_t y0, y1;
                    valid_span(ky, H, y0, y1);
                    for (std::size_t kx = 0; kx < kKernelSize; ++kx) {
                        const T w = layer.weights[layer.weight_index(o, c, ky, kx)];
                        std::size_t x0, x1;
                        valid_span(kx, W, x0, x1);
                        for (std::size_t y = y0; y < y1; ++y) {
                            const T* s = src + (y + ky - 1) * W;
                            T* d = dst + y * W;
                            for (std::size_t x = x0; x < x1; ++x) {
                                d[x] += w * s[x + kx - 1];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
void conv2d_backward_params(const Tensor4<T>& input, ConvLayer<T>& layer, const Tensor4<T>& grad_output) {
    check_input(input, layer, "conv2d_backward");
    require_same_shape(output_shape(input, layer), grad_output.shape(), "conv2d_backward");
    const std::size_t H = input.height();
    const std::size_t W = input.width();
    const std::size_t C = layer.in_channels;
    const std::size_t O = layer.out_channels;
    const std::size_t B = input.batch();

#pragma omp parallel for schedule(static) if (O * H * W * C > 16384)
    for (std::size_t o = 0; o < O; ++o) {
        T gb = T(0);
        for (std::size_t b = 0; b < B; ++b) {
            const T* g = grad_output.plane(b, o);
            for (std::size_t i = 0; i < H * W; ++i) {
                gb += g[i];
            }
        }
        layer.grad_bias[o] += gb;
        for (std::size_t c = 0; c < C; ++c) {
            for (std::size_t ky = 0; ky < kKernelSize; ++ky) {
                std::size_t y0, y1;
                valid_span(ky, H, y0, y1);
                for (std::size_t kx = 0; kx < kKernelSize; ++kx) {
                    std::size_t x0, x1;
                    valid_span(kx, W, x0, x1);
                    T acc = T(0);
                    for (std::size_t b = 0; b < B; ++b) {
                        const T* g = grad_output.plane(b, o);
                        const T* src = input.plane(b, c);
                        for (std::size_t y = y0; y < y1; ++y) {
                            const T* s = src + (y + ky - 1) * W;
                            const T* gr = g + y * W;
                            for (std::size_t x = x0; x < x1; ++x) {
                                acc += gr[x] * s[x + kx - 1];
                            }
                        }
                    }
                    layer.grad_weights[layer.weight_index(o, c, ky, kx)] += acc;
                }
            }
        }
    }
}

template <typename T>
Tensor4<T> conv2d_backward(const Tensor4<T>& input, ConvLayer<T>& layer, const Tensor4<T>& grad_output) {
    conv2d_backward_params(input, layer, grad_output);

    const std::size_t H = input.height();
    const std::size_t W = input.width();
    const std::size_t C = layer.in_channels;
    const std::size_t O = layer.out_channels;
    const std::size_t B = input.batch();
    Tensor4<T> grad_input(input.shape());

    // grad_in[c, y + ky - 1, x + kx - 1] += w[o, c, ky, kx] * g[o, y, x]
#pragma omp parallel for collapse(2) schedule(static) if (O * H * W * C > 16384)
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t c = 0; c < C; ++c) {
            T* dst = grad_input.plane(b, c);
            for (std::size_t o = 0; o < O; ++o) {
                const T* g = grad_output.plane(b, o);
                for (std::size_t ky = 0; ky < kKernelSize; ++ky) {
                    std::size_t y0, y1;
                    valid_span(ky, H, y0, y1);
                    for (std::size_t kx = 0; kx < kKernelSize; ++kx) {
                        const T w = layer.weights[layer.weight_index(o, c, ky, kx)];
                        std::size_t x0, x1;
                        valid_span(kx, W, x0, x1);
                        for (std::size_t y = y0; y < y1; ++y) {
                            T* d = dst + (y + ky - 1) * W;
                            const T* gr = g + y * W;
                            for (std::size_t x = x0; x < x1; ++x) {
                                d[x + kx - 1] += w * gr[x];
                            }
                        }
                    }
                }
            }
        }
    }
    return grad_input;
}

template struct ConvLayer<float>;
template struct ConvLayer<double>;

template Tensor4<float> conv2d_forward(const Tensor4<float>&, const ConvLayer<float>&);
template Tensor4<double> conv2d_forward(const Tensor4<double>&, const ConvLayer<double>&);
template Tensor4<float> conv2d_backward(const Tensor4<float>&, ConvLayer<float>&, const Tensor4<float>&);
template Tensor4<double> conv2d_backward(const Tensor4<double>&, ConvLayer<double>&, const Tensor4<double>&);
template void conv2d_backward_params(const Tensor4<float>&, ConvLayer<float>&, const Tensor4<float>&);
template void conv2d_backward_params(const Tensor4<double>&, ConvLayer<double>&, const Tensor4<double>&);

}  // namespace mssr
