#pragma once

#include <cstddef>
#include <vector>

#include "mssr/image.hpp"

namespace mssr {

/// Keys cubic convolution kernel with a = -0.5.
double cubic_kernel(double x);

/// Sparse 1-D resampling weights: output sample i reads input
/// `indices[i * taps + k]` with weight `weights[i * taps + k]`.
struct ResampleWeights {
    std::size_t taps = 0;
    std::vector<std::size_t> indices;
    std::vector<double> weights;
};

/// Weights for resizing a line of `in_len` samples to `out_len`. Downscaling
/// stretches the kernel by in/out (antialiasing). Out-of-range taps are
/// clamped to the nearest edge sample. Each output's weights sum to one.
ResampleWeights bicubic_weights(std::size_t in_len, std::size_t out_len);

/// Separable bicubic resize. The dimension with the smaller scale ratio is
/// processed first (height first on ties). Output is clipped to [0, 1].
ImagePlane bicubic_resize(const ImagePlane& img, std::size_t out_h, std::size_t out_w);

}  // namespace mssr
