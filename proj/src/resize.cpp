#include "mssr/resize.hpp"

#include <algorithm>
#include <cmath>

#include "mssr/errors.hpp"

namespace mssr {

double cubic_kernel(double x) {
    const double ax = std::abs(x);
    const double ax2 = ax * ax;
    const double ax3 = ax2 * ax;
    if (ax <= 1.0) {
        return 1.5 * ax3 - 2.5 * ax2 + 1.0;
    }
    if (ax <= 2.0) {
        return -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0;
    }
    return 0.0;
}

ResampleWeights bicubic_weights(std::size_t in_len, std::size_t out_len) {
    if (in_len == 0 || out_len == 0) {
        throw ArgumentError("bicubic_weights: lengths must be >= 1");
    }
    const double scale = static_cast<double>(out_len) / static_cast<double>(in_len);
    const bool antialias = scale < 1.0;
    const double kernel_width = antialias ? 4.0 / scale : 4.0;

    ResampleWeights rw;
    rw.taps = static_cast<std::size_t>(std::ceil(kernel_width)) + 2;
    rw.indices.resize(out_len * rw.taps);
    rw.weights.resize(out_len * rw.taps);

    for (std::size_t i = 0; i < out_len; ++i) {
        // Input coordinate (1-based) whose footprint aligns with output pixel i + 1.
        const double u = static_cast<double>(i + 1) / scale + 0.5 * (1.0 - 1.0 / scale);
        const double left = std::floor(u - kernel_width / 2.0);
        double sum = 0.0;
        for (std::size_t k = 0; k < rw.taps; ++k) {
            const double idx = left + static_cast<double>(k);
            const double w = antialias ? scale * cubic_kernel(scale * (u - idx)) : cubic_kernel(u - idx);
            rw.weights[i * rw.taps + k] = w;
            sum += w;
            const double clamped = std::clamp(idx, 1.0, static_cast<double>(in_len));
            rw.indices[i * rw.taps + k] = static_cast<std::size_t>(clamped) - 1;
        }
        for (std::size_t k = 0; k < rw.taps; ++k) {
            rw.weights[i * rw.taps + k] /= sum;
        }
    }
    return rw;
}

namespace {

ImagePlane resize_rows(const ImagePlane& img, std::size_t out_h) {
    const auto rw = bicubic_weights(img.height(), out_h);
    ImagePlane out(out_h, img.width());
    for (std::size_t y = 0; y < out_h; ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < rw.taps; ++k) {
                acc += rw.weights[y * rw.taps + k] * img(rw.indices[y * rw.taps + k], x);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

ImagePlane resize_cols(const ImagePlane& img, std::size_t out_w) {
    const auto rw = bicubic_weights(img.width(), out_w);
    ImagePlane out(img.height(), out_w);
    for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < rw.taps; ++k) {
                acc += rw.weights[x * rw.taps + k] * img(y, rw.indices[x * rw.taps + k]);
            }
            out(y, x) = acc;
        }
    }
    return out;
}

}  // namespace

ImagePlane bicubic_resize(const ImagePlane& img, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) {
        throw ArgumentError("bicubic_resize: output dimensions must be >= 1");
    }
    const double scale_h = static_cast<double>(out_h) / static_cast<double>(img.height());
    const double scale_w = static_cast<double>(out_w) / static_cast<double>(img.width());
    ImagePlane out = scale_h <= scale_w ? resize_cols(resize_rows(img, out_h), out_w)
                                        : resize_rows(resize_cols(img, out_w), out_h);
    for (double& v : out.values()) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

}  // namespace mssr
