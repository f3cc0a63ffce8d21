#pragma once

#include <cstdint>
#include <vector>

#include "mssr/image.hpp"

namespace mssr {

struct QualityScore {
    double psnr = 0.0;  // dB, +infinity for identical images
    double ssim = 0.0;
};

/// round(v * 255) with halves away from zero, clamped to [0, 255].
std::uint8_t quantize_8bit(double v);
std::vector<std::uint8_t> quantize_8bit(const ImagePlane& img);

/// PSNR of the 8-bit quantized planes. Returns +infinity when they match.
/// Throws ShapeError on a size mismatch.
double psnr(const ImagePlane& a, const ImagePlane& b);

/// Mean SSIM of the 8-bit quantized planes: 11x11 Gaussian window
/// (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255, windows fully inside the image.
/// Throws ArgumentError when either side is below 11 pixels.
double ssim(const ImagePlane& a, const ImagePlane& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

QualityScore quality(const ImagePlane& a, const ImagePlane& b);

}  // namespace mssr
