#pragma once

#include <filesystem>
#include <variant>

#include "mssr/image.hpp"

namespace mssr {

/// A decoded file: grayscale sources stay single-plane.
using Image = std::variant<ImagePlane, RgbImage>;

/// Reads 8-bit PNG (gray, RGB; alpha is dropped) and PGM/PPM (P2, P3, P5, P6).
/// The format is detected from the file contents. Throws IoError.
Image read_image(const std::filesystem::path& path);

/// Writes by extension: .png, .pgm/.ppm (binary) or .pnm (binary, gray or
/// color by content). Values are quantized to 8 bits.
void write_image(const std::filesystem::path& path, const Image& img);

/// Netpbm writer; `ascii` selects P2/P3 instead of P5/P6.
void write_pnm(const std::filesystem::path& path, const Image& img, bool ascii);

/// True for extensions read_image understands (case-insensitive).
bool has_image_extension(const std::filesystem::path& path);

/// Luminance of an RGB image, or the plane itself for grayscale.
ImagePlane luminance_of(const Image& img);

}  // namespace mssr
