#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mssr/model.hpp"

namespace mssr {

/// Model file layout (all integers and floats little-endian):
///
///   "MSSR"            4-byte magic
///   version           u16 (currently 1)
///   n_long, n_short, n_recon, width    u16 each
///   for each layer in canonical order (block1, block2, reconstruction):
///     out, in         u16 each
///     weights         out*in*9 f32, [out][in][ky][kx]
///     bias            out f32
///
/// Nothing may follow the last layer.
inline constexpr std::uint16_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const MssrModel<float>& model);
/// Throws FormatError (truncation, magic, version, trailing bytes) or
/// ModelShapeError (layer shapes disagree with the header).
MssrModel<float> decode_model(std::span<const std::uint8_t> bytes);

void save_model(const MssrModel<float>& model, const std::filesystem::path& path);
/// Parameters are narrowed to 32-bit floats on disk.
void save_model(const MssrModel<double>& model, const std::filesystem::path& path);
MssrModel<float> load_model(const std::filesystem::path& path);

}  // namespace mssr
