#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mssr/dataset.hpp"
#include "mssr/image_io.hpp"
#include "mssr/metrics.hpp"
#include "mssr/model.hpp"

namespace mssr {

/// x + F(x). The residual is computed at the model's precision and added to
/// `x` in double, so an all-zero model returns `x` unchanged.
template <typename T>
ImagePlane restore_plane(const MssrModel<T>& model, const ImagePlane& x);

/// Upscales `lr` by `scale`: bicubic on every channel, then the network
/// refines the luminance. Grayscale input is treated as luminance directly.
Image super_resolve(const MssrModel<float>& model, const Image& lr, int scale);

struct EvalRow {
    std::string image;
    QualityScore bicubic;
    QualityScore model;
    double seconds = 0.0;  // median inference wall time, 0 when timing is off
};

struct EvalResult {
    int scale = 0;
    std::vector<EvalRow> rows;  // sorted by image name
    EvalRow average;
};

/// Scores bicubic baseline and model output against `y` after removing a
/// border of `scale` pixels. With `timing` each inference runs three times and
/// the median is reported.
EvalResult evaluate_pairs(const MssrModel<float>& model, const std::vector<BenchmarkPair>& pairs, int scale,
                          bool timing);

inline constexpr const char* kEvalCsvHeader = "image,bicubic_psnr,bicubic_ssim,model_psnr,model_ssim,seconds";

/// One row per image, then an "average" row. Infinite PSNR prints as "inf".
void write_eval_csv(const std::filesystem::path& path, const EvalResult& result);
std::string format_eval_row(const EvalRow& row);

}  // namespace mssr
