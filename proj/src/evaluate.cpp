#include "mssr/evaluate.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mssr/color.hpp"
#include "mssr/errors.hpp"
#include "mssr/resize.hpp"

namespace mssr {

template <typename T>
ImagePlane restore_plane(const MssrModel<T>& model, const ImagePlane& x) {
    const auto residual = model_forward(model, plane_to_tensor<T>(x));
    ImagePlane out = x;
    const T* r = residual.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.values()[i] += static_cast<double>(r[i]);
    }
    return out;
}

template ImagePlane restore_plane(const MssrModel<float>&, const ImagePlane&);
template ImagePlane restore_plane(const MssrModel<double>&, const ImagePlane&);

Image super_resolve(const MssrModel<float>& model, const Image& lr, int scale) {
    if (scale < 1) {
        throw ArgumentError("super_resolve: scale must be positive");
    }
    const auto s = static_cast<std::size_t>(scale);
    if (const auto* gray = std::get_if<ImagePlane>(&lr)) {
        return restore_plane(model, bicubic_resize(*gray, gray->height() * s, gray->width() * s));
    }
    const auto ycc = rgb_to_ycbcr(std::get<RgbImage>(lr));
    const std::size_t H = ycc.y.height() * s;
    const std::size_t W = ycc.y.width() * s;
    YCbCrImage up{restore_plane(model, bicubic_resize(ycc.y, H, W)), bicubic_resize(ycc.cb, H, W),
                  bicubic_resize(ycc.cr, H, W)};
    RgbImage rgb = ycbcr_to_rgb(up);
    for (auto* p : {&rgb.r, &rgb.g, &rgb.b}) {
        for (double& v : p->values()) v = std::clamp(v, 0.0, 1.0);
    }
    return rgb;
}

EvalResult evaluate_pairs(const MssrModel<float>& model, const std::vector<BenchmarkPair>& pairs, int scale,
                          bool timing) {
    if (pairs.empty()) {
        throw ArgumentError("evaluate_pairs: nothing to evaluate");
    }
    EvalResult result;
    result.scale = scale;
    result.rows.resize(pairs.size());
    const auto border = static_cast<std::size_t>(scale);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        ImagePlane restored;
        double seconds = 0.0;
        if (timing) {
            std::array<double, 3> runs{};
            for (double& t : runs) {
                const auto t0 = std::chrono::steady_clock::now();
                restored = restore_plane(model, p.x);
                t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
            std::sort(runs.begin(), runs.end());
            seconds = runs[1];
        } else {
            restored = restore_plane(model, p.x);
        }
        const ImagePlane y = crop_border(p.y, border);
        result.rows[i] = {p.name, quality(crop_border(p.x, border), y), quality(crop_border(restored, border), y),
                          seconds};
    }
    std::sort(result.rows.begin(), result.rows.end(),
              [](const EvalRow& a, const EvalRow& b) { return a.image < b.image; });

    EvalRow avg;
    avg.image = "average";
    for (const auto& r : result.rows) {
        avg.bicubic.psnr += r.bicubic.psnr;
        avg.bicubic.ssim += r.bicubic.ssim;
        avg.model.psnr += r.model.psnr;
        avg.model.ssim += r.model.ssim;
        avg.seconds += r.seconds;
    }
    const double n = static_cast<double>(result.rows.size());
    avg.bicubic.psnr /= n;
    avg.bicubic.ssim /= n;
    avg.model.psnr /= n;
    avg.model.ssim /= n;
    avg.seconds /= n;
    result.average = avg;
    return result;
}

namespace {

std::string fmt(double v, const char* spec) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string format_eval_row(const EvalRow& row) {
    return row.image + "," + fmt(row.bicubic.psnr, "%.6f") + "," + fmt(row.bicubic.ssim, "%.6f") + "," +
           fmt(row.model.psnr, "%.6f") + "," + fmt(row.model.ssim, "%.6f") + "," + fmt(row.seconds, "%.6f");
}

void write_eval_csv(const std::filesystem::path& path, const EvalResult& result) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    f << kEvalCsvHeader << '\n';
    for (const auto& r : result.rows) {
        f << format_eval_row(r) << '\n';
    }
    f << format_eval_row(result.average) << '\n';
    if (!f) {
        throw IoError("failed writing " + path.string());
    }
}

}  // namespace mssr
