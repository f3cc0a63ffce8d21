#include "mssr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mssr/errors.hpp"

namespace mssr {

std::uint8_t quantize_8bit(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v * 255.0), 0.0, 255.0));
}

std::vector<std::uint8_t> quantize_8bit(const ImagePlane& img) {
    std::vector<std::uint8_t> out(img.size());
    std::transform(img.values().begin(), img.values().end(), out.begin(),
                   [](double v) { return quantize_8bit(v); });
    return out;
}

namespace {

void require_same_size(const ImagePlane& a, const ImagePlane& b, const char* op) {
    if (!a.same_size(b)) {
        throw ShapeError(std::string(op) + ": size mismatch " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
    }
}

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        g[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (double& v : g) {
        v /= sum;
    }
    return g;
}

// Valid-mode separable Gaussian filter of an H x W field.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t H, std::size_t W,
                                 const std::array<double, kSsimWindow>& g) {
    const std::size_t oh = H - kSsimWindow + 1;
    const std::size_t ow = W - kSsimWindow + 1;
    std::vector<double> tmp(H * ow);
    for (std::size_t y = 0; y < H; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) acc += g[k] * src[y * W + x + k];
            tmp[y * ow + x] = acc;
        }
    }
    std::vector<double> out(oh * ow);
    for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kSsimWindow; ++k) acc += g[k] * tmp[(y + k) * ow + x];
            out[y * ow + x] = acc;
        }
    }
    return out;
}

}  // namespace

double psnr(const ImagePlane& a, const ImagePlane& b) {
    require_same_size(a, b, "psnr");
    const auto qa = quantize_8bit(a);
    const auto qb = quantize_8bit(b);
    double sse = 0.0;
    for (std::size_t i = 0; i < qa.size(); ++i) {
        const double d = static_cast<double>(qa[i]) - static_cast<double>(qb[i]);
        sse += d * d;
    }
    if (sse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double mse = sse / static_cast<double>(qa.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const ImagePlane& a, const ImagePlane& b) {
    require_same_size(a, b, "ssim");
    if (a.height() < kSsimWindow || a.width() < kSsimWindow) {
        throw ArgumentError("ssim: images must be at least 11x11, got " + std::to_string(a.height()) + "x" +
                            std::to_string(a.width()));
    }
    const std::size_t H = a.height();
    const std::size_t W = a.width();
    const auto qa = quantize_8bit(a);
    const auto qb = quantize_8bit(b);
    std::vector<double> fa(H * W), fb(H * W), faa(H * W), fbb(H * W), fab(H * W);
    for (std::size_t i = 0; i < H * W; ++i) {
        fa[i] = qa[i];
        fb[i] = qb[i];
        faa[i] = fa[i] * fa[i];
        fbb[i] = fb[i] * fb[i];
        fab[i] = fa[i] * fb[i];
    }
    const auto g = gaussian_taps();
    const auto mu_a = filter_valid(fa, H, W, g);
    const auto mu_b = filter_valid(fb, H, W, g);
    const auto e_aa = filter_valid(faa, H, W, g);
    const auto e_bb = filter_valid(fbb, H, W, g);
    const auto e_ab = filter_valid(fab, H, W, g);

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
        const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
        const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

QualityScore quality(const ImagePlane& a, const ImagePlane& b) {
    return {psnr(a, b), ssim(a, b)};
}

}  // namespace mssr
