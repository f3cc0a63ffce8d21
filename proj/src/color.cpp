#include "mssr/color.hpp"

#include <array>

#include "mssr/errors.hpp"

namespace mssr {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;

// Rows produce Y, Cb, Cr on the 0..255 scale from R, G, B in [0, 1].
constexpr Mat3 kForward = {{
    {65.481, 128.553, 24.966},
    {-37.797, -74.203, 112.0},
    {112.0, -93.786, -18.214},
}};
constexpr std::array<double, 3> kOffset = {16.0, 128.0, 128.0};

constexpr Mat3 invert(const Mat3& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    Mat3 inv{};
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv;
}

constexpr Mat3 kInverse = invert(kForward);

}  // namespace

YCbCrImage rgb_to_ycbcr(const RgbImage& img) {
    const std::size_t H = img.height();
    const std::size_t W = img.width();
    YCbCrImage out{ImagePlane(H, W), ImagePlane(H, W), ImagePlane(H, W)};
    for (std::size_t i = 0; i < H * W; ++i) {
        const double rgb[3] = {img.r.values()[i], img.g.values()[i], img.b.values()[i]};
        double* dst[3] = {&out.y.values()[i], &out.cb.values()[i], &out.cr.values()[i]};
        for (int k = 0; k < 3; ++k) {
            *dst[k] = (kOffset[k] + kForward[k][0] * rgb[0] + kForward[k][1] * rgb[1] + kForward[k][2] * rgb[2]) /
                      255.0;
        }
    }
    return out;
}

RgbImage ycbcr_to_rgb(const YCbCrImage& img) {
    if (!img.y.same_size(img.cb) || !img.y.same_size(img.cr)) {
        throw ShapeError("ycbcr_to_rgb: channel planes differ in size");
    }
    const std::size_t H = img.y.height();
    const std::size_t W = img.y.width();
    RgbImage out(ImagePlane(H, W), ImagePlane(H, W), ImagePlane(H, W));
    for (std::size_t i = 0; i < H * W; ++i) {
        const double ycc[3] = {img.y.values()[i] * 255.0 - kOffset[0], img.cb.values()[i] * 255.0 - kOffset[1],
                               img.cr.values()[i] * 255.0 - kOffset[2]};
        double* dst[3] = {&out.r.values()[i], &out.g.values()[i], &out.b.values()[i]};
        for (int k = 0; k < 3; ++k) {
            *dst[k] = kInverse[k][0] * ycc[0] + kInverse[k][1] * ycc[1] + kInverse[k][2] * ycc[2];
        }
    }
    return out;
}

ImagePlane luminance(const RgbImage& img) {
    ImagePlane y(img.height(), img.width());
    for (std::size_t i = 0; i < y.size(); ++i) {
        y.values()[i] = (kOffset[0] + kForward[0][0] * img.r.values()[i] + kForward[0][1] * img.g.values()[i] +
                         kForward[0][2] * img.b.values()[i]) /
                        255.0;
    }
    return y;
}

}  // namespace mssr
