#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mssr/tensor.hpp"

namespace mssr {

/// Single-channel image, row-major, nominal range [0, 1].
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(std::size_t height, std::size_t width, double fill = 0.0);
    ImagePlane(std::size_t height, std::size_t width, std::vector<double> values);

    std::size_t height() const { return height_; }
    std::size_t width() const { return width_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }
    double operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    bool same_size(const ImagePlane& o) const { return height_ == o.height_ && width_ == o.width_; }
    bool operator==(const ImagePlane&) const = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

struct RgbImage {
    ImagePlane r;
    ImagePlane g;
    ImagePlane b;

    RgbImage() = default;
    RgbImage(ImagePlane red, ImagePlane green, ImagePlane blue);

    std::size_t height() const { return r.height(); }
    std::size_t width() const { return r.width(); }
};

/// Removes `border` pixels from every side. Throws ArgumentError when
/// 2 * border >= min(height, width).
ImagePlane crop_border(const ImagePlane& img, std::size_t border);

/// Top-left aligned crop to (height, width).
ImagePlane crop(const ImagePlane& img, std::size_t top, std::size_t left, std::size_t height, std::size_t width);

/// Trims the bottom/right edges so both dimensions are multiples of `scale`.
ImagePlane modcrop(const ImagePlane& img, std::size_t scale);

/// Rotates counter-clockwise by `quarter_turns` * 90 degrees. Pure pixel permutation.
ImagePlane rotate90(const ImagePlane& img, int quarter_turns);

template <typename T>
Tensor4<T> plane_to_tensor(const ImagePlane& img);

/// Copies channel `c` of batch item `b`.
template <typename T>
ImagePlane tensor_to_plane(const Tensor4<T>& t, std::size_t b = 0, std::size_t c = 0);

}  // namespace mssr
