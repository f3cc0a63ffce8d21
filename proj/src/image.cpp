#include "mssr/image.hpp"

#include <string>

#include "mssr/errors.hpp"

namespace mssr {

ImagePlane::ImagePlane(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), values_(height * width, fill) {
    if (height == 0 || width == 0) {
        throw ShapeError("ImagePlane: dimensions must be >= 1");
    }
}

ImagePlane::ImagePlane(std::size_t height, std::size_t width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
    if (height == 0 || width == 0) {
        throw ShapeError("ImagePlane: dimensions must be >= 1");
    }
    if (values_.size() != height * width) {
        throw ShapeError("ImagePlane: " + std::to_string(values_.size()) + " values for " + std::to_string(height) +
                         "x" + std::to_string(width));
    }
}

RgbImage::RgbImage(ImagePlane red, ImagePlane green, ImagePlane blue)
    : r(std::move(red)), g(std::move(green)), b(std::move(blue)) {
    if (!r.same_size(g) || !r.same_size(b)) {
        throw ShapeError("RgbImage: channel planes differ in size");
    }
}

ImagePlane crop(const ImagePlane& img, std::size_t top, std::size_t left, std::size_t height, std::size_t width) {
    if (top + height > img.height() || left + width > img.width()) {
        throw ArgumentError("crop: region exceeds the image");
    }
    ImagePlane out(height, width);
    for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
            out(y, x) = img(top + y, left + x);
        }
    }
    return out;
}

ImagePlane crop_border(const ImagePlane& img, std::size_t border) {
    if (2 * border >= img.height() || 2 * border >= img.width()) {
        throw ArgumentError("crop_border: border " + std::to_string(border) + " too large for " +
                            std::to_string(img.height()) + "x" + std::to_string(img.width()));
    }
    if (border == 0) {
        return img;
    }
    return crop(img, border, border, img.height() - 2 * border, img.width() - 2 * border);
}

ImagePlane modcrop(const ImagePlane& img, std::size_t scale) {
    if (scale == 0 || img.height() < scale || img.width() < scale) {
        throw ArgumentError("modcrop: image smaller than scale " + std::to_string(scale));
    }
    return crop(img, 0, 0, img.height() - img.height() % scale, img.width() - img.width() % scale);
}

ImagePlane rotate90(const ImagePlane& img, int quarter_turns) {
    const int k = ((quarter_turns % 4) + 4) % 4;
    const std::size_t H = img.height();
    const std::size_t W = img.width();
    if (k == 0) {
        return img;
    }
    if (k == 2) {
        ImagePlane out(H, W);
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x) out(y, x) = img(H - 1 - y, W - 1 - x);
        return out;
    }
    ImagePlane out(W, H);
    for (std::size_t y = 0; y < W; ++y) {
        for (std::size_t x = 0; x < H; ++x) {
            // k == 1: counter-clockwise; k == 3: clockwise.
            out(y, x) = k == 1 ? img(x, W - 1 - y) : img(H - 1 - x, y);
        }
    }
    return out;
}

template <typename T>
Tensor4<T> plane_to_tensor(const ImagePlane& img) {
    std::vector<T> v(img.values().begin(), img.values().end());
    return Tensor4<T>({1, 1, img.height(), img.width()}, std::move(v));
}

template <typename T>
ImagePlane tensor_to_plane(const Tensor4<T>& t, std::size_t b, std::size_t c) {
    const T* p = t.plane(b, c);
    return ImagePlane(t.height(), t.width(), std::vector<double>(p, p + t.height() * t.width()));
}

template Tensor4<float> plane_to_tensor(const ImagePlane&);
template Tensor4<double> plane_to_tensor(const ImagePlane&);
template ImagePlane tensor_to_plane(const Tensor4<float>&, std::size_t, std::size_t);
template ImagePlane tensor_to_plane(const Tensor4<double>&, std::size_t, std::size_t);

}  // namespace mssr
