#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mssr {

struct Shape4 {
    std::size_t batch = 1;
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;

    std::size_t size() const { return batch * channels * height * width; }
    std::size_t plane() const { return height * width; }
    bool operator==(const Shape4&) const = default;
};

std::string to_string(const Shape4& s);

/// Dense 4-D array in NCHW order: index = ((b * C + c) * H + y) * W + x.
///
/// `T` is float for training and inference, double for gradient checks.
template <typename T>
class Tensor4 {
public:
    using value_type = T;

    Tensor4() = default;
    /// Zero-filled tensor. Every dimension must be at least 1.
    explicit Tensor4(Shape4 shape);
    Tensor4(Shape4 shape, std::vector<T> values);

    const Shape4& shape() const { return shape_; }
    std::size_t batch() const { return shape_.batch; }
    std::size_t channels() const { return shape_.channels; }
    std::size_t height() const { return shape_.height; }
    std::size_t width() const { return shape_.width; }
    std::size_t size() const { return values_.size(); }

    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }

    std::size_t index(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return ((b * shape_.channels + c) * shape_.height + y) * shape_.width + x;
    }
    T& operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
        return values_[index(b, c, y, x)];
    }
    T operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
        return values_[index(b, c, y, x)];
    }

    /// Pointer to the start of one (b, c) plane.
    T* plane(std::size_t b, std::size_t c) { return values_.data() + (b * shape_.channels + c) * shape_.plane(); }
    const T* plane(std::size_t b, std::size_t c) const {
        return values_.data() + (b * shape_.channels + c) * shape_.plane();
    }

    void fill(T v);
    bool all_finite() const;

    template <typename U>
    Tensor4<U> cast() const {
        std::vector<U> out(values_.begin(), values_.end());
        return Tensor4<U>(shape_, std::move(out));
    }

private:
    Shape4 shape_{};
    std::vector<T> values_ = std::vector<T>(1, T(0));
};

/// Throws ShapeError naming both shapes unless `a == b`.
void require_same_shape(const Shape4& a, const Shape4& b, const char* op);

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& input);

/// ReLU gradient. The mask is `input > 0`, so passing the ReLU output instead
/// of its input gives the same result.
template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& input, const Tensor4<T>& grad_output);

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b);

/// In-place `acc += other`.
template <typename T>
void add_inplace(Tensor4<T>& acc, const Tensor4<T>& other);

extern template class Tensor4<float>;
extern template class Tensor4<double>;

}  // namespace mssr
