#include "mssr/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "mssr/errors.hpp"

namespace mssr {

std::string to_string(const Shape4& s) {
    return "[" + std::to_string(s.batch) + "x" + std::to_string(s.channels) + "x" + std::to_string(s.height) +
           "x" + std::to_string(s.width) + "]";
}

void require_same_shape(const Shape4& a, const Shape4& b, const char* op) {
    if (!(a == b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
    }
}

namespace {

void require_positive_dims(const Shape4& s) {
    if (s.batch == 0 || s.channels == 0 || s.height == 0 || s.width == 0) {
        throw ShapeError("Tensor4: all dimensions must be >= 1, got " + to_string(s));
    }
}

}  // namespace

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape) : shape_(shape) {
    require_positive_dims(shape_);
    values_.assign(shape_.size(), T(0));
}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
    require_positive_dims(shape_);
    if (values_.size() != shape_.size()) {
        throw ShapeError("Tensor4: " + std::to_string(values_.size()) + " values do not fill shape " +
                         to_string(shape_));
    }
}

template <typename T>
void Tensor4<T>::fill(T v) {
    std::fill(values_.begin(), values_.end(), v);
}

template <typename T>
bool Tensor4<T>::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& input) {
    Tensor4<T> out(input.shape());
    const T* in = input.data();
    T* o = out.data();
    for (std::size_t i = 0; i < input.size(); ++i) {
        o[i] = in[i] > T(0) ? in[i] : T(0);
    }
    return out;
}

template <typename T>
Tensor4<T> relu_backward(const Tensor4<T>& input, const Tensor4<T>& grad_output) {
    require_same_shape(input.shape(), grad_output.shape(), "relu_backward");
    Tensor4<T> out(input.shape());
    const T* in = input.data();
    const T* g = grad_output.data();
    T* o = out.data();
    for (std::size_t i = 0; i < input.size(); ++i) {
        o[i] = in[i] > T(0) ? g[i] : T(0);
    }
    return out;
}

template <typename T>
Tensor4<T> add(const Tensor4<T>& a, const Tensor4<T>& b) {
    require_same_shape(a.shape(), b.shape(), "add");
    Tensor4<T> out(a.shape());
    const T* pa = a.data();
    const T* pb = b.data();
    T* o = out.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        o[i] = pa[i] + pb[i];
    }
    return out;
}

template <typename T>
void add_inplace(Tensor4<T>& acc, const Tensor4<T>& other) {
    require_same_shape(acc.shape(), other.shape(), "add_inplace");
    T* a = acc.data();
    const T* b = other.data();
    for (std::size_t i = 0; i < acc.size(); ++i) {
        a[i] += b[i];
    }
}

template class Tensor4<float>;
template class Tensor4<double>;

#define MSSR_INSTANTIATE(T)                                                   \
    template Tensor4<T> relu_forward(const Tensor4<T>&);                      \
    template Tensor4<T> relu_backward(const Tensor4<T>&, const Tensor4<T>&); \
    template Tensor4<T> add(const Tensor4<T>&, const Tensor4<T>&);           \
    template void add_inplace(Tensor4<T>&, const Tensor4<T>&);

MSSR_INSTANTIATE(float)
MSSR_INSTANTIATE(double)

#undef MSSR_INSTANTIATE

}  // namespace mssr
