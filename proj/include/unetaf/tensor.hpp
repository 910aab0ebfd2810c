#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "unetaf/error.hpp"

namespace unetaf {

/// Extent of a 4-D (batch, channels, height, width) array.
struct Shape {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t plane_size() const { return height * width; }
    std::size_t planes() const { return batch * channels; }
    std::size_t numel() const { return batch * channels * height * width; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense real 4-D tensor, row-major within each (height, width) plane.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape shape) : shape_(shape), data_(shape.numel(), T(0)) {}
    BasicTensor(Shape shape, std::vector<T> data);

    static BasicTensor full(Shape shape, T value)
    {
        BasicTensor t(shape);
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    const std::vector<T>& vector() const { return data_; }

    /// Plane `index` in batch-major order, i.e. index = n * channels + c.
    std::span<T> plane(std::size_t index)
    {
        return std::span<T>(data_).subspan(index * shape_.plane_size(), shape_.plane_size());
    }
    std::span<const T> plane(std::size_t index) const
    {
        return std::span<const T>(data_).subspan(index * shape_.plane_size(), shape_.plane_size());
    }
    std::span<T> plane(std::size_t n, std::size_t c) { return plane(n * shape_.channels + c); }
    std::span<const T> plane(std::size_t n, std::size_t c) const { return plane(n * shape_.channels + c); }

    T& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x)
    {
        return data_[((n * shape_.channels + c) * shape_.height + y) * shape_.width + x];
    }
    T operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const
    {
        return data_[((n * shape_.channels + c) * shape_.height + y) * shape_.width + x];
    }

    /// Element type conversion (e.g. double weights into a float network).
    template <typename U>
    BasicTensor<U> cast() const
    {
        return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
    }

    bool all_finite() const;

private:
    Shape shape_{};
    std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

/// Complex coefficients of the per-plane 2-D DFT, zero frequency at (0, 0).
template <typename T>
class BasicSpectrum {
public:
    using complex_type = std::complex<T>;

    BasicSpectrum() = default;
    explicit BasicSpectrum(Shape shape) : shape_(shape), data_(shape.numel()) {}

    const Shape& shape() const { return shape_; }
    std::span<complex_type> data() { return data_; }
    std::span<const complex_type> data() const { return data_; }

    std::span<complex_type> plane(std::size_t index)
    {
        return std::span<complex_type>(data_).subspan(index * shape_.plane_size(), shape_.plane_size());
    }
    std::span<const complex_type> plane(std::size_t index) const
    {
        return std::span<const complex_type>(data_).subspan(index * shape_.plane_size(),
                                                            shape_.plane_size());
    }

    complex_type& at(std::size_t plane_index, std::size_t ky, std::size_t kx)
    {
        return data_[(plane_index * shape_.height + ky) * shape_.width + kx];
    }
    complex_type at(std::size_t plane_index, std::size_t ky, std::size_t kx) const
    {
        return data_[(plane_index * shape_.height + ky) * shape_.width + kx];
    }

private:
    Shape shape_{};
    std::vector<complex_type> data_;
};

using Spectrum = BasicSpectrum<double>;
using SpectrumF = BasicSpectrum<float>;

// Elementwise helpers used across modules. All require equal shapes.
template <typename T>
BasicTensor<T> operator+(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> operator-(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> operator*(T scale, const BasicTensor<T>& a);

template <typename T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
T max_abs(const BasicTensor<T>& a);
/// Sum of squares, accumulated in double.
template <typename T>
double squared_norm(const BasicTensor<T>& a);
template <typename T>
double dot(const BasicTensor<T>& a, const BasicTensor<T>& b);

/// Samples [begin, end) of the batch axis.
template <typename T>
BasicTensor<T> slice_batch(const BasicTensor<T>& x, std::size_t begin, std::size_t end);

void require_same_shape(const Shape& a, const Shape& b, const char* what);

} // namespace unetaf
