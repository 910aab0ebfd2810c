#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "unetaf/tensor.hpp"

namespace unetaf {

enum class FftDirection { Forward, Inverse };

/// Unnormalized in-place 2-D DFT of `planes` contiguous height x width planes.
/// Forward uses exp(-2*pi*i*k*n/N); Inverse uses the conjugate kernel and no
/// 1/N factor. Any size is accepted.
template <typename T>
void fft2_planes(std::span<std::complex<T>> data, std::size_t planes, std::size_t height,
                 std::size_t width, FftDirection direction);

/// Forward DFT of every (batch, channel) plane; unnormalized.
template <typename T>
BasicSpectrum<T> fft2(const BasicTensor<T>& x);

/// Inverse DFT with the 1/(H*W) factor. Throws NonHermitianSpectrum when the
/// imaginary residue of the result is not negligible.
template <typename T>
BasicTensor<T> ifft2(const BasicSpectrum<T>& s);

/// Non-redundant half of the DFT of real planes: for each plane, height rows
/// of width/2 + 1 coefficients (kx = 0 .. width/2). Bins that are their own
/// mirror (kx = 0 and, for even width, kx = width/2) are read as real parts on
/// inversion, so every half spectrum inverts to a real tensor.
template <typename T>
class HalfSpectrum {
public:
    explicit HalfSpectrum(Shape real_shape)
        : shape_(real_shape), cols_(real_shape.width / 2 + 1), data_(real_shape.planes() * real_shape.height * cols_)
    {
    }

    const Shape& shape() const { return shape_; }
    std::size_t cols() const { return cols_; }
    std::span<std::complex<T>> data() { return data_; }
    std::span<const std::complex<T>> data() const { return data_; }

    std::complex<T>& at(std::size_t plane, std::size_t ky, std::size_t kx)
    {
        return data_[(plane * shape_.height + ky) * cols_ + kx];
    }
    std::complex<T> at(std::size_t plane, std::size_t ky, std::size_t kx) const
    {
        return data_[(plane * shape_.height + ky) * cols_ + kx];
    }

private:
    Shape shape_;
    std::size_t cols_;
    std::vector<std::complex<T>> data_;
};

/// Real-input forward DFT, unnormalized.
template <typename T>
HalfSpectrum<T> rfft2(const BasicTensor<T>& x);

/// Inverse of rfft2 including the 1/(H*W) factor. Consumes its argument.
template <typename T>
BasicTensor<T> irfft2(HalfSpectrum<T>&& s);

/// Largest imaginary residue ifft2 tolerates for a result of magnitude `scale`.
template <typename T>
T hermitian_tolerance(T scale);

} // namespace unetaf
