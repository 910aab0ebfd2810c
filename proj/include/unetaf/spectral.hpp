#pragma once

#include <cstddef>
#include <vector>

#include "unetaf/tensor.hpp"

namespace unetaf {

/// Continuous 2-D translation in pixels of the grid it is applied on.
/// Positive gx moves content towards larger column indices.
struct Displacement {
    double gx = 0.0;
    double gy = 0.0;

    friend bool operator==(const Displacement&, const Displacement&) = default;
    friend Displacement operator+(Displacement a, Displacement b) { return {a.gx + b.gx, a.gy + b.gy}; }
    friend Displacement operator-(Displacement a) { return {-a.gx, -a.gy}; }
    friend Displacement operator*(double s, Displacement a) { return {s * a.gx, s * a.gy}; }
    friend Displacement operator/(Displacement a, double s) { return {a.gx / s, a.gy / s}; }
};

/// Grid whose (open) Nyquist band a low-pass filter preserves.
struct BandSpec {
    std::size_t height = 1;
    std::size_t width = 1;
};

/// Circular sub-pixel translation by a DFT phase ramp.
///
/// The interpolant is the periodic sinc one, with the Nyquist coefficient of an
/// even-sized axis split evenly between +N/2 and -N/2. That bin is therefore
/// scaled by cos(pi * g) and the output stays real. Displacements with integer
/// components are performed as exact circular rolls.
template <typename T>
BasicTensor<T> translate(const BasicTensor<T>& x, Displacement g);

/// Exact integer circular shift: out(y, x) = in(y - dy, x - dx) modulo the size.
template <typename T>
BasicTensor<T> roll(const BasicTensor<T>& x, long dx, long dy);

/// All (gx, gy) on the lattice step * Z^2 with Chebyshev radius <= max_disp,
/// excluding the origin, in lexicographic (gx, gy) order.
std::vector<Displacement> translate_adversarial_grid(double max_disp, double step);

/// Ideal low-pass projection: keeps DFT bins with |k| strictly below half the
/// target size on each axis and zeroes the rest, including the target Nyquist bin.
template <typename T>
BasicTensor<T> lowpass(const BasicTensor<T>& x, BandSpec band);

/// Sinc decimation by spectrum truncation. Constants map to the same constant.
/// Throws IndivisibleSize when factor does not divide both spatial dims.
template <typename T>
BasicTensor<T> downsample(const BasicTensor<T>& x, std::size_t factor);

/// Sinc interpolation by spectral zero-padding; reproduces the input samples on
/// the coarse lattice (out(f*i, f*j) == in(i, j)).
template <typename T>
BasicTensor<T> upsample(const BasicTensor<T>& x, std::size_t factor);

} // namespace unetaf
