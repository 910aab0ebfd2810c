#pragma once

#include "unetaf/rng.hpp"
#include "unetaf/spectral.hpp"
#include "unetaf/tensor.hpp"

namespace unetaf {

enum class Boundary { Circular, Valid };

/// Blur-then-noise degradation, x_lq = h * x_hq + noise.
struct DegradationSpec {
    double blur_sigma = 1.0;  // pixels; 0 disables blur
    double noise_sigma = 0.01;
    Boundary boundary = Boundary::Circular;
};

/// Circular: multiplication by the periodized Gaussian transfer function
/// exp(-2 pi^2 sigma^2 (kx^2/W^2 + ky^2/H^2)). Valid: spatial kernel truncated
/// at 4 sigma, renormalized to unit sum, zero padding outside the image.
template <typename T>
BasicTensor<T> gaussian_blur(const BasicTensor<T>& x, double sigma, Boundary boundary);

template <typename T>
BasicTensor<T> add_noise(const BasicTensor<T>& x, double sigma, Rng& rng);

template <typename T>
BasicTensor<T> degrade(const BasicTensor<T>& x, const DegradationSpec& spec, Rng& rng);

/// Slides a crop x crop window over the centre of a larger image by g: the
/// source is translated circularly by the fractional part of g and the window
/// moves by the integer part, so new content enters at the crop edges.
/// Throws MarginExceeded when the shifted window leaves the source.
template <typename T>
BasicTensor<T> crop_translate(const BasicTensor<T>& x_large, Displacement g, std::size_t crop);

} // namespace unetaf
