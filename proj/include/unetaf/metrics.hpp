#pragma once

#include "unetaf/tensor.hpp"

namespace unetaf {

/// PSNR values above this are reported as "identical" in aggregates.
inline constexpr double kIdenticalPsnrCap = 300.0;

/// 10 log10(peak^2 / MSE) over all elements; +infinity for identical inputs.
template <typename T>
double psnr(const BasicTensor<T>& a, const BasicTensor<T>& b, double peak = 1.0);

/// PSNR of sample `n` alone.
template <typename T>
double psnr_sample(const BasicTensor<T>& a, const BasicTensor<T>& b, std::size_t n, double peak = 1.0);

/// Caps the identical sentinel so means stay finite.
inline double capped_db(double db) { return db > kIdenticalPsnrCap ? kIdenticalPsnrCap : db; }

/// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5), every channel and
/// sample; C1 = (0.01 peak)^2, C2 = (0.03 peak)^2. Spatial dims must be >= 11.
template <typename T>
double ssim(const BasicTensor<T>& a, const BasicTensor<T>& b, double peak = 1.0);

} // namespace unetaf
