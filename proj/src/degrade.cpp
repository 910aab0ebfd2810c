#include "unetaf/degrade.hpp"

#include <cmath>
#include <numbers>

#include "unetaf/fft.hpp"

namespace unetaf {

namespace {

double frequency(std::size_t k, std::size_t n)
{
    return 2 * k <= n ? double(k) : double(k) - double(n);
}

template <typename T>
BasicTensor<T> blur_circular(const BasicTensor<T>& x, double sigma)
{
    const Shape& s = x.shape();
    auto spec = rfft2(x);
    const std::size_t cols = spec.cols();
    const double c = -2.0 * std::numbers::pi * std::numbers::pi * sigma * sigma;
    std::vector<double> gy(s.height), gx(s.width);
    for (std::size_t k = 0; k < s.height; ++k) {
        const double f = frequency(k, s.height) / double(s.height);
        gy[k] = std::exp(c * f * f);
    }
    for (std::size_t k = 0; k < s.width; ++k) {
        const double f = frequency(k, s.width) / double(s.width);
        gx[k] = std::exp(c * f * f);
    }
    for (std::size_t p = 0; p < s.planes(); ++p)
        for (std::size_t ky = 0; ky < s.height; ++ky)
            for (std::size_t kx = 0; kx < cols; ++kx)
                spec.at(p, ky, kx) *= static_cast<T>(gy[ky] * gx[kx]);
    return irfft2(std::move(spec));
}

template <typename T>
BasicTensor<T> blur_valid(const BasicTensor<T>& x, double sigma)
{
    const long radius = static_cast<long>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0;
    for (long i = -radius; i <= radius; ++i) {
        const double v = std::exp(-double(i * i) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (double& v : kernel)
        v /= sum;

    const Shape& s = x.shape();
    const long h = static_cast<long>(s.height);
    const long w = static_cast<long>(s.width);
    BasicTensor<T> out(s);
    std::vector<double> tmp(s.plane_size());
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = x.plane(p);
        auto dst = out.plane(p);
        for (long y = 0; y < h; ++y)
            for (long c = 0; c < w; ++c) {
                double acc = 0;
                for (long i = -radius; i <= radius; ++i) {
                    const long sc = c + i;
                    if (sc >= 0 && sc < w)
                        acc += kernel[static_cast<std::size_t>(i + radius)] * double(src[y * w + sc]);
                }
                tmp[static_cast<std::size_t>(y * w + c)] = acc;
            }
        for (long y = 0; y < h; ++y)
            for (long c = 0; c < w; ++c) {
                double acc = 0;
                for (long i = -radius; i <= radius; ++i) {
                    const long sy = y + i;
                    if (sy >= 0 && sy < h)
                        acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(sy * w + c)];
                }
                dst[y * w + c] = static_cast<T>(acc);
            }
    }
    return out;
}

} // namespace

template <typename T>
BasicTensor<T> gaussian_blur(const BasicTensor<T>& x, double sigma, Boundary boundary)
{
    if (!(sigma >= 0.0))
        throw ConfigError("blur sigma must be >= 0");
    if (sigma == 0.0)
        return x;
    return boundary == Boundary::Circular ? blur_circular(x, sigma) : blur_valid(x, sigma);
}

template <typename T>
BasicTensor<T> add_noise(const BasicTensor<T>& x, double sigma, Rng& rng)
{
    if (!(sigma >= 0.0))
        throw ConfigError("noise sigma must be >= 0");
    if (sigma == 0.0)
        return x;
    BasicTensor<T> out = x;
    for (T& v : out.data())
        v += static_cast<T>(sigma * rng.normal());
    return out;
}

template <typename T>
BasicTensor<T> degrade(const BasicTensor<T>& x, const DegradationSpec& spec, Rng& rng)
{
    return add_noise(gaussian_blur(x, spec.blur_sigma, spec.boundary), spec.noise_sigma, rng);
}

template <typename T>
BasicTensor<T> crop_translate(const BasicTensor<T>& x_large, Displacement g, std::size_t crop)
{
    const Shape& s = x_large.shape();
    if (!std::isfinite(g.gx) || !std::isfinite(g.gy))
        throw MarginExceeded("crop_translate: displacement must be finite");
    const auto need = [&](double v) { return crop + 2 * static_cast<std::size_t>(std::ceil(std::abs(v))); };
    if (crop == 0 || need(g.gx) > s.width || need(g.gy) > s.height)
        throw MarginExceeded("crop_translate: crop " + std::to_string(crop) + " with displacement (" +
                             std::to_string(g.gx) + ", " + std::to_string(g.gy) + ") exceeds source " +
                             to_string(s));

    const double nx = std::floor(g.gx);
    const double ny = std::floor(g.gy);
    const BasicTensor<T> shifted = (g.gx == nx && g.gy == ny) ? x_large : translate(x_large, {g.gx - nx, g.gy - ny});

    const long ox = static_cast<long>((s.width - crop) / 2) - static_cast<long>(nx);
    const long oy = static_cast<long>((s.height - crop) / 2) - static_cast<long>(ny);
    const long limit_x = static_cast<long>(s.width - crop);
    const long limit_y = static_cast<long>(s.height - crop);
    if (ox < 0 || oy < 0 || ox > limit_x || oy > limit_y)
        throw MarginExceeded("crop_translate: shifted window leaves the source image");

    Shape os{s.batch, s.channels, crop, crop};
    BasicTensor<T> out(os);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = shifted.plane(p);
        auto dst = out.plane(p);
        for (std::size_t y = 0; y < crop; ++y)
            for (std::size_t c = 0; c < crop; ++c)
                dst[y * crop + c] = src[(static_cast<std::size_t>(oy) + y) * s.width + static_cast<std::size_t>(ox) + c];
    }
    return out;
}

#define UNETAF_INSTANTIATE(T)                                                              \
    template BasicTensor<T> gaussian_blur(const BasicTensor<T>&, double, Boundary);        \
    template BasicTensor<T> add_noise(const BasicTensor<T>&, double, Rng&);                \
    template BasicTensor<T> degrade(const BasicTensor<T>&, const DegradationSpec&, Rng&);  \
    template BasicTensor<T> crop_translate(const BasicTensor<T>&, Displacement, std::size_t);

UNETAF_INSTANTIATE(float)
UNETAF_INSTANTIATE(double)

} // namespace unetaf
