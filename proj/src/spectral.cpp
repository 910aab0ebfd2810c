#include "unetaf/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "unetaf/fft.hpp"

namespace unetaf {

namespace {

// Signed frequency of DFT index k on an axis of length n; the Nyquist index of
// an even axis maps to +n/2.
long signed_frequency(std::size_t k, std::size_t n)
{
    return 2 * k <= n ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

bool is_nyquist(std::size_t k, std::size_t n) { return n % 2 == 0 && 2 * k == n; }

// Per-axis phase ramp exp(-2*pi*i*g*k/n), with cos(pi*g) on the Nyquist bin.
std::vector<std::complex<double>> phase_ramp(std::size_t n, double g)
{
    std::vector<std::complex<double>> ramp(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (is_nyquist(k, n)) {
            ramp[k] = std::cos(std::numbers::pi * g);
        } else {
            const double angle = -2.0 * std::numbers::pi * g * double(signed_frequency(k, n)) / double(n);
            ramp[k] = std::polar(1.0, angle);
        }
    }
    return ramp;
}

// Bins of an axis of length n lying strictly inside the band of a grid of length m.
bool in_band(std::size_t k, std::size_t n, std::size_t m)
{
    if (is_nyquist(k, n))
        return false;
    return 2 * static_cast<std::size_t>(std::labs(signed_frequency(k, n))) < m;
}

long wrap(long i, long n) { return ((i % n) + n) % n; }

bool is_integer(double v) { return std::isfinite(v) && v == std::floor(v); }

} // namespace

template <typename T>
BasicTensor<T> roll(const BasicTensor<T>& x, long dx, long dy)
{
    const Shape& s = x.shape();
    BasicTensor<T> out(s);
    const long h = static_cast<long>(s.height);
    const long w = static_cast<long>(s.width);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = x.plane(p);
        auto dst = out.plane(p);
        for (long y = 0; y < h; ++y) {
            const long sy = wrap(y - dy, h);
            for (long c = 0; c < w; ++c)
                dst[y * w + c] = src[sy * w + wrap(c - dx, w)];
        }
    }
    return out;
}

template <typename T>
BasicTensor<T> translate(const BasicTensor<T>& x, Displacement g)
{
    if (is_integer(g.gx) && is_integer(g.gy))
        return roll(x, static_cast<long>(g.gx), static_cast<long>(g.gy));

    const Shape& s = x.shape();
    auto spec = rfft2(x);
    const std::size_t cols = spec.cols();
    const auto ry = phase_ramp(s.height, g.gy);
    auto rx = phase_ramp(s.width, g.gx);
    rx.resize(cols);
    std::vector<std::complex<T>> m(s.height * cols);
    for (std::size_t ky = 0; ky < s.height; ++ky)
        for (std::size_t kx = 0; kx < cols; ++kx) {
            const std::complex<double> v = ry[ky] * rx[kx];
            m[ky * cols + kx] = std::complex<T>(static_cast<T>(v.real()), static_cast<T>(v.imag()));
        }
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto* plane = spec.data().data() + p * s.height * cols;
        for (std::size_t i = 0; i < m.size(); ++i)
            plane[i] *= m[i];
    }
    return irfft2(std::move(spec));
}

std::vector<Displacement> translate_adversarial_grid(double max_disp, double step)
{
    if (!(step > 0.0) || !(max_disp >= 0.0))
        throw ConfigError("adversarial grid needs step > 0 and max_disp >= 0");
    const long k = static_cast<long>(std::floor(max_disp / step + 1e-9));
    std::vector<Displacement> grid;
    grid.reserve(static_cast<std::size_t>((2 * k + 1) * (2 * k + 1)));
    for (long i = -k; i <= k; ++i)
        for (long j = -k; j <= k; ++j)
            if (i != 0 || j != 0)
                grid.push_back({double(i) * step, double(j) * step});
    return grid;
}

template <typename T>
BasicTensor<T> lowpass(const BasicTensor<T>& x, BandSpec band)
{
    const Shape& s = x.shape();
    if (band.height < 1 || band.width < 1 || band.height > s.height || band.width > s.width)
        throw ShapeMismatch("lowpass band exceeds tensor size " + to_string(s));
    auto spec = rfft2(x);
    const std::size_t cols = spec.cols();
    std::vector<bool> keep_y(s.height), keep_x(cols);
    for (std::size_t k = 0; k < s.height; ++k)
        keep_y[k] = in_band(k, s.height, band.height);
    for (std::size_t k = 0; k < cols; ++k)
        keep_x[k] = in_band(k, s.width, band.width);
    for (std::size_t p = 0; p < s.planes(); ++p)
        for (std::size_t ky = 0; ky < s.height; ++ky)
            for (std::size_t kx = 0; kx < cols; ++kx)
                if (!(keep_y[ky] && keep_x[kx]))
                    spec.at(p, ky, kx) = 0;
    return irfft2(std::move(spec));
}

template <typename T>
BasicTensor<T> downsample(const BasicTensor<T>& x, std::size_t factor)
{
    const Shape& s = x.shape();
    if (factor == 0 || s.height % factor != 0 || s.width % factor != 0)
        throw IndivisibleSize("downsample: size " + to_string(s) + " not divisible by " +
                              std::to_string(factor));
    if (factor == 1)
        return x;

    Shape out_shape = s;
    out_shape.height /= factor;
    out_shape.width /= factor;
    const std::size_t mh = out_shape.height;
    const std::size_t mw = out_shape.width;

    const auto in = rfft2(x);
    HalfSpectrum<T> out(out_shape);
    const std::size_t out_cols = out.cols();

    // Target rows map to source rows of the same signed frequency; the target
    // Nyquist row and column stay zero.
    std::vector<long> source_row(mh, -1);
    for (std::size_t q = 0; q < mh; ++q)
        if (!is_nyquist(q, mh))
            source_row[q] = wrap(signed_frequency(q, mh), static_cast<long>(s.height));
    const std::size_t kept_cols = (mw % 2 == 0) ? mw / 2 : out_cols;

    const T gain = T(1) / static_cast<T>(factor * factor);
    for (std::size_t p = 0; p < s.planes(); ++p)
        for (std::size_t qy = 0; qy < mh; ++qy) {
            if (source_row[qy] < 0)
                continue;
            const auto sy = static_cast<std::size_t>(source_row[qy]);
            for (std::size_t qx = 0; qx < kept_cols; ++qx)
                out.at(p, qy, qx) = in.at(p, sy, qx) * gain;
        }
    return irfft2(std::move(out));
}

template <typename T>
BasicTensor<T> upsample(const BasicTensor<T>& x, std::size_t factor)
{
    if (factor == 0)
        throw IndivisibleSize("upsample factor must be positive");
    if (factor == 1)
        return x;
    const Shape& s = x.shape();
    Shape out_shape = s;
    out_shape.height *= factor;
    out_shape.width *= factor;

    // The source Nyquist row and column are dropped, like every boundary bin:
    // their continuation onto the finer grid would need a complex phase, so
    // keeping them breaks exact commutation with sub-pixel translation.
    std::vector<std::optional<std::size_t>> ty(s.height);
    for (std::size_t k = 0; k < s.height; ++k)
        if (!is_nyquist(k, s.height))
            ty[k] = static_cast<std::size_t>(wrap(signed_frequency(k, s.height), static_cast<long>(out_shape.height)));

    const auto in = rfft2(x);
    HalfSpectrum<T> out(out_shape);
    const std::size_t in_cols = in.cols();
    const T gain = static_cast<T>(factor * factor);
    for (std::size_t p = 0; p < s.planes(); ++p)
        for (std::size_t ky = 0; ky < s.height; ++ky) {
            if (!ty[ky])
                continue;
            for (std::size_t kx = 0; kx < in_cols; ++kx)
                if (!is_nyquist(kx, s.width))
                    out.at(p, *ty[ky], kx) = in.at(p, ky, kx) * gain;
        }
    return irfft2(std::move(out));
}

#define UNETAF_INSTANTIATE(T)                                                   \
    template BasicTensor<T> roll(const BasicTensor<T>&, long, long);            \
    template BasicTensor<T> translate(const BasicTensor<T>&, Displacement);     \
    template BasicTensor<T> lowpass(const BasicTensor<T>&, BandSpec);           \
    template BasicTensor<T> downsample(const BasicTensor<T>&, std::size_t);     \
    template BasicTensor<T> upsample(const BasicTensor<T>&, std::size_t);

UNETAF_INSTANTIATE(float)
UNETAF_INSTANTIATE(double)

} // namespace unetaf
