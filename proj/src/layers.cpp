#include "unetaf/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

#include "unetaf/spectral.hpp"

namespace unetaf {

namespace {

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, const char* what)
{
    for (E v : values)
        if (iequals(s, name(v)))
            return v;
    std::string accepted;
    for (E v : values) {
        if (!accepted.empty())
            accepted += ", ";
        accepted += name(v);
    }
    throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "' (expected one of " +
                      accepted + ")");
}

// Index into [0, n) after padding, or -1 for a zero sample.
long pad_index(long i, long n, Padding mode)
{
    if (i >= 0 && i < n)
        return i;
    switch (mode) {
    case Padding::Circular:
        return ((i % n) + n) % n;
    case Padding::Zeros:
        return -1;
    case Padding::Reflect: {
        if (n == 1)
            return 0;
        const long period = 2 * (n - 1);
        long r = ((i % period) + period) % period;
        return r < n ? r : period - r;
    }
    }
    return -1;
}

} // namespace

std::string_view name(Padding p)
{
    switch (p) {
    case Padding::Circular: return "Circular";
    case Padding::Zeros: return "Zeros";
    case Padding::Reflect: return "Reflect";
    }
    return "?";
}

std::string_view name(NormMode m)
{
    switch (m) {
    case NormMode::LayerNormAF: return "LayerNormAF";
    case NormMode::BatchNorm: return "BatchNorm";
    case NormMode::InstanceNorm: return "InstanceNorm";
    case NormMode::LayerNorm: return "LayerNorm";
    case NormMode::None: return "None";
    }
    return "?";
}

std::string_view name(ActivationBase a)
{
    switch (a) {
    case ActivationBase::GELU: return "GELU";
    case ActivationBase::ReLU: return "ReLU";
    case ActivationBase::Poly: return "Poly";
    }
    return "?";
}

std::string_view name(PoolKind k)
{
    switch (k) {
    case PoolKind::BlurPool: return "BlurPool";
    case PoolKind::MaxPool: return "MaxPool";
    case PoolKind::AvgPool: return "AvgPool";
    case PoolKind::MaxBlurPool: return "MaxBlurPool";
    }
    return "?";
}

Padding parse_padding(std::string_view s)
{
    return parse_enum(s, std::array{Padding::Circular, Padding::Zeros, Padding::Reflect}, "padding");
}

NormMode parse_norm(std::string_view s)
{
    return parse_enum(s,
                      std::array{NormMode::LayerNormAF, NormMode::BatchNorm, NormMode::InstanceNorm,
                                 NormMode::LayerNorm, NormMode::None},
                      "normalization");
}

ActivationBase parse_activation(std::string_view s)
{
    return parse_enum(s, std::array{ActivationBase::GELU, ActivationBase::ReLU, ActivationBase::Poly},
                      "activation");
}

PoolKind parse_pooling(std::string_view s)
{
    return parse_enum(
        s, std::array{PoolKind::BlurPool, PoolKind::MaxPool, PoolKind::AvgPool, PoolKind::MaxBlurPool},
        "pooling");
}

// ---------------------------------------------------------------------------
// Convolution

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const ConvParams<T>& p)
{
    const Shape& s = x.shape();
    const Shape& ws = p.weights.shape();
    if (ws.channels != s.channels)
        throw ShapeMismatch("conv2d: weights expect " + std::to_string(ws.channels) + " input channels, got " +
                            std::to_string(s.channels));
    if (ws.height % 2 == 0 || ws.width % 2 == 0)
        throw ShapeMismatch("conv2d: kernel dims must be odd, got " + to_string(ws));
    if (s.height < ws.height || s.width < ws.width)
        throw ShapeMismatch("conv2d: input " + to_string(s) + " smaller than kernel " + to_string(ws));
    if (p.bias.size() != ws.batch)
        throw ShapeMismatch("conv2d: bias length does not match output channels");

    using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using ConstMap = Eigen::Map<const Matrix>;
    using Map = Eigen::Map<Matrix>;

    const long h = static_cast<long>(s.height);
    const long w = static_cast<long>(s.width);
    const long kh = static_cast<long>(ws.height);
    const long kw = static_cast<long>(ws.width);
    const long ry = kh / 2;
    const long rx = kw / 2;
    const std::size_t hw = s.plane_size();
    const std::size_t taps = ws.channels * ws.height * ws.width;

    Shape out_shape{s.batch, ws.batch, s.height, s.width};
    BasicTensor<T> out(out_shape);
    ConstMap weights(p.weights.data().data(), static_cast<long>(ws.batch), static_cast<long>(taps));
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias(p.bias.data(), static_cast<long>(p.bias.size()));

    // Column index maps per horizontal tap offset.
    std::vector<std::vector<long>> col_maps(static_cast<std::size_t>(kw));
    for (long dx = 0; dx < kw; ++dx) {
        auto& m = col_maps[static_cast<std::size_t>(dx)];
        m.resize(static_cast<std::size_t>(w));
        for (long c = 0; c < w; ++c)
            m[static_cast<std::size_t>(c)] = pad_index(c + dx - rx, w, p.padding);
    }

    std::vector<T> cols(kh == 1 && kw == 1 ? 0 : taps * hw);
    for (std::size_t n = 0; n < s.batch; ++n) {
        const T* input = x.data().data() + n * s.channels * hw;
        const T* column_data = input;
        if (!cols.empty()) {
            T* dst = cols.data();
            for (std::size_t c = 0; c < s.channels; ++c) {
                const T* plane = input + c * hw;
                for (long dy = 0; dy < kh; ++dy)
                    for (long dx = 0; dx < kw; ++dx) {
                        const auto& cm = col_maps[static_cast<std::size_t>(dx)];
                        for (long y = 0; y < h; ++y, dst += w) {
                            const long sy = pad_index(y + dy - ry, h, p.padding);
                            if (sy < 0) {
                                std::fill(dst, dst + w, T(0));
                                continue;
                            }
                            const T* row = plane + sy * w;
                            for (long c2 = 0; c2 < w; ++c2) {
                                const long sx = cm[static_cast<std::size_t>(c2)];
                                dst[c2] = sx < 0 ? T(0) : row[sx];
                            }
                        }
                    }
            }
            column_data = cols.data();
        }
        ConstMap columns(column_data, static_cast<long>(taps), static_cast<long>(hw));
        Map result(out.data().data() + n * ws.batch * hw, static_cast<long>(ws.batch), static_cast<long>(hw));
        result.noalias() = weights * columns;
        result.colwise() += bias;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Activations

double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u / std::numbers::sqrt2)); }
double relu(double u) { return u > 0.0 ? u : 0.0; }
double poly(double u) { return u + 0.25 * u * u; }

double apply_base(ActivationBase base, double u)
{
    switch (base) {
    case ActivationBase::GELU: return gelu(u);
    case ActivationBase::ReLU: return relu(u);
    case ActivationBase::Poly: return poly(u);
    }
    return u;
}

namespace {

template <typename T>
void apply_pointwise(BasicTensor<T>& x, ActivationBase base)
{
    for (T& v : x.data())
        v = static_cast<T>(apply_base(base, double(v)));
}

} // namespace

template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& x, const ActivationSpec& s)
{
    if (!s.filtered) {
        BasicTensor<T> out = x;
        apply_pointwise(out, s.base);
        return out;
    }
    if (s.oversample < 2)
        throw ConfigError("filtered activation needs oversample >= 2");
    BasicTensor<T> fine = upsample(x, s.oversample);
    apply_pointwise(fine, s.base);
    return downsample(fine, s.oversample);
}

// ---------------------------------------------------------------------------
// Pooling

namespace {

template <typename T, typename Reduce>
BasicTensor<T> window_pool(const BasicTensor<T>& x, std::size_t f, Reduce reduce)
{
    const Shape& s = x.shape();
    Shape os = s;
    os.height /= f;
    os.width /= f;
    BasicTensor<T> out(os);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = x.plane(p);
        auto dst = out.plane(p);
        for (std::size_t y = 0; y < os.height; ++y)
            for (std::size_t c = 0; c < os.width; ++c) {
                std::vector<T> window;
                window.reserve(f * f);
                for (std::size_t i = 0; i < f; ++i)
                    for (std::size_t j = 0; j < f; ++j)
                        window.push_back(src[(y * f + i) * s.width + c * f + j]);
                dst[y * os.width + c] = reduce(window);
            }
    }
    return out;
}

// Stride-1 max over the f x f window anchored at each pixel, wrapping circularly.
template <typename T>
BasicTensor<T> dense_max(const BasicTensor<T>& x, std::size_t f)
{
    const Shape& s = x.shape();
    BasicTensor<T> out(s);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = x.plane(p);
        auto dst = out.plane(p);
        for (std::size_t y = 0; y < s.height; ++y)
            for (std::size_t c = 0; c < s.width; ++c) {
                T m = src[y * s.width + c];
                for (std::size_t i = 0; i < f; ++i)
                    for (std::size_t j = 0; j < f; ++j)
                        m = std::max(m, src[((y + i) % s.height) * s.width + (c + j) % s.width]);
                dst[y * s.width + c] = m;
            }
    }
    return out;
}

} // namespace

template <typename T>
BasicTensor<T> pool(const BasicTensor<T>& x, const PoolSpec& s)
{
    const Shape& shape = x.shape();
    if (s.factor == 0 || shape.height % s.factor != 0 || shape.width % s.factor != 0)
        throw IndivisibleSize("pool: size " + to_string(shape) + " not divisible by " + std::to_string(s.factor));
    switch (s.kind) {
    case PoolKind::BlurPool:
        return downsample(x, s.factor);
    case PoolKind::MaxPool:
        return window_pool(x, s.factor, [](const std::vector<T>& w) { return *std::max_element(w.begin(), w.end()); });
    case PoolKind::AvgPool:
        return window_pool(x, s.factor, [](const std::vector<T>& w) {
            T sum = 0;
            for (T v : w)
                sum += v;
            return sum / static_cast<T>(w.size());
        });
    case PoolKind::MaxBlurPool:
        return downsample(dense_max(x, s.factor), s.factor);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Upsampling

template <typename T>
BasicTensor<T> zero_insert(const BasicTensor<T>& x)
{
    const Shape& s = x.shape();
    Shape os = s;
    os.height *= 2;
    os.width *= 2;
    BasicTensor<T> out(os);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto src = x.plane(p);
        auto dst = out.plane(p);
        for (std::size_t y = 0; y < s.height; ++y)
            for (std::size_t c = 0; c < s.width; ++c)
                dst[(2 * y) * os.width + 2 * c] = T(4) * src[y * s.width + c];
    }
    return out;
}

template <typename T>
BasicTensor<T> upsample_layer(const BasicTensor<T>& x, bool filtered, const ConvParams<T>& p,
                              bool filter_after_conv)
{
    if (p.in_channels() != x.shape().channels)
        throw ShapeMismatch("upsample_layer: conv expects " + std::to_string(p.in_channels()) +
                            " channels, got " + std::to_string(x.shape().channels));
    if (!filtered)
        return conv2d(zero_insert(x), p);
    if (filter_after_conv)
        return lowpass(conv2d(zero_insert(x), p), BandSpec{x.shape().height, x.shape().width});
    return conv2d(upsample(x, 2), p);
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

template <typename T>
void check_affine(const NormParams<T>& p, std::size_t channels)
{
    if (p.gamma.size() != channels || p.beta.size() != channels)
        throw ShapeMismatch("normalize: gamma/beta length does not match " + std::to_string(channels) +
                            " channels");
}

struct Moments {
    double mean = 0;
    double var = 0;
};

template <typename Iter>
Moments moments(Iter begin, Iter end)
{
    double sum = 0;
    std::size_t n = 0;
    for (auto it = begin; it != end; ++it, ++n)
        sum += double(*it);
    Moments m;
    m.mean = sum / double(n);
    double ss = 0;
    for (auto it = begin; it != end; ++it) {
        const double d = double(*it) - m.mean;
        ss += d * d;
    }
    m.var = ss / double(n);
    return m;
}

// Energy (sum of squares) carried by the Nyquist row and column of one plane,
// by Parseval from the alternating-sign projections.
template <typename T>
double nyquist_energy(const T* x, std::size_t h, std::size_t w)
{
    const bool even_h = h % 2 == 0, even_w = w % 2 == 0;
    if (!even_h && !even_w)
        return 0;
    std::vector<double> rows(h, 0.0), cols(w, 0.0);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const double v = double(x[i * w + j]);
            rows[i] += j % 2 ? -v : v;
            cols[j] += i % 2 ? -v : v;
        }
    double e = 0;
    if (even_w)
        for (double r : rows)
            e += r * r / double(w);
    if (even_h)
        for (double c : cols)
            e += c * c / double(h);
    if (even_h && even_w) {
        double corner = 0;
        for (std::size_t i = 0; i < h; ++i)
            corner += i % 2 ? -rows[i] : rows[i];
        e -= corner * corner / double(h * w);
    }
    return e;
}

} // namespace

template <typename T>
BasicTensor<T> normalize(const BasicTensor<T>& x, const NormParams<T>& p)
{
    const Shape& s = x.shape();
    const std::size_t hw = s.plane_size();
    const double eps = double(p.epsilon);
    if (p.mode != NormMode::None && !(p.epsilon > T(0)))
        throw ConfigError("normalize: epsilon must be positive");

    BasicTensor<T> out(s);
    auto src = x.data();
    auto dst = out.data();

    switch (p.mode) {
    case NormMode::None: {
        if (p.gamma.empty() && p.beta.empty())
            return x;
        check_affine(p, s.channels);
        for (std::size_t n = 0; n < s.batch; ++n)
            for (std::size_t c = 0; c < s.channels; ++c) {
                const std::size_t base = (n * s.channels + c) * hw;
                for (std::size_t i = 0; i < hw; ++i)
                    dst[base + i] = src[base + i] * p.gamma[c] + p.beta[c];
            }
        return out;
    }
    case NormMode::LayerNormAF: {
        check_affine(p, s.channels);
        const std::size_t sample = s.channels * hw;
        for (std::size_t n = 0; n < s.batch; ++n) {
            const auto first = src.begin() + static_cast<long>(n * sample);
            Moments m = moments(first, first + static_cast<long>(sample));
            // Nyquist energy is excluded: translation rescales it by cos^2, so
            // the remaining variance is the exactly shift-invariant statistic.
            double nyq = 0;
            for (std::size_t c = 0; c < s.channels; ++c)
                nyq += nyquist_energy(src.data() + n * sample + c * hw, s.height, s.width);
            m.var = std::max(0.0, m.var - nyq / double(sample));
            const double inv = 1.0 / std::sqrt(m.var + eps);
            for (std::size_t c = 0; c < s.channels; ++c) {
                const std::size_t base = n * sample + c * hw;
                const double g = double(p.gamma[c]) * inv;
                for (std::size_t i = 0; i < hw; ++i)
                    dst[base + i] = static_cast<T>((double(src[base + i]) - m.mean) * g + double(p.beta[c]));
            }
        }
        return out;
    }
    case NormMode::BatchNorm: {
        check_affine(p, s.channels);
        if (p.running_mean.size() != s.channels || p.running_var.size() != s.channels)
            throw ShapeMismatch("normalize: running statistics do not match channel count");
        for (std::size_t n = 0; n < s.batch; ++n)
            for (std::size_t c = 0; c < s.channels; ++c) {
                const std::size_t base = (n * s.channels + c) * hw;
                const double g = double(p.gamma[c]) / std::sqrt(double(p.running_var[c]) + eps);
                const double mu = double(p.running_mean[c]);
                for (std::size_t i = 0; i < hw; ++i)
                    dst[base + i] = static_cast<T>((double(src[base + i]) - mu) * g + double(p.beta[c]));
            }
        return out;
    }
    case NormMode::InstanceNorm: {
        check_affine(p, s.channels);
        for (std::size_t n = 0; n < s.batch; ++n)
            for (std::size_t c = 0; c < s.channels; ++c) {
                const std::size_t base = (n * s.channels + c) * hw;
                const auto first = src.begin() + static_cast<long>(base);
                const Moments m = moments(first, first + static_cast<long>(hw));
                const double g = double(p.gamma[c]) / std::sqrt(m.var + eps);
                for (std::size_t i = 0; i < hw; ++i)
                    dst[base + i] = static_cast<T>((double(src[base + i]) - m.mean) * g + double(p.beta[c]));
            }
        return out;
    }
    case NormMode::LayerNorm: {
        check_affine(p, s.channels);
        const double cn = double(s.channels);
        for (std::size_t n = 0; n < s.batch; ++n)
            for (std::size_t i = 0; i < hw; ++i) {
                const std::size_t base = n * s.channels * hw + i;
                double sum = 0;
                for (std::size_t c = 0; c < s.channels; ++c)
                    sum += double(src[base + c * hw]);
                const double mean = sum / cn;
                double ss = 0;
                for (std::size_t c = 0; c < s.channels; ++c) {
                    const double d = double(src[base + c * hw]) - mean;
                    ss += d * d;
                }
                const double inv = 1.0 / std::sqrt(ss / cn + eps);
                for (std::size_t c = 0; c < s.channels; ++c)
                    dst[base + c * hw] = static_cast<T>((double(src[base + c * hw]) - mean) * inv * double(p.gamma[c]) +
                                                        double(p.beta[c]));
            }
        return out;
    }
    }
    return out;
}

template <typename T>
BasicTensor<T> concat(const BasicTensor<T>& a, const BasicTensor<T>& b)
{
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    if (sa.batch != sb.batch || sa.height != sb.height || sa.width != sb.width)
        throw ShapeMismatch("concat: " + to_string(sa) + " and " + to_string(sb) + " are incompatible");
    Shape os{sa.batch, sa.channels + sb.channels, sa.height, sa.width};
    BasicTensor<T> out(os);
    const std::size_t na = sa.channels * sa.plane_size();
    const std::size_t nb = sb.channels * sb.plane_size();
    auto dst = out.data();
    for (std::size_t n = 0; n < sa.batch; ++n) {
        auto pa = a.data().subspan(n * na, na);
        auto pb = b.data().subspan(n * nb, nb);
        std::copy(pa.begin(), pa.end(), dst.begin() + static_cast<long>(n * (na + nb)));
        std::copy(pb.begin(), pb.end(), dst.begin() + static_cast<long>(n * (na + nb) + na));
    }
    return out;
}

#define UNETAF_INSTANTIATE(T)                                                                             \
    template BasicTensor<T> conv2d(const BasicTensor<T>&, const ConvParams<T>&);                          \
    template BasicTensor<T> activation(const BasicTensor<T>&, const ActivationSpec&);                     \
    template BasicTensor<T> pool(const BasicTensor<T>&, const PoolSpec&);                                 \
    template BasicTensor<T> zero_insert(const BasicTensor<T>&);                                           \
    template BasicTensor<T> upsample_layer(const BasicTensor<T>&, bool, const ConvParams<T>&, bool);      \
    template BasicTensor<T> normalize(const BasicTensor<T>&, const NormParams<T>&);                       \
    template BasicTensor<T> concat(const BasicTensor<T>&, const BasicTensor<T>&);

UNETAF_INSTANTIATE(float)
UNETAF_INSTANTIATE(double)

} // namespace unetaf
