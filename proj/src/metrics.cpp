#include "unetaf/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace unetaf {

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kWindowSigma = 1.5;

double mse_to_db(double mse, double peak)
{
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / std::sqrt(mse));
}

std::vector<double> gaussian_window()
{
    std::vector<double> w(kWindow);
    double sum = 0;
    const double centre = double(kWindow / 2);
    for (std::size_t i = 0; i < kWindow; ++i) {
        const double d = double(i) - centre;
        w[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
        sum += w[i];
    }
    for (double& v : w)
        v /= sum;
    return w;
}

// Separable valid-mode filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h, std::size_t w,
                                 const std::vector<double>& k)
{
    const std::size_t ow = w - kWindow + 1;
    const std::size_t oh = h - kWindow + 1;
    std::vector<double> rows(h * ow);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0;
            for (std::size_t i = 0; i < kWindow; ++i)
                acc += k[i] * plane[y * w + x + i];
            rows[y * ow + x] = acc;
        }
    std::vector<double> out(oh * ow);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double acc = 0;
            for (std::size_t i = 0; i < kWindow; ++i)
                acc += k[i] * rows[(y + i) * ow + x];
            out[y * ow + x] = acc;
        }
    return out;
}

} // namespace

template <typename T>
double psnr(const BasicTensor<T>& a, const BasicTensor<T>& b, double peak)
{
    require_same_shape(a.shape(), b.shape(), "psnr");
    long double ss = 0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double d = static_cast<long double>(x[i]) - static_cast<long double>(y[i]);
        ss += d * d;
    }
    return mse_to_db(static_cast<double>(ss / static_cast<long double>(x.size())), peak);
}

template <typename T>
double psnr_sample(const BasicTensor<T>& a, const BasicTensor<T>& b, std::size_t n, double peak)
{
    require_same_shape(a.shape(), b.shape(), "psnr");
    const std::size_t len = a.shape().channels * a.shape().plane_size();
    auto x = a.data().subspan(n * len, len);
    auto y = b.data().subspan(n * len, len);
    long double ss = 0;
    for (std::size_t i = 0; i < len; ++i) {
        const long double d = static_cast<long double>(x[i]) - static_cast<long double>(y[i]);
        ss += d * d;
    }
    return mse_to_db(static_cast<double>(ss / static_cast<long double>(len)), peak);
}

template <typename T>
double ssim(const BasicTensor<T>& a, const BasicTensor<T>& b, double peak)
{
    require_same_shape(a.shape(), b.shape(), "ssim");
    const Shape& s = a.shape();
    if (s.height < kWindow || s.width < kWindow)
        throw ShapeMismatch("ssim needs spatial dims >= 11, got " + to_string(s));

    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);
    const auto k = gaussian_window();
    const std::size_t hw = s.plane_size();

    double total = 0;
    std::size_t count = 0;
    std::vector<double> pa(hw), pb(hw), aa(hw), bb(hw), ab(hw);
    for (std::size_t p = 0; p < s.planes(); ++p) {
        auto xa = a.plane(p);
        auto xb = b.plane(p);
        for (std::size_t i = 0; i < hw; ++i) {
            pa[i] = double(xa[i]);
            pb[i] = double(xb[i]);
            aa[i] = pa[i] * pa[i];
            bb[i] = pb[i] * pb[i];
            ab[i] = pa[i] * pb[i];
        }
        const auto mu_a = filter_valid(pa, s.height, s.width, k);
        const auto mu_b = filter_valid(pb, s.height, s.width, k);
        const auto e_aa = filter_valid(aa, s.height, s.width, k);
        const auto e_bb = filter_valid(bb, s.height, s.width, k);
        const auto e_ab = filter_valid(ab, s.height, s.width, k);
        for (std::size_t i = 0; i < mu_a.size(); ++i) {
            const double ma = mu_a[i];
            const double mb = mu_b[i];
            const double va = e_aa[i] - ma * ma;
            const double vb = e_bb[i] - mb * mb;
            const double cov = e_ab[i] - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        }
        count += mu_a.size();
    }
    return total / double(count);
}

template double psnr(const BasicTensor<float>&, const BasicTensor<float>&, double);
template double psnr(const BasicTensor<double>&, const BasicTensor<double>&, double);
template double psnr_sample(const BasicTensor<float>&, const BasicTensor<float>&, std::size_t, double);
template double psnr_sample(const BasicTensor<double>&, const BasicTensor<double>&, std::size_t, double);
template double ssim(const BasicTensor<float>&, const BasicTensor<float>&, double);
template double ssim(const BasicTensor<double>&, const BasicTensor<double>&, double);

} // namespace unetaf
