#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "unetaf/degrade.hpp"

using namespace unetaf;
using unetaf::testing::random_tensor;

namespace {

Tensor ramp(std::size_t size)
{
    Tensor x(Shape{1, 1, size, size});
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j)
            x(0, 0, i, j) = double(j) + 100.0 * double(i);
    return x;
}

// Direct 2-D sum with a truncated, renormalized Gaussian and zero padding.
Tensor naive_valid_blur(const Tensor& x, double sigma)
{
    const long r = long(std::ceil(4 * sigma));
    double norm = 0;
    for (long i = -r; i <= r; ++i)
        for (long j = -r; j <= r; ++j)
            norm += std::exp(-double(i * i + j * j) / (2 * sigma * sigma));
    const Shape& s = x.shape();
    Tensor out(s);
    for (std::size_t p = 0; p < s.planes(); ++p)
        for (long y = 0; y < long(s.height); ++y)
            for (long c = 0; c < long(s.width); ++c) {
                double acc = 0;
                for (long i = -r; i <= r; ++i)
                    for (long j = -r; j <= r; ++j) {
                        const long yy = y + i, cc = c + j;
                        if (yy >= 0 && yy < long(s.height) && cc >= 0 && cc < long(s.width))
                            acc += std::exp(-double(i * i + j * j) / (2 * sigma * sigma)) *
                                   x.plane(p)[std::size_t(yy) * s.width + std::size_t(cc)];
                    }
                out.plane(p)[std::size_t(y) * s.width + std::size_t(c)] = acc / norm;
            }
    return out;
}

} // namespace

TEST(Blur, ZeroSigmaIsIdentity)
{
    Tensor x = random_tensor(1, Shape{1, 3, 16, 16});
    EXPECT_EQ(gaussian_blur(x, 0.0, Boundary::Circular).vector(), x.vector());
    EXPECT_EQ(gaussian_blur(x, 0.0, Boundary::Valid).vector(), x.vector());
    EXPECT_THROW(gaussian_blur(x, -1.0, Boundary::Circular), ConfigError);
}

TEST(Blur, CircularPreservesConstants)
{
    Tensor x = Tensor::full(Shape{1, 2, 16, 12}, 0.6);
    EXPECT_LE(max_abs_diff(gaussian_blur(x, 1.0, Boundary::Circular), x), 1e-14);
}

TEST(Blur, CircularImpulseResponseMatchesTransferFunction)
{
    const std::size_t n = 12;
    Tensor x(Shape{1, 1, n, n});
    x(0, 0, 0, 0) = 1;
    Tensor k = gaussian_blur(x, 1.0, Boundary::Circular);
    auto transfer = [&](std::size_t idx) {
        const double f = unetaf::testing::signed_freq(idx, n) / double(n);
        return std::exp(-2 * std::numbers::pi * std::numbers::pi * f * f);
    };
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t c = 0; c < n; ++c) {
            double acc = 0;
            for (std::size_t ky = 0; ky < n; ++ky)
                for (std::size_t kx = 0; kx < n; ++kx)
                    acc += transfer(ky) * transfer(kx) *
                           std::cos(2 * std::numbers::pi * double(ky * y + kx * c) / double(n));
            EXPECT_NEAR(k(0, 0, y, c), acc / double(n * n), 1e-14);
        }
}

TEST(Blur, CircularCommutesWithTranslate)
{
    Rng rng(2);
    for (int i = 0; i < 8; ++i) {
        Tensor x = random_tensor(10 + i, Shape{1, 3, 32, 24});
        const Displacement g{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        EXPECT_LE(max_abs_diff(gaussian_blur(translate(x, g), 1.0, Boundary::Circular),
                               translate(gaussian_blur(x, 1.0, Boundary::Circular), g)),
                  1e-11);
    }
}

TEST(Blur, ValidMatchesDirectTruncatedKernel)
{
    Tensor x = random_tensor(3, Shape{1, 2, 20, 17});
    for (double sigma : {0.6, 1.0, 1.7})
        EXPECT_LE(max_abs_diff(gaussian_blur(x, sigma, Boundary::Valid), naive_valid_blur(x, sigma)), 1e-12);
}

TEST(Blur, ValidBoundaryIsNotTranslationCommuting)
{
    Tensor x = random_tensor(4, Shape{1, 1, 24, 24});
    EXPECT_GT(max_abs_diff(gaussian_blur(translate(x, {3, 0}), 1.0, Boundary::Valid),
                           translate(gaussian_blur(x, 1.0, Boundary::Valid), {3, 0})),
              1e-3);
}

TEST(Noise, ZeroSigmaIsIdentity)
{
    Rng rng(0);
    Tensor x = random_tensor(5, Shape{1, 1, 8, 8});
    EXPECT_EQ(add_noise(x, 0.0, rng).vector(), x.vector());
}

TEST(Noise, SampleStdMatchesSigma)
{
    Rng rng(6);
    Tensor x = random_tensor(6, Shape{1, 3, 128, 128});
    Tensor d = add_noise(x, 0.1, rng) - x;
    double mean = 0;
    for (double v : d.data())
        mean += v;
    mean /= double(d.size());
    double var = 0;
    for (double v : d.data())
        var += (v - mean) * (v - mean);
    EXPECT_NEAR(std::sqrt(var / double(d.size() - 1)), 0.1, 0.002);
}

TEST(Noise, SeedsGiveDifferentFields)
{
    Tensor x(Shape{1, 1, 8, 8});
    Rng a(1), b(2), c(1);
    EXPECT_NE(add_noise(x, 0.1, a).vector(), add_noise(x, 0.1, b).vector());
    Rng a2(1);
    EXPECT_EQ(add_noise(x, 0.1, a2).vector(), add_noise(x, 0.1, c).vector());
}

TEST(Degrade, BlurThenNoise)
{
    Tensor x = random_tensor(7, Shape{1, 3, 16, 16});
    DegradationSpec spec{1.0, 0.05, Boundary::Circular};
    Rng a(9), b(9);
    EXPECT_LE(max_abs_diff(degrade(x, spec, a), add_noise(gaussian_blur(x, 1.0, Boundary::Circular), 0.05, b)),
              0.0);
}

TEST(CropTranslate, ZeroDisplacementIsCenterCrop)
{
    Tensor x = ramp(16);
    Tensor c = crop_translate(x, {0, 0}, 8);
    EXPECT_EQ(c.shape(), (Shape{1, 1, 8, 8}));
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            EXPECT_EQ(c(0, 0, i, j), x(0, 0, i + 4, j + 4));
}

TEST(CropTranslate, WholePixelShiftBringsInNewColumn)
{
    Tensor x = ramp(16);
    Tensor c = crop_translate(x, {1, 0}, 8);
    for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            EXPECT_NEAR(c(0, 0, i, j), x(0, 0, i + 4, j + 3), 1e-12);
    // Column 0 now shows content from column 3 of the source, outside the
    // original window [4, 12).
    EXPECT_NEAR(c(0, 0, 0, 0), 3.0 + 400.0, 1e-12);
}

TEST(CropTranslate, SubPixelShiftMatchesCircularTranslateOfSource)
{
    Tensor x = random_tensor(8, Shape{1, 2, 32, 32});
    const Displacement g{1.25, -0.5};
    Tensor c = crop_translate(x, g, 16);
    Tensor t = translate(x, g);
    for (std::size_t ch = 0; ch < 2; ++ch)
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j)
                EXPECT_NEAR(c(0, ch, i, j), t(0, ch, i + 8, j + 8), 1e-12);
}

TEST(CropTranslate, NotInvertible)
{
    Tensor x = ramp(16);
    Tensor centre = crop_translate(x, {0, 0}, 8);
    Tensor there = crop_translate(x, {2, 0}, 8);
    EXPECT_GT(max_abs_diff(translate(there, {-2, 0}), centre), 1.0);
}

TEST(CropTranslate, MarginErrors)
{
    Tensor x = ramp(16);
    EXPECT_THROW(crop_translate(x, {5, 0}, 8), MarginExceeded);
    EXPECT_THROW(crop_translate(x, {0, -4.5}, 8), MarginExceeded);
    EXPECT_THROW(crop_translate(x, {0, 0}, 17), MarginExceeded);
    EXPECT_NO_THROW(crop_translate(x, {4, -4}, 8));
}
