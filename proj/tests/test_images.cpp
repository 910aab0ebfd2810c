#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"
#include "unetaf/images.hpp"
#include "unetaf/spectral.hpp"

using namespace unetaf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir()
{
    const auto dir = fs::temp_directory_path() / "unetaf_images_test";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST(Synthetic, ShapeRangeAndDeterminism)
{
    Rng a(1), b(1);
    Tensor x = synthetic_images<double>(a, 3, 3, 32);
    EXPECT_EQ(x.shape(), (Shape{3, 3, 32, 32}));
    EXPECT_EQ(x.vector(), synthetic_images<double>(b, 3, 3, 32).vector());
    for (std::size_t n = 0; n < 3; ++n) {
        double lo = 1, hi = 0;
        for (std::size_t c = 0; c < 3; ++c)
            for (double v : x.plane(n, c)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        EXPECT_NEAR(lo, 0.0, 1e-12);
        EXPECT_NEAR(hi, 1.0, 1e-12);
    }
}

TEST(Synthetic, HalfBandLimited)
{
    Rng rng(2);
    Tensor x = synthetic_images<double>(rng, 2, 3, 32);
    EXPECT_LE(max_abs_diff(lowpass(x, BandSpec{16, 16}), x), 1e-12);
}

TEST(Png, SixteenBitRoundTripIsNearExact)
{
    Rng rng(3);
    Tensor x = synthetic_images<double>(rng, 1, 3, 16);
    const auto path = temp_dir() / "rt16.png";
    write_png(path, x, 16);
    Tensor back = read_png(path);
    EXPECT_EQ(back.shape(), x.shape());
    EXPECT_LE(max_abs_diff(back, x), 0.5 / 65535 + 1e-12);
}

TEST(Png, EightBitQuantizationBound)
{
    Rng rng(4);
    Tensor x = synthetic_images<double>(rng, 1, 3, 16);
    const auto path = temp_dir() / "rt8.png";
    write_png(path, x, 8);
    EXPECT_LE(max_abs_diff(read_png(path), x), 1.0 / 255);
}

TEST(Png, ClampsOutOfRangeValues)
{
    Tensor x = Tensor::full(Shape{1, 3, 4, 4}, 1.7);
    x(0, 0, 0, 0) = -0.3;
    const auto path = temp_dir() / "clamp.png";
    write_png(path, x, 16);
    Tensor back = read_png(path);
    EXPECT_EQ(back(0, 0, 0, 0), 0.0);
    EXPECT_EQ(back(0, 1, 2, 2), 1.0);
}

TEST(Png, Errors)
{
    EXPECT_THROW(read_png(temp_dir() / "missing.png"), IoError);
    const auto bogus = temp_dir() / "bogus.png";
    {
        std::ofstream out(bogus);
        out << "not a png";
    }
    EXPECT_THROW(read_png(bogus), FormatError);
    EXPECT_THROW(write_png(temp_dir() / "x.png", Tensor(Shape{2, 3, 4, 4})), ShapeMismatch);
    EXPECT_THROW(write_png(temp_dir() / "x.png", Tensor(Shape{1, 3, 4, 4}), 12), ConfigError);
}
