#include <gtest/gtest.h>

#include <cmath>

#include "unetaf/rng.hpp"
#include "unetaf/tensor.hpp"

using namespace unetaf;

TEST(Tensor, ZeroInitializedWithShape)
{
    Tensor t(Shape{2, 3, 4, 5});
    EXPECT_EQ(t.size(), 120u);
    EXPECT_EQ(t.shape().plane_size(), 20u);
    EXPECT_EQ(t.shape().planes(), 6u);
    EXPECT_EQ(max_abs(t), 0.0);
}

TEST(Tensor, DataLengthMustMatchShape)
{
    EXPECT_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<double>(3)), ShapeMismatch);
    EXPECT_NO_THROW(Tensor(Shape{1, 1, 2, 2}, std::vector<double>(4)));
}

TEST(Tensor, IndexingIsRowMajorNchw)
{
    Tensor t(Shape{2, 2, 3, 4});
    t(1, 0, 2, 3) = 7;
    EXPECT_EQ(t.data()[((1 * 2 + 0) * 3 + 2) * 4 + 3], 7);
    EXPECT_EQ(t.plane(1, 0)[2 * 4 + 3], 7);
}

TEST(Tensor, ArithmeticAndReductions)
{
    Tensor a(Shape{1, 1, 1, 3}, {1, 2, 3});
    Tensor b(Shape{1, 1, 1, 3}, {1, -1, 0.5});
    EXPECT_EQ((a + b).vector(), (std::vector<double>{2, 1, 3.5}));
    EXPECT_EQ((a - b).vector(), (std::vector<double>{0, 3, 2.5}));
    EXPECT_EQ((2.0 * a).vector(), (std::vector<double>{2, 4, 6}));
    EXPECT_EQ(max_abs_diff(a, b), 3.0);
    EXPECT_EQ(squared_norm(a), 14.0);
    EXPECT_EQ(dot(a, b), 0.5);
    EXPECT_THROW(a + Tensor(Shape{1, 1, 3, 1}), ShapeMismatch);
}

TEST(Tensor, SliceBatchAndFiniteness)
{
    Rng rng(3);
    Tensor x = randn<double>(rng, Shape{4, 2, 3, 3});
    Tensor s = slice_batch(x, 1, 3);
    EXPECT_EQ(s.shape(), (Shape{2, 2, 3, 3}));
    EXPECT_EQ(s(0, 1, 2, 2), x(1, 1, 2, 2));
    EXPECT_TRUE(x.all_finite());
    x(0, 0, 0, 0) = std::nan("");
    EXPECT_FALSE(x.all_finite());
    EXPECT_THROW(slice_batch(x, 3, 5), ShapeMismatch);
}

TEST(Rng, SameSeedSameStream)
{
    Rng a(0), b(0);
    EXPECT_EQ(randn<double>(a, Shape{1, 1, 2, 2}).vector(), randn<double>(b, Shape{1, 1, 2, 2}).vector());
}

TEST(Rng, DifferentSeedsDiffer)
{
    Rng a(0), b(1);
    EXPECT_NE(randn<double>(a, Shape{1, 1, 2, 2}).vector(), randn<double>(b, Shape{1, 1, 2, 2}).vector());
}

TEST(Rng, NormalMomentsOverAMillionSamples)
{
    Rng rng(0);
    Tensor x = randn<double>(rng, Shape{1, 1, 1000, 1000});
    double mean = 0;
    for (double v : x.data())
        mean += v;
    mean /= double(x.size());
    double var = 0;
    for (double v : x.data())
        var += (v - mean) * (v - mean);
    var /= double(x.size() - 1);
    EXPECT_LT(std::abs(mean), 0.01);
    EXPECT_LT(std::abs(var - 1.0), 0.02);
}

TEST(Rng, UniformStaysInRange)
{
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform(-2, 3);
        ASSERT_GE(u, -2);
        ASSERT_LT(u, 3);
    }
}
