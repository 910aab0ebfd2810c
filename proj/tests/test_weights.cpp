#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "unetaf/model.hpp"
#include "unetaf/weights.hpp"

using namespace unetaf;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "unetaf_weights_test";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<unsigned char> read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

} // namespace

TEST(WeightStore, SetValidatesElementCount)
{
    WeightStore w;
    EXPECT_THROW(w.set("a", ParamArray{{2, 2}, {1, 2, 3}}), ShapeMismatch);
    w.set("a", ParamArray{{2, 2}, {1, 2, 3, 4}});
    EXPECT_TRUE(w.contains("a"));
    EXPECT_THROW(w.at("b"), ShapeMismatch);
}

TEST(WeightFile, ExactByteLayout)
{
    WeightStore w;
    w.set("b", ParamArray{{2}, {1.0, -2.0}});
    w.set("a", ParamArray{{}, {0.5}});
    const auto path = temp_file("layout.afuw");
    save_weights(w, path);
    const auto bytes = read_bytes(path);

    std::vector<unsigned char> expected = {'A', 'F', 'U', 'W', 1, 0, 0, 0, 2, 0, 0, 0};
    auto push_f64 = [&](double v) {
        unsigned char b[8];
        std::memcpy(b, &v, 8);
        expected.insert(expected.end(), b, b + 8);
    };
    expected.insert(expected.end(), {1, 0, 'a', 0});
    push_f64(0.5);
    expected.insert(expected.end(), {1, 0, 'b', 1, 2, 0, 0, 0, 0, 0, 0, 0});
    push_f64(1.0);
    push_f64(-2.0);
    EXPECT_EQ(bytes, expected);
}

TEST(WeightFile, RoundTripIsBitExact)
{
    Rng rng(3);
    const auto w = init(preset(Preset::Jin), rng);
    const auto path = temp_file("jin.afuw");
    save_weights(w, path);
    const auto back = load_weights(path);
    EXPECT_EQ(back, w);
    EXPECT_NO_THROW(check_weights(preset(Preset::Jin), back));
}

TEST(WeightFile, SpecialValuesSurvive)
{
    WeightStore w;
    w.set("x", ParamArray{{3}, {-0.0, 1e-310, 1.7976931348623157e308}});
    const auto path = temp_file("special.afuw");
    save_weights(w, path);
    const auto back = load_weights(path).at("x").values;
    EXPECT_TRUE(std::signbit(back[0]));
    EXPECT_EQ(back[1], 1e-310);
    EXPECT_EQ(back[2], 1.7976931348623157e308);
}

TEST(WeightFile, CorruptFilesAreFormatErrors)
{
    Rng rng(4);
    const auto w = init(preset(Preset::AF), rng);
    const auto path = temp_file("corrupt.afuw");
    save_weights(w, path);
    const auto good = read_bytes(path);

    auto truncated = good;
    truncated.resize(good.size() - 5);
    write_bytes(path, truncated);
    EXPECT_THROW(load_weights(path), FormatError);

    auto bad_magic = good;
    bad_magic[0] = 'X';
    write_bytes(path, bad_magic);
    EXPECT_THROW(load_weights(path), FormatError);

    auto bad_version = good;
    bad_version[4] = 2;
    write_bytes(path, bad_version);
    EXPECT_THROW(load_weights(path), FormatError);

    auto trailing = good;
    trailing.push_back(0);
    write_bytes(path, trailing);
    EXPECT_THROW(load_weights(path), FormatError);

    write_bytes(path, {});
    EXPECT_THROW(load_weights(path), FormatError);
}

TEST(WeightFile, MismatchedConfigIsShapeMismatch)
{
    Rng rng(5);
    const auto path = temp_file("af.afuw");
    save_weights(init(preset(Preset::AF), rng), path);
    auto small = preset(Preset::AF);
    small.base_channels = 8;
    EXPECT_THROW(check_weights(small, load_weights(path)), ShapeMismatch);
    EXPECT_THROW(check_weights(preset(Preset::Jin), load_weights(path)), ShapeMismatch);
}

TEST(WeightFile, MissingFileIsIoError)
{
    EXPECT_THROW(load_weights(temp_file("does-not-exist.afuw")), IoError);
    WeightStore w;
    EXPECT_THROW(save_weights(w, fs::path("/nonexistent-dir/x.afuw")), IoError);
}
