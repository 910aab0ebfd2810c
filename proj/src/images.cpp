#include "unetaf/images.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <vector>

#include "unetaf/spectral.hpp"

namespace unetaf {

template <typename T>
BasicTensor<T> synthetic_images(Rng& rng, std::size_t count, std::size_t channels, std::size_t size)
{
    const Shape shape{count, channels, size, size};
    auto noise = randn<double>(rng, shape);
    auto smooth = lowpass(noise, BandSpec{std::max<std::size_t>(1, size / 2), std::max<std::size_t>(1, size / 2)});
    const std::size_t per_image = channels * size * size;
    auto data = smooth.data();
    for (std::size_t n = 0; n < count; ++n) {
        auto img = data.subspan(n * per_image, per_image);
        const auto [lo, hi] = std::minmax_element(img.begin(), img.end());
        const double a = *lo;
        const double range = *hi - *lo;
        for (double& v : img)
            v = range > 0 ? (v - a) / range : 0.5;
    }
    return smooth.template cast<T>();
}

template BasicTensor<float> synthetic_images(Rng&, std::size_t, std::size_t, std::size_t);
template BasicTensor<double> synthetic_images(Rng&, std::size_t, std::size_t, std::size_t);

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

Tensor read_png(const std::filesystem::path& path)
{
    File file(std::fopen(path.c_str(), "rb"));
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for reading");

    png_byte signature[8];
    if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
        throw FormatError(path.string() + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialisation failed");
    }

    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int depth = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": corrupt PNG data");
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    int color = png_get_color_type(png, info);
    depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_strip_alpha(png);
    if (depth == 16)
        png_set_swap(png);  // little-endian samples in memory
    png_read_update_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    depth = png_get_bit_depth(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    pixels.resize(rowbytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y)
        rows[y] = pixels.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor out(Shape{1, 3, height, width});
    const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x)
            for (std::size_t c = 0; c < 3; ++c) {
                const std::size_t i = x * 3 + c;
                double v = 0;
                if (depth == 16) {
                    const auto* row = reinterpret_cast<const std::uint16_t*>(rows[y]);
                    v = row[i];
                } else {
                    v = rows[y][i];
                }
                out(0, c, y, x) = v * scale;
            }
    return out;
}

void write_png(const std::filesystem::path& path, const Tensor& image, int bit_depth)
{
    const Shape& s = image.shape();
    if (s.batch != 1 || (s.channels != 1 && s.channels != 3))
        throw ShapeMismatch("write_png needs a single 1- or 3-channel image, got " + to_string(s));
    if (bit_depth != 8 && bit_depth != 16)
        throw ConfigError("PNG bit depth must be 8 or 16");

    File file(std::fopen(path.c_str(), "wb"));
    if (!file)
        throw IoError("cannot open '" + path.string() + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialisation failed");
    }

    const std::size_t bytes = bit_depth / 8;
    const std::size_t rowbytes = s.width * s.channels * bytes;
    std::vector<std::uint8_t> pixels(rowbytes * s.height);
    const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
    for (std::size_t y = 0; y < s.height; ++y)
        for (std::size_t x = 0; x < s.width; ++x)
            for (std::size_t c = 0; c < s.channels; ++c) {
                const double v = std::clamp(image(0, c, y, x), 0.0, 1.0);
                const auto q = static_cast<std::uint32_t>(std::lround(v * maxval));
                std::uint8_t* dst = pixels.data() + y * rowbytes + (x * s.channels + c) * bytes;
                if (bit_depth == 16) {
                    dst[0] = static_cast<std::uint8_t>(q >> 8);  // PNG is big-endian
                    dst[1] = static_cast<std::uint8_t>(q & 0xff);
                } else {
                    dst[0] = static_cast<std::uint8_t>(q);
                }
            }
    std::vector<png_bytep> rows(s.height);
    for (std::size_t y = 0; y < s.height; ++y)
        rows[y] = pixels.data() + y * rowbytes;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing '" + path.string() + "'");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(s.width), static_cast<png_uint_32>(s.height), bit_depth,
                 s.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace unetaf
