#pragma once

#include <cstddef>
#include <filesystem>

#include "unetaf/rng.hpp"
#include "unetaf/tensor.hpp"

namespace unetaf {

/// Seeded test images: white noise low-passed to half band (|k| < size/4),
/// each image min-max rescaled to [0, 1].
template <typename T>
BasicTensor<T> synthetic_images(Rng& rng, std::size_t count, std::size_t channels, std::size_t size);

/// Reads an 8- or 16-bit PNG as a (1, 3, H, W) tensor in [0, 1]. Grayscale is
/// expanded to RGB and alpha dropped. Throws IoError / FormatError.
Tensor read_png(const std::filesystem::path& path);

/// Writes sample 0 of a 1- or 3-channel tensor, clamped to [0, 1], at 8 or 16 bits.
void write_png(const std::filesystem::path& path, const Tensor& image, int bit_depth = 16);

} // namespace unetaf
