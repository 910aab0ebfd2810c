#pragma once

#include <cstdint>
#include <random>

#include "unetaf/tensor.hpp"

namespace unetaf {

/// Seeded 64-bit Mersenne Twister with a portable normal sampler.
///
/// Normals come from the Marsaglia polar method implemented here rather than
/// std::normal_distribution, whose algorithm is library-specific; the stream is
/// therefore identical for a given seed on any standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// I.i.d. standard normal entries.
template <typename T>
BasicTensor<T> randn(Rng& rng, Shape shape);

} // namespace unetaf
