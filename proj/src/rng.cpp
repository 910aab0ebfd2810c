#include "unetaf/rng.hpp"

#include <cmath>

namespace unetaf {

double Rng::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0, v = 0, s = 0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

template <typename T>
BasicTensor<T> randn(Rng& rng, Shape shape)
{
    BasicTensor<T> t(shape);
    for (T& v : t.data())
        v = static_cast<T>(rng.normal());
    return t;
}

template BasicTensor<float> randn(Rng&, Shape);
template BasicTensor<double> randn(Rng&, Shape);

} // namespace unetaf
