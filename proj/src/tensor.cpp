#include "unetaf/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace unetaf {

std::string to_string(const Shape& s)
{
    std::ostringstream os;
    os << '(' << s.batch << ", " << s.channels << ", " << s.height << ", " << s.width << ')';
    return os.str();
}

void require_same_shape(const Shape& a, const Shape& b, const char* what)
{
    if (!(a == b))
        throw ShapeMismatch(std::string(what) + ": shapes " + to_string(a) + " and " + to_string(b) +
                            " differ");
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data))
{
    if (data_.size() != shape_.numel())
        throw ShapeMismatch("tensor data length " + std::to_string(data_.size()) +
                            " does not match shape " + to_string(shape_));
}

template <typename T>
bool BasicTensor<T>::all_finite() const
{
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
BasicTensor<T> operator+(const BasicTensor<T>& a, const BasicTensor<T>& b)
{
    require_same_shape(a.shape(), b.shape(), "add");
    BasicTensor<T> out(a.shape());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = x[i] + y[i];
    return out;
}

template <typename T>
BasicTensor<T> operator-(const BasicTensor<T>& a, const BasicTensor<T>& b)
{
    require_same_shape(a.shape(), b.shape(), "subtract");
    BasicTensor<T> out(a.shape());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = x[i] - y[i];
    return out;
}

template <typename T>
BasicTensor<T> operator*(T scale, const BasicTensor<T>& a)
{
    BasicTensor<T> out(a.shape());
    auto o = out.data();
    auto x = a.data();
    for (std::size_t i = 0; i < o.size(); ++i)
        o[i] = scale * x[i];
    return out;
}

template <typename T>
T max_abs_diff(const BasicTensor<T>& a, const BasicTensor<T>& b)
{
    require_same_shape(a.shape(), b.shape(), "max_abs_diff");
    T m = 0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

template <typename T>
T max_abs(const BasicTensor<T>& a)
{
    T m = 0;
    for (T v : a.data())
        m = std::max(m, std::abs(v));
    return m;
}

template <typename T>
double squared_norm(const BasicTensor<T>& a)
{
    double s = 0;
    for (T v : a.data())
        s += double(v) * double(v);
    return s;
}

template <typename T>
double dot(const BasicTensor<T>& a, const BasicTensor<T>& b)
{
    require_same_shape(a.shape(), b.shape(), "dot");
    double s = 0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i)
        s += double(x[i]) * double(y[i]);
    return s;
}

template <typename T>
BasicTensor<T> slice_batch(const BasicTensor<T>& x, std::size_t begin, std::size_t end)
{
    const Shape& s = x.shape();
    if (begin > end || end > s.batch)
        throw ShapeMismatch("batch slice out of range for shape " + to_string(s));
    Shape out_shape = s;
    out_shape.batch = end - begin;
    const std::size_t stride = s.channels * s.plane_size();
    auto src = x.data();
    return BasicTensor<T>(out_shape, std::vector<T>(src.begin() + begin * stride, src.begin() + end * stride));
}

#define UNETAF_INSTANTIATE(T)                                                                     \
    template class BasicTensor<T>;                                                                \
    template BasicTensor<T> operator+(const BasicTensor<T>&, const BasicTensor<T>&);              \
    template BasicTensor<T> operator-(const BasicTensor<T>&, const BasicTensor<T>&);              \
    template BasicTensor<T> operator*(T, const BasicTensor<T>&);                                  \
    template T max_abs_diff(const BasicTensor<T>&, const BasicTensor<T>&);                        \
    template T max_abs(const BasicTensor<T>&);                                                    \
    template double squared_norm(const BasicTensor<T>&);                                          \
    template double dot(const BasicTensor<T>&, const BasicTensor<T>&);                            \
    template BasicTensor<T> slice_batch(const BasicTensor<T>&, std::size_t, std::size_t);

UNETAF_INSTANTIATE(float)
UNETAF_INSTANTIATE(double)

} // namespace unetaf
