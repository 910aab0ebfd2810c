#include "unetaf/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace unetaf {

namespace {

template <typename T>
struct Fftw;

template <>
struct Fftw<double> {
    using plan = fftw_plan;
    using complex = fftw_complex;
    static plan make(int rank, const int* n, int howmany, complex* buf, int sign)
    {
        return fftw_plan_many_dft(rank, n, howmany, buf, nullptr, 1, n[0] * n[1], buf, nullptr, 1,
                                  n[0] * n[1], sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static plan make_r2c(const int* n, int howmany, double* in, complex* out)
    {
        return fftw_plan_many_dft_r2c(2, n, howmany, in, nullptr, 1, n[0] * n[1], out, nullptr, 1,
                                      n[0] * (n[1] / 2 + 1), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static plan make_c2r(const int* n, int howmany, complex* in, double* out)
    {
        return fftw_plan_many_dft_c2r(2, n, howmany, in, nullptr, 1, n[0] * (n[1] / 2 + 1), out, nullptr, 1,
                                      n[0] * n[1], FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void execute(plan p, complex* data) { fftw_execute_dft(p, data, data); }
    static void execute_r2c(plan p, double* in, complex* out) { fftw_execute_dft_r2c(p, in, out); }
    static void execute_c2r(plan p, complex* in, double* out) { fftw_execute_dft_c2r(p, in, out); }
    static complex* alloc(std::size_t n) { return fftw_alloc_complex(n); }
    static double* alloc_real(std::size_t n) { return fftw_alloc_real(n); }
    static void release(complex* p) { fftw_free(p); }
    static void release(double* p) { fftw_free(p); }
};

template <>
struct Fftw<float> {
    using plan = fftwf_plan;
    using complex = fftwf_complex;
    static plan make(int rank, const int* n, int howmany, complex* buf, int sign)
    {
        return fftwf_plan_many_dft(rank, n, howmany, buf, nullptr, 1, n[0] * n[1], buf, nullptr, 1,
                                   n[0] * n[1], sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static plan make_r2c(const int* n, int howmany, float* in, complex* out)
    {
        return fftwf_plan_many_dft_r2c(2, n, howmany, in, nullptr, 1, n[0] * n[1], out, nullptr, 1,
                                       n[0] * (n[1] / 2 + 1), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static plan make_c2r(const int* n, int howmany, complex* in, float* out)
    {
        return fftwf_plan_many_dft_c2r(2, n, howmany, in, nullptr, 1, n[0] * (n[1] / 2 + 1), out, nullptr, 1,
                                       n[0] * n[1], FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    static void execute(plan p, complex* data) { fftwf_execute_dft(p, data, data); }
    static void execute_r2c(plan p, float* in, complex* out) { fftwf_execute_dft_r2c(p, in, out); }
    static void execute_c2r(plan p, complex* in, float* out) { fftwf_execute_dft_c2r(p, in, out); }
    static complex* alloc(std::size_t n) { return fftwf_alloc_complex(n); }
    static float* alloc_real(std::size_t n) { return fftwf_alloc_real(n); }
    static void release(complex* p) { fftwf_free(p); }
    static void release(float* p) { fftwf_free(p); }
};

// The FFTW planner is not re-entrant; execution of an existing plan is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

enum class PlanKind { C2CForward, C2CInverse, R2C, C2R };

template <typename T>
typename Fftw<T>::plan get_plan(std::size_t planes, std::size_t height, std::size_t width, PlanKind kind)
{
    using Key = std::tuple<std::size_t, std::size_t, std::size_t, PlanKind>;
    static std::map<Key, typename Fftw<T>::plan> cache;

    std::lock_guard lock(planner_mutex());
    const Key key{planes, height, width, kind};
    if (auto it = cache.find(key); it != cache.end())
        return it->second;

    const int n[2] = {static_cast<int>(height), static_cast<int>(width)};
    const int howmany = static_cast<int>(planes);
    auto* scratch = Fftw<T>::alloc(planes * height * (width / 2 + 1) * 2 + planes * height * width);
    auto* real_scratch = Fftw<T>::alloc_real(planes * height * width);
    typename Fftw<T>::plan plan = nullptr;
    switch (kind) {
    case PlanKind::C2CForward: plan = Fftw<T>::make(2, n, howmany, scratch, FFTW_FORWARD); break;
    case PlanKind::C2CInverse: plan = Fftw<T>::make(2, n, howmany, scratch, FFTW_BACKWARD); break;
    case PlanKind::R2C: plan = Fftw<T>::make_r2c(n, howmany, real_scratch, scratch); break;
    case PlanKind::C2R: plan = Fftw<T>::make_c2r(n, howmany, scratch, real_scratch); break;
    }
    Fftw<T>::release(scratch);
    Fftw<T>::release(real_scratch);
    if (plan == nullptr)
        throw Error("FFTW failed to create a plan");
    cache.emplace(key, plan);
    return plan;
}

} // namespace

template <typename T>
void fft2_planes(std::span<std::complex<T>> data, std::size_t planes, std::size_t height,
                 std::size_t width, FftDirection direction)
{
    if (planes == 0 || height == 0 || width == 0)
        return;
    if (data.size() != planes * height * width)
        throw ShapeMismatch("fft2_planes: buffer length does not match plane geometry");
    const PlanKind kind = direction == FftDirection::Forward ? PlanKind::C2CForward : PlanKind::C2CInverse;
    auto plan = get_plan<T>(planes, height, width, kind);
    Fftw<T>::execute(plan, reinterpret_cast<typename Fftw<T>::complex*>(data.data()));
}

template <typename T>
BasicSpectrum<T> fft2(const BasicTensor<T>& x)
{
    const Shape& s = x.shape();
    BasicSpectrum<T> out(s);
    auto src = x.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = std::complex<T>(src[i], T(0));
    fft2_planes<T>(dst, s.planes(), s.height, s.width, FftDirection::Forward);
    return out;
}

template <typename T>
HalfSpectrum<T> rfft2(const BasicTensor<T>& x)
{
    const Shape& s = x.shape();
    HalfSpectrum<T> out(s);
    if (s.numel() == 0)
        return out;
    auto plan = get_plan<T>(s.planes(), s.height, s.width, PlanKind::R2C);
    // r2c plans leave their input untouched.
    Fftw<T>::execute_r2c(plan, const_cast<T*>(x.data().data()),
                         reinterpret_cast<typename Fftw<T>::complex*>(out.data().data()));
    return out;
}

template <typename T>
BasicTensor<T> irfft2(HalfSpectrum<T>&& s)
{
    const Shape& shape = s.shape();
    BasicTensor<T> out(shape);
    if (shape.numel() == 0)
        return out;
    auto plan = get_plan<T>(shape.planes(), shape.height, shape.width, PlanKind::C2R);
    Fftw<T>::execute_c2r(plan, reinterpret_cast<typename Fftw<T>::complex*>(s.data().data()), out.data().data());
    const T norm = T(1) / static_cast<T>(shape.plane_size());
    for (T& v : out.data())
        v *= norm;
    return out;
}

template <typename T>
T hermitian_tolerance(T scale)
{
    // 1e-9 absolute for unit-scale double data, growing with magnitude.
    const T base = std::is_same_v<T, double> ? T(1e-9) : T(1e-3);
    return base * std::max(T(1), scale);
}

template <typename T>
BasicTensor<T> ifft2(const BasicSpectrum<T>& s)
{
    const Shape& shape = s.shape();
    std::vector<std::complex<T>> work(s.data().begin(), s.data().end());
    fft2_planes<T>(work, shape.planes(), shape.height, shape.width, FftDirection::Inverse);

    const T norm = T(1) / static_cast<T>(shape.plane_size());
    BasicTensor<T> out(shape);
    auto dst = out.data();
    T residue = 0;
    T magnitude = 0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        dst[i] = work[i].real() * norm;
        residue = std::max(residue, std::abs(work[i].imag() * norm));
        magnitude = std::max(magnitude, std::abs(dst[i]));
    }
    if (!(residue <= hermitian_tolerance(magnitude)))
        throw NonHermitianSpectrum("inverse DFT imaginary residue " + std::to_string(residue) +
                                   " exceeds tolerance");
    return out;
}

template void fft2_planes<float>(std::span<std::complex<float>>, std::size_t, std::size_t, std::size_t,
                                 FftDirection);
template void fft2_planes<double>(std::span<std::complex<double>>, std::size_t, std::size_t,
                                  std::size_t, FftDirection);
template BasicSpectrum<float> fft2(const BasicTensor<float>&);
template BasicSpectrum<double> fft2(const BasicTensor<double>&);
template BasicTensor<float> ifft2(const BasicSpectrum<float>&);
template BasicTensor<double> ifft2(const BasicSpectrum<double>&);
template HalfSpectrum<float> rfft2(const BasicTensor<float>&);
template HalfSpectrum<double> rfft2(const BasicTensor<double>&);
template BasicTensor<float> irfft2(HalfSpectrum<float>&&);
template BasicTensor<double> irfft2(HalfSpectrum<double>&&);
template float hermitian_tolerance(float);
template double hermitian_tolerance(double);

} // namespace unetaf
