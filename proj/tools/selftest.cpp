#include "selftest.hpp"

#include <fmt/format.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <vector>

#include <unistd.h>

#include "unetaf/degrade.hpp"
#include "unetaf/equiv.hpp"
#include "unetaf/fft.hpp"
#include "unetaf/images.hpp"
#include "unetaf/metrics.hpp"
#include "unetaf/model.hpp"

namespace unetaf::cli {

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

// Tolerances per precision. Single-precision values follow from a unit
// roundoff of 6e-8 amplified by FFT depth and network accumulation.
struct Tolerances {
    double exact;     // FFT round-trips, resampling identities
    double layer;     // single-layer commutation
    double model;     // whole-pixel network commutation
    double af_db;     // minimum EQUIV for the alias-free preset
};

template <typename T>
Tolerances tolerances()
{
    if constexpr (std::is_same_v<T, float>)
        return {2e-5, 1e-4, 1e-3, 60.0};
    else
        return {1e-11, 1e-9, 1e-8, 70.0};
}

template <typename T>
BasicTensor<T> random(std::uint64_t seed, Shape s)
{
    Rng rng(seed);
    return randn<T>(rng, s);
}

// Random input without energy in the Nyquist row/column, the subspace on
// which translation is a unitary group action.
template <typename T>
BasicTensor<T> random_in_band(std::uint64_t seed, Shape s)
{
    return lowpass(random<T>(seed, s), BandSpec{s.height, s.width});
}

Outcome bound(double value, double limit, const char* what = "max-abs error")
{
    return {value <= limit, fmt::format("{} {:.2e} <= {:.0e}", what, value, limit)};
}

template <typename T>
std::vector<std::pair<std::string, std::function<Outcome()>>> checks(const fs::path& scratch)
{
    const auto tol = tolerances<T>();
    std::vector<std::pair<std::string, std::function<Outcome()>>> list;

    list.emplace_back("fft round trip, sizes 1..32", [=] {
        double worst = 0;
        for (std::size_t n = 1; n <= 32; ++n) {
            auto x = random<T>(n, Shape{1, 1, n, n + 3});
            worst = std::max(worst, double(max_abs_diff(ifft2(fft2(x)), x)));
        }
        return bound(worst, tol.exact);
    });
    list.emplace_back("fft matches direct DFT, sizes <= 8", [=] {
        double worst = 0;
        for (std::size_t n = 1; n <= 8; ++n) {
            auto x = random<T>(100 + n, Shape{1, 1, n, n});
            auto s = fft2(x);
            for (std::size_t ky = 0; ky < n; ++ky)
                for (std::size_t kx = 0; kx < n; ++kx) {
                    std::complex<double> acc = 0;
                    for (std::size_t y = 0; y < n; ++y)
                        for (std::size_t c = 0; c < n; ++c)
                            acc += double(x(0, 0, y, c)) *
                                   std::polar(1.0, -2 * std::numbers::pi * double((ky * y + kx * c) % n) / double(n));
                    worst = std::max(worst, std::abs(std::complex<double>(s.at(0, ky, kx)) - acc));
                }
        }
        return bound(worst, tol.exact * 10);
    });
    list.emplace_back("translate group law and inverse, Nyquist-free input", [=] {
        auto x = random_in_band<T>(1, Shape{1, 2, 16, 16});
        const Displacement g{0.3, -1.7}, h{2.45, 0.6};
        const double law = double(max_abs_diff(translate(translate(x, g), h), translate(x, g + h)));
        const double inv = double(max_abs_diff(translate(translate(x, g), -g), x));
        return bound(std::max(law, inv), tol.exact);
    });
    list.emplace_back("translate preserves norm, Nyquist-free input", [=] {
        auto x = random_in_band<T>(2, Shape{1, 2, 12, 10});
        const double n0 = squared_norm(x);
        return bound(std::abs(squared_norm(translate(x, {0.4, 1.3})) - n0) / n0, tol.exact, "relative error");
    });
    list.emplace_back("downsample inverts upsample, Nyquist-free input", [=] {
        auto x = random_in_band<T>(3, Shape{1, 2, 6, 6});
        return bound(double(std::max(max_abs_diff(downsample(upsample(x, 2), 2), x),
                                     max_abs_diff(downsample(upsample(x, 3), 3), x))),
                     tol.exact);
    });
    list.emplace_back("lowpass is idempotent", [=] {
        auto once = lowpass(random<T>(4, Shape{1, 1, 16, 16}), BandSpec{8, 8});
        return bound(double(max_abs_diff(lowpass(once, BandSpec{8, 8}), once)), tol.exact);
    });
    list.emplace_back("alias-free layers commute with translate", [=] {
        auto x = random<T>(5, Shape{1, 3, 16, 16});
        const Displacement g{0.71, -2.3};
        ConvParams<T> conv;
        conv.weights = random<T>(6, Shape{3, 3, 3, 3});
        conv.bias = {T(0.1), T(-0.2), T(0.3)};
        NormParams<T> norm;
        norm.gamma = {T(1), T(0.5), T(2)};
        norm.beta = {T(0), T(0.1), T(-0.1)};
        const PoolSpec blur{PoolKind::BlurPool, 2};
        auto xs = random<T>(7, Shape{1, 3, 8, 8});
        double worst = double(max_abs_diff(conv2d(translate(x, g), conv), translate(conv2d(x, conv), g)));
        worst = std::max(worst, double(max_abs_diff(pool(translate(x, g), blur), translate(pool(x, blur), g / 2))));
        worst = std::max(worst, double(max_abs_diff(upsample_layer(translate(xs, g), true, conv),
                                                    translate(upsample_layer(xs, true, conv), 2.0 * g))));
        worst = std::max(worst, double(max_abs_diff(normalize(translate(x, g), norm), translate(normalize(x, norm), g))));
        return bound(worst, tol.layer);
    });
    list.emplace_back("circular blur commutes with translate", [=] {
        auto x = random<T>(8, Shape{1, 3, 16, 16});
        const Displacement g{1.37, 0.25};
        return bound(double(max_abs_diff(gaussian_blur(translate(x, g), 1.0, Boundary::Circular),
                                         translate(gaussian_blur(x, 1.0, Boundary::Circular), g))),
                     tol.exact);
    });
    list.emplace_back("psnr of a 0.1 offset is 20 dB", [] {
        BasicTensor<T> a(Shape{1, 3, 8, 8});
        const double db = psnr(a, BasicTensor<T>::full(a.shape(), T(0.1)));
        return Outcome{std::abs(db - 20.0) < 1e-5, fmt::format("{:.6f} dB", db)};
    });
    list.emplace_back("ssim of identical images is 1", [] {
        Rng rng(9);
        auto a = synthetic_images<T>(rng, 1, 3, 16);
        const double s = ssim(a, a);
        return Outcome{std::abs(s - 1.0) < 1e-6, fmt::format("{:.9f}", s)};
    });
    list.emplace_back("identity map is exactly equivariant", [] {
        ImageMap<T> f = [](const BasicTensor<T>& t) { return t; };
        auto x = random<T>(10, Shape{1, 1, 8, 8});
        const auto grid = translate_adversarial_grid(0.5, 0.25);
        const auto r = adversarial_sweep(f, x, x, 0.5, 0.25);
        bool all = grid.size() == 24 && r.records.size() == 24;
        for (const auto& rec : r.records)
            all = all && std::isinf(rec.error_psnr_db);
        return Outcome{all, fmt::format("{} displacements, sentinel everywhere", r.records.size())};
    });
    list.emplace_back("alias-free UNet EQUIV well above the baseline", [=] {
        Rng ir(11);
        auto x = synthetic_images<T>(ir, 2, 3, 64);
        Rng dr(12);
        const auto gs = random_displacements(dr, 6, 8.0);
        auto measure = [&](Preset p) {
            const auto c = preset(p);
            Rng wr(13);
            UNet<T> net(c, init(c, wr));
            ImageMap<T> f = [&](const BasicTensor<T>& t) { return net(t); };
            return equiv(f, x, std::span<const Displacement>(gs)).mean_db;
        };
        const double af = measure(Preset::AF), jin = measure(Preset::Jin);
        return Outcome{af >= tol.af_db && af - jin >= 25.0, fmt::format("AF {:.2f} dB, Jin {:.2f} dB", af, jin)};
    });
    list.emplace_back("whole-pixel shift through three scales is exact", [=] {
        const auto c = preset(Preset::AF);
        Rng wr(14);
        UNet<T> net(c, init(c, wr));
        Rng ir(15);
        auto x = synthetic_images<T>(ir, 1, 3, 32);
        return bound(double(max_abs_diff(net(translate(x, {8, 0})), translate(net(x), {8, 0}))), tol.model);
    });
    list.emplace_back("residual toggle adds the input", [=] {
        auto on = preset(Preset::AF);
        auto off = on;
        off.residual = false;
        Rng wr(16);
        const auto w = init(on, wr);
        Rng ir(17);
        auto x = synthetic_images<T>(ir, 1, 3, 32);
        return bound(double(max_abs_diff(forward(on, w, x) - forward(off, w, x), x)), tol.layer);
    });
    list.emplace_back("weight file round trip is bit exact", [scratch] {
        Rng wr(18);
        const auto w = init(preset(Preset::Jin), wr);
        const auto path = scratch / "roundtrip.afuw";
        save_weights(w, path);
        return Outcome{load_weights(path) == w, path.filename().string()};
    });
    list.emplace_back("corrupted weight file is rejected", [scratch] {
        Rng wr(19);
        const auto path = scratch / "corrupt.afuw";
        save_weights(init(preset(Preset::AF), wr), path);
        fs::resize_file(path, fs::file_size(path) - 3);
        try {
            (void)load_weights(path);
        } catch (const FormatError& e) {
            return Outcome{true, fmt::format("FormatError: {}", e.what())};
        }
        return Outcome{false, "truncated file loaded without error"};
    });
    list.emplace_back("8-bit PNG round trip within 1/255", [scratch] {
        Rng ir(20);
        const auto x = synthetic_images<double>(ir, 1, 3, 16);
        const auto path = scratch / "roundtrip.png";
        write_png(path, x, 8);
        return bound(max_abs_diff(read_png(path), x), 1.0 / 255);
    });
    return list;
}

template <typename T>
bool run_all(std::ostream& out)
{
    const fs::path scratch = fs::temp_directory_path() / fmt::format("unetaf-selftest-{}", ::getpid());
    fs::create_directories(scratch);
    std::size_t failed = 0, total = 0;
    for (const auto& [name, check] : checks<T>(scratch)) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        ++total;
        failed += o.ok ? 0 : 1;
        out << fmt::format("{} {} ({})\n", o.ok ? "PASS" : "FAIL", name, o.detail);
    }
    std::error_code ec;
    fs::remove_all(scratch, ec);
    out << fmt::format("{} of {} checks passed ({})\n", total - failed, total,
                       std::is_same_v<T, float> ? "f32" : "f64");
    return failed == 0;
}

} // namespace

bool run_selftest(bool single_precision, std::ostream& out)
{
    return single_precision ? run_all<float>(out) : run_all<double>(out);
}

} // namespace unetaf::cli
