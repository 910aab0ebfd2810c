// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every random quantity is seeded.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "unetaf/degrade.hpp"
#include "unetaf/equiv.hpp"
#include "unetaf/fft.hpp"
#include "unetaf/images.hpp"
#include "unetaf/metrics.hpp"
#include "unetaf/model.hpp"

using namespace unetaf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass;
    std::string detail;
};

// Shared protocol for the EQUIV criteria: desk profile, 8 synthetic 64x64
// RGB images, 32 displacements with components in [-8, 8], double precision.
struct Protocol {
    Tensor images;
    std::vector<Displacement> displacements;

    Protocol()
    {
        Rng image_rng(1);
        images = synthetic_images<double>(image_rng, 8, 3, 64);
        Rng displacement_rng(2);
        displacements = random_displacements(displacement_rng, 32, 8.0);
    }

    UNet<double> model(const ModelConfig& c) const
    {
        Rng weight_rng(0);
        return UNet<double>(c, init(c, weight_rng));
    }

    double mean_equiv(const ModelConfig& c) const
    {
        const auto net = model(c);
        ImageMap<double> f = [&](const Tensor& t) { return net(t); };
        return equiv(f, images, std::span<const Displacement>(displacements)).mean_db;
    }
};

const Protocol& protocol()
{
    static const Protocol p;
    return p;
}

double af_equiv()
{
    static const double v = protocol().mean_equiv(preset(Preset::AF));
    return v;
}

Tensor random_tensor(std::uint64_t seed, Shape s)
{
    Rng rng(seed);
    return randn<double>(rng, s);
}

Verdict criterion_equivariance_gap()
{
    const auto t0 = Clock::now();
    const double af = af_equiv();
    const double jin = protocol().mean_equiv(preset(Preset::Jin));
    const double elapsed = seconds_since(t0);
    const bool pass = af >= 70.0 && af - jin >= 25.0 && elapsed < 120.0;
    return {pass, fmt::format("AF {:.2f} dB (>= 70), Jin {:.2f} dB, gap {:.2f} dB (>= 25), {:.1f} s (< 120)", af,
                              jin, af - jin, elapsed)};
}

Verdict criterion_ablation_sensitivity()
{
    const double af = af_equiv();
    struct Sub {
        const char* name;
        std::function<void(ModelConfig&)> edit;
    };
    const std::vector<Sub> subs{
        {"Zeros padding", [](ModelConfig& c) { c.padding = Padding::Zeros; }},
        {"LayerNorm", [](ModelConfig& c) { c.norm = NormMode::LayerNorm; }},
        {"unfiltered GELU", [](ModelConfig& c) { c.activation.filtered = false; }},
        {"unfiltered upsampling", [](ModelConfig& c) { c.upsampling_filtered = false; }},
        {"MaxPool", [](ModelConfig& c) { c.pooling = PoolKind::MaxPool; }},
    };
    bool pass = true;
    std::string detail = fmt::format("AF {:.2f} dB;", af);
    for (const auto& s : subs) {
        ModelConfig c = preset(Preset::AF);
        s.edit(c);
        const double drop = af - protocol().mean_equiv(c);
        pass = pass && drop >= 15.0;
        detail += fmt::format(" {} -{:.2f}", s.name, drop);
    }
    return {pass, detail + " dB (each >= 15)"};
}

Verdict criterion_layer_commutation()
{
    const auto t0 = Clock::now();
    Rng rng(3);
    const std::size_t sizes[] = {16, 24, 32, 48, 64};
    double worst = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        const std::size_t n = sizes[i % 5];
        const Displacement g{rng.uniform(-8, 8), rng.uniform(-8, 8)};
        const Tensor x = random_tensor(100 + i, Shape{1, 4, n, n});

        ConvParams<double> conv;
        conv.weights = random_tensor(200 + i, Shape{4, 4, 3, 3});
        conv.bias.resize(4);
        for (double& b : conv.bias)
            b = rng.normal();
        NormParams<double> norm;
        for (std::size_t c = 0; c < 4; ++c) {
            norm.gamma.push_back(rng.uniform(0.5, 1.5));
            norm.beta.push_back(rng.normal());
        }
        const PoolSpec blur{PoolKind::BlurPool, 2};
        // Upsampling input is free of Nyquist content, as every feature map
        // leaving a filtered activation is.
        const Tensor coarse = lowpass(random_tensor(300 + i, Shape{1, 4, n / 2, n / 2}), BandSpec{n / 2, n / 2});

        worst = std::max(worst, max_abs_diff(conv2d(translate(x, g), conv), translate(conv2d(x, conv), g)));
        worst = std::max(worst, max_abs_diff(pool(translate(x, g), blur), translate(pool(x, blur), g / 2)));
        worst = std::max(worst, max_abs_diff(upsample_layer(translate(coarse, g), true, conv),
                                             translate(upsample_layer(coarse, true, conv), 2.0 * g)));
        worst = std::max(worst, max_abs_diff(normalize(translate(x, g), norm), translate(normalize(x, norm), g)));
    }
    const double elapsed = seconds_since(t0);
    return {worst <= 1e-9 && elapsed < 30.0,
            fmt::format("max-abs {:.2e} (<= 1e-9) over 20 displacements, sizes 16-64, {:.2f} s (< 30)", worst,
                        elapsed)};
}

Verdict criterion_spectral_oracles()
{
    double dft = 0;
    for (std::size_t h = 1; h <= 16; ++h)
        for (std::size_t w = 1; w <= 16; w += 3) {
            const Tensor x = random_tensor(h * 17 + w, Shape{1, 1, h, w});
            const Spectrum s = fft2(x);
            for (std::size_t ky = 0; ky < h; ++ky)
                for (std::size_t kx = 0; kx < w; ++kx) {
                    std::complex<double> acc = 0;
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t c = 0; c < w; ++c)
                            acc += x(0, 0, y, c) * std::polar(1.0, -2 * std::numbers::pi *
                                                                       (double((ky * y) % h) / double(h) +
                                                                        double((kx * c) % w) / double(w)));
                    dft = std::max(dft, std::abs(s.at(0, ky, kx) - acc));
                }
        }

    // Group law and inverse on generic random inputs, and separately on the
    // same inputs with the Nyquist row/column removed.
    Rng rng(4);
    double group = 0, group_in_band = 0;
    for (std::size_t n : {7u, 16u, 32u}) {
        const Tensor x = random_tensor(n, Shape{1, 2, n, n});
        const Tensor xb = lowpass(x, BandSpec{n, n});
        for (int k = 0; k < 5; ++k) {
            const Displacement g{rng.uniform(-6, 6), rng.uniform(-6, 6)};
            const Displacement h{rng.uniform(-6, 6), rng.uniform(-6, 6)};
            const auto err = [&](const Tensor& t) {
                return std::max(max_abs_diff(translate(translate(t, g), h), translate(t, g + h)),
                                max_abs_diff(translate(translate(t, g), -g), t));
            };
            group = std::max(group, err(x));
            group_in_band = std::max(group_in_band, err(xb));
        }
    }

    double resample = 0, resample_in_band = 0;
    for (std::size_t f : {2u, 3u, 4u}) {
        const Tensor x = random_tensor(40 + f, Shape{2, 2, 6, 8});
        const Tensor xb = lowpass(x, BandSpec{6, 8});
        resample = std::max(resample, max_abs_diff(downsample(upsample(x, f), f), x));
        resample_in_band = std::max(resample_in_band, max_abs_diff(downsample(upsample(xb, f), f), xb));
    }

    double idem = 0, adjoint = 0;
    for (std::size_t k = 0; k < 4; ++k) {
        const Tensor x = random_tensor(50 + k, Shape{1, 3, 16, 20});
        const Tensor y = random_tensor(60 + k, Shape{1, 3, 16, 20});
        const BandSpec band{8 + k, 10 - k};
        const Tensor once = lowpass(x, band);
        idem = std::max(idem, max_abs_diff(lowpass(once, band), once));
        const double a = dot(lowpass(x, band), y), b = dot(x, lowpass(y, band));
        adjoint = std::max(adjoint, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }

    const bool pass = dft <= 1e-10 && group <= 1e-11 && resample <= 1e-12 && idem <= 1e-10 && adjoint <= 1e-10;
    return {pass, fmt::format("DFT {:.1e} (<= 1e-10), group/inverse {:.1e} (<= 1e-11), down(up) {:.1e} (<= 1e-12), "
                              "lowpass idempotence {:.1e} / adjointness {:.1e} (<= 1e-10); without the even-size "
                              "Nyquist bin: group/inverse {:.1e}, down(up) {:.1e}",
                              dft, group, resample, idem, adjoint, group_in_band, resample_in_band)};
}

Verdict criterion_metric_oracles()
{
    const Tensor a(Shape{1, 3, 16, 16});
    const double db = psnr(a, Tensor::full(a.shape(), 0.1));

    Rng rng(5);
    Tensor img(Shape{1, 3, 16, 16});
    for (double& v : img.data())
        v = rng.uniform();
    const double s = ssim(img, img);

    ImageMap<double> identity = [](const Tensor& t) { return t; };
    const auto grid = translate_adversarial_grid(2.0, 0.25);
    const auto report = equiv(identity, img, std::span<const Displacement>(grid));
    bool sentinel = !report.records.empty();
    for (const auto& r : report.records)
        sentinel = sentinel && std::isinf(r.error_psnr_db) && r.error_psnr_db > 0;

    bool counts = true;
    for (double max : {0.0, 0.25, 0.5, 1.0, 2.0}) {
        const auto k = static_cast<std::size_t>(std::llround(max / 0.25));
        counts = counts && translate_adversarial_grid(max, 0.25).size() == (2 * k + 1) * (2 * k + 1) - 1;
    }
    const std::size_t c24 = translate_adversarial_grid(0.5, 0.25).size();

    const bool pass = db == 20.0 && std::abs(s - 1.0) <= 1e-12 && sentinel && counts && c24 == 24;
    return {pass, fmt::format("psnr {:.15g} dB (== 20), ssim {:.15g}, identity sentinel on {} displacements: {}, "
                              "grid count {} (== 24), formula {}",
                              db, s, report.records.size(), sentinel ? "yes" : "no", c24, counts ? "ok" : "mismatch")};
}

Verdict criterion_system_equivariance()
{
    const auto& p = protocol();
    double blur_err = 0;
    for (const auto& g : p.displacements)
        blur_err = std::max(blur_err, max_abs_diff(gaussian_blur(translate(p.images, g), 1.0, Boundary::Circular),
                                                   translate(gaussian_blur(p.images, 1.0, Boundary::Circular), g)));

    const auto net = p.model(preset(Preset::AF));
    Rng noise_rng(6);
    const Tensor noise = 0.01 * randn<double>(noise_rng, p.images.shape());
    const Tensor degraded = gaussian_blur(p.images, 1.0, Boundary::Circular) + noise;
    const Tensor reference = net(degraded);

    double system_sum = 0, bare_sum = 0;
    std::size_t count = 0;
    for (const auto& g : p.displacements) {
        const Tensor expected = translate(reference, g);
        const Tensor system = net(gaussian_blur(translate(p.images, g), 1.0, Boundary::Circular) + translate(noise, g));
        const Tensor bare = net(translate(degraded, g));
        for (std::size_t n = 0; n < p.images.shape().batch; ++n) {
            system_sum += capped_db(psnr_sample(system, expected, n));
            bare_sum += capped_db(psnr_sample(bare, expected, n));
            ++count;
        }
    }
    const double system_db = system_sum / double(count), bare_db = bare_sum / double(count);
    const bool pass = blur_err <= 1e-11 && std::abs(system_db - bare_db) <= 1.0;
    return {pass, fmt::format("blur/translate {:.1e} (<= 1e-11); pipeline EQUIV {:.2f} dB vs model {:.2f} dB "
                              "(|diff| {:.3f} <= 1)",
                              blur_err, system_db, bare_db, std::abs(system_db - bare_db))};
}

Verdict criterion_whole_pixel()
{
    const auto& p = protocol();
    ModelConfig maxpool = preset(Preset::AF);
    maxpool.pooling = PoolKind::MaxPool;
    const auto af_net = p.model(preset(Preset::AF));
    const auto mp_net = p.model(maxpool);

    const Displacement whole{8, 0}, sub{1, 0};
    const double af_whole = max_abs_diff(af_net(translate(p.images, whole)), translate(af_net(p.images), whole));
    const double mp_whole = max_abs_diff(mp_net(translate(p.images, whole)), translate(mp_net(p.images), whole));

    ImageMap<double> af_f = [&](const Tensor& t) { return af_net(t); };
    ImageMap<double> mp_f = [&](const Tensor& t) { return mp_net(t); };
    const std::vector<Displacement> one{sub};
    const double af_sub = equiv(af_f, p.images, std::span<const Displacement>(one)).mean_db;
    const double mp_sub = equiv(mp_f, p.images, std::span<const Displacement>(one)).mean_db;

    const bool pass = af_whole <= 1e-8 && mp_whole <= 1e-8 && af_sub - mp_sub >= 15.0;
    return {pass, fmt::format("g=(8,0): AF {:.1e}, MaxPool {:.1e} (<= 1e-8); g=(1,0): AF {:.2f} dB vs MaxPool "
                              "{:.2f} dB (gap {:.2f} >= 15)",
                              af_whole, mp_whole, af_sub, mp_sub, af_sub - mp_sub)};
}

Verdict criterion_performance_ordering()
{
    const auto& p = protocol();
    const auto af_net = p.model(preset(Preset::AF));
    const auto jin_net = p.model(preset(Preset::Jin));
    ImageMap<double> af_f = [&](const Tensor& t) { return af_net(t); };
    ImageMap<double> jin_f = [&](const Tensor& t) { return jin_net(t); };
    const double af = fps_bench(af_f, p.images, 1, 3);
    const double jin = fps_bench(jin_f, p.images, 1, 3);
    return {jin >= 2.0 * af, fmt::format("AF {:.1f} img/s, Jin {:.1f} img/s, ratio {:.2f} (>= 2)", af, jin, jin / af)};
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Verdict criterion_determinism()
{
    const auto root = fs::temp_directory_path() / "unetaf_acceptance_ablate";
    fs::remove_all(root);
    std::vector<std::string> csv;
    for (const char* run : {"first", "second"}) {
        const auto dir = root / run;
        fs::create_directories(dir);
        std::ostringstream out, err;
        const int code = cli::run({"ablate", "--seed", "7", "--synthetic", "2", "32", "--displacements", "8",
                                   "--out", dir.string()},
                                  out, err);
        if (code != 0)
            return {false, fmt::format("ablate exited with {}: {}", code, err.str())};
        csv.push_back(slurp(dir / "ablation.csv"));
    }
    fs::remove_all(root);
    const auto rows = std::count(csv[0].begin(), csv[0].end(), '\n') - 1;
    return {csv[0] == csv[1] && rows == 22,
            fmt::format("{} rows, {} bytes, identical: {}", rows, csv[0].size(), csv[0] == csv[1] ? "yes" : "no")};
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria{
        {"equivariance gap AF vs Jin", criterion_equivariance_gap},
        {"ablation sensitivity", criterion_ablation_sensitivity},
        {"exact layer commutation", criterion_layer_commutation},
        {"spectral operator oracles", criterion_spectral_oracles},
        {"metric oracles", criterion_metric_oracles},
        {"system equivariance", criterion_system_equivariance},
        {"whole-pixel vs sub-pixel", criterion_whole_pixel},
        {"performance ordering", criterion_performance_ordering},
        {"ablation determinism", criterion_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::cout << fmt::format("{} {}. {}: {}", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail)
                  << std::endl;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - std::size_t(failures), criteria.size())
              << std::endl;
    return failures == 0 ? 0 : 1;
}
