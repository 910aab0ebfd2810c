#include "unetaf/equiv.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "unetaf/metrics.hpp"

namespace unetaf {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads)
                    fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

struct Evaluation {
    EquivRecord record;
    std::vector<double> per_sample_db;
};

template <typename T>
Evaluation evaluate(const ImageMap<T>& f, const BasicTensor<T>& x, const BasicTensor<T>& fx, Displacement g,
                    const BasicTensor<T>* reference)
{
    const auto moved = f(translate(x, g));
    const auto expected = translate(fx, g);
    Evaluation e;
    e.record.g = g;
    e.record.error_psnr_db = psnr(moved, expected);
    for (std::size_t n = 0; n < x.shape().batch; ++n)
        e.per_sample_db.push_back(capped_db(psnr_sample(moved, expected, n)));
    if (reference)
        e.record.restoration_psnr_db = psnr(moved, translate(*reference, g));
    return e;
}

void aggregate(EquivReport& report, const std::vector<Evaluation>& evals)
{
    double sum = 0;
    std::size_t n = 0;
    for (const auto& e : evals)
        for (double v : e.per_sample_db) {
            sum += v;
            ++n;
        }
    report.n = n;
    report.mean_db = n ? sum / double(n) : 0.0;
    double ss = 0;
    for (const auto& e : evals)
        for (double v : e.per_sample_db)
            ss += (v - report.mean_db) * (v - report.mean_db);
    report.std_db = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
    for (const auto& e : evals)
        report.records.push_back(e.record);
    std::stable_sort(report.records.begin(), report.records.end(), [](const EquivRecord& a, const EquivRecord& b) {
        return a.g.gx != b.g.gx ? a.g.gx < b.g.gx : a.g.gy < b.g.gy;
    });
}

std::string format_db(double v)
{
    if (std::isinf(v) && v > 0)
        return "inf";
    return fmt::format("{:.6f}", v);
}

} // namespace

std::string EquivReport::to_csv() const
{
    std::string out = "gx,gy,error_psnr_db,restoration_psnr_db\n";
    for (const auto& r : records) {
        out += fmt::format("{:.6f},{:.6f},{},", r.g.gx, r.g.gy, format_db(r.error_psnr_db));
        if (r.restoration_psnr_db)
            out += format_db(*r.restoration_psnr_db);
        out += '\n';
    }
    return out;
}

std::string EquivReport::summary_json() const
{
    nlohmann::ordered_json j;
    j["mean_db"] = mean_db;
    j["std_db"] = std_db;
    j["n"] = n;
    j["adversarial"] = nlohmann::ordered_json::array();
    for (const auto& a : adversarial)
        j["adversarial"].push_back({{"max_disp", a.max_disp}, {"worst_db", capped_db(a.worst_db)}});
    return j.dump(2) + "\n";
}

template <typename T>
EquivReport equiv(const ImageMap<T>& f, const BasicTensor<T>& x, std::span<const Displacement> displacements,
                  const BasicTensor<T>* reference, SweepOptions options)
{
    if (reference)
        require_same_shape(reference->shape(), x.shape(), "equiv reference");
    const auto fx = f(x);
    std::vector<Evaluation> evals(displacements.size());
    parallel_for(displacements.size(), options.threads,
                 [&](std::size_t i) { evals[i] = evaluate(f, x, fx, displacements[i], reference); });
    EquivReport report;
    aggregate(report, evals);
    return report;
}

template <typename T>
EquivReport adversarial_sweep(const ImageMap<T>& f, const BasicTensor<T>& x, const BasicTensor<T>& x_ref,
                              double max_disp, double step, SweepOptions options)
{
    const auto grid = translate_adversarial_grid(max_disp, step);
    EquivReport report = equiv(f, x, std::span<const Displacement>(grid), &x_ref, options);

    const long levels = static_cast<long>(std::floor(max_disp / step + 1e-9));
    double worst = std::numeric_limits<double>::infinity();
    Displacement worst_g{};
    for (long k = 1; k <= levels; ++k) {
        const double radius = double(k) * step;
        for (const auto& r : report.records) {
            const double cheb = std::max(std::abs(r.g.gx), std::abs(r.g.gy));
            if (cheb > radius * (1 + 1e-12) || cheb <= (radius - step) * (1 + 1e-12))
                continue;
            if (*r.restoration_psnr_db < worst) {
                worst = *r.restoration_psnr_db;
                worst_g = r.g;
            }
        }
        report.adversarial.push_back({radius, worst, worst_g});
    }
    return report;
}

template <typename T>
double fps_bench(const ImageMap<T>& f, const BasicTensor<T>& x, std::size_t warmup, std::size_t iters)
{
    if (iters == 0)
        throw ConfigError("fps_bench needs iters >= 1");
    for (std::size_t i = 0; i < warmup; ++i)
        (void)f(x);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < iters; ++i)
        (void)f(x);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    const double seconds = std::max(elapsed.count(), 1e-9);
    return double(x.shape().batch * iters) / seconds;
}

std::vector<Displacement> random_displacements(Rng& rng, std::size_t count, double max_abs)
{
    std::vector<Displacement> out(count);
    for (auto& g : out) {
        g.gx = rng.uniform(-max_abs, max_abs);
        g.gy = rng.uniform(-max_abs, max_abs);
    }
    return out;
}

#define UNETAF_INSTANTIATE(T)                                                                                \
    template EquivReport equiv(const ImageMap<T>&, const BasicTensor<T>&, std::span<const Displacement>,     \
                               const BasicTensor<T>*, SweepOptions);                                         \
    template EquivReport adversarial_sweep(const ImageMap<T>&, const BasicTensor<T>&, const BasicTensor<T>&, \
                                           double, double, SweepOptions);                                    \
    template double fps_bench(const ImageMap<T>&, const BasicTensor<T>&, std::size_t, std::size_t);

UNETAF_INSTANTIATE(float)
UNETAF_INSTANTIATE(double)

} // namespace unetaf
