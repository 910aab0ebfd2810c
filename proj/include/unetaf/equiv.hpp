#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unetaf/rng.hpp"
#include "unetaf/spectral.hpp"
#include "unetaf/tensor.hpp"

namespace unetaf {

template <typename T>
using ImageMap = std::function<BasicTensor<T>(const BasicTensor<T>&)>;

struct EquivRecord {
    Displacement g;
    /// psnr(f(T_g x), T_g f(x)) pooled over the batch; +inf when identical.
    double error_psnr_db = 0;
    /// psnr(f(T_g x), T_g x_ref) when a reference is supplied.
    std::optional<double> restoration_psnr_db;
};

struct AdversarialLevel {
    double max_disp = 0;
    double worst_db = 0;  // +inf when every evaluated output is exact
    Displacement worst_g;
};

/// Per-displacement records plus aggregates. mean_db/std_db run over every
/// (sample, displacement) pair with identical results capped at 300 dB.
struct EquivReport {
    std::vector<EquivRecord> records;
    double mean_db = 0;
    double std_db = 0;
    std::size_t n = 0;
    std::vector<AdversarialLevel> adversarial;

    /// Header `gx,gy,error_psnr_db,restoration_psnr_db`; identical results print as `inf`.
    std::string to_csv() const;
    /// `{mean_db, std_db, n, adversarial: [{max_disp, worst_db}]}`.
    std::string summary_json() const;
};

/// Runs the map with up to `threads` workers; results do not depend on the count.
struct SweepOptions {
    std::size_t threads = 1;
};

/// Equivariance error of `f` at each displacement. When `reference` is given,
/// also records restoration PSNR against the translated reference.
template <typename T>
EquivReport equiv(const ImageMap<T>& f, const BasicTensor<T>& x, std::span<const Displacement> displacements,
                  const BasicTensor<T>* reference = nullptr, SweepOptions options = {});

/// Worst-case restoration PSNR of f(T_g x) against T_g x_ref over the
/// step-spaced square grid; one cumulative level per multiple of step.
template <typename T>
EquivReport adversarial_sweep(const ImageMap<T>& f, const BasicTensor<T>& x, const BasicTensor<T>& x_ref,
                              double max_disp, double step, SweepOptions options = {});

/// Images per second after `warmup` untimed calls, single-threaded.
template <typename T>
double fps_bench(const ImageMap<T>& f, const BasicTensor<T>& x, std::size_t warmup, std::size_t iters);

/// `count` displacements with components uniform in [-max_abs, max_abs].
std::vector<Displacement> random_displacements(Rng& rng, std::size_t count, double max_abs);

} // namespace unetaf
