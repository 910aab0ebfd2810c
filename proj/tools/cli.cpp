#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "selftest.hpp"
#include "unetaf/degrade.hpp"
#include "unetaf/equiv.hpp"
#include "unetaf/images.hpp"
#include "unetaf/metrics.hpp"
#include "unetaf/model.hpp"

namespace unetaf::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    // model selection
    std::string presets;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string precision = "f64";
    std::string weights;
    std::size_t threads = 1;
    std::optional<std::size_t> scales;
    std::optional<std::size_t> base_channels;
    std::optional<std::string> padding;
    std::optional<std::string> norm;
    std::optional<std::string> activation;
    std::optional<bool> filtered_activation;
    std::optional<std::string> pooling;
    std::optional<bool> filtered_upsampling;
    std::optional<bool> residual;

    // inputs and outputs
    std::string images;
    std::vector<std::size_t> synthetic;
    std::string out = ".";

    // degradation
    bool degrade = false;
    bool pre_degraded = false;
    double blur_sigma = 1.0;
    double noise_sigma = 0.01;
    std::string boundary = "circular";

    // sweeps
    double max_disp = 0;
    double step = 0;
    std::size_t displacements = 32;
    std::size_t warmup = 1;
    std::size_t iters = 3;
    bool zero_head = false;
};

// Stream seeds derived from --seed so that weights, images, displacements and
// noise are independent but reproducible.
std::uint64_t weight_seed(const Options& o) { return o.seed; }
std::uint64_t image_seed(const Options& o) { return o.seed + 1; }
std::uint64_t displacement_seed(const Options& o) { return o.seed + 2; }
std::uint64_t noise_seed(const Options& o) { return o.seed + 3; }

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    const auto l = lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on")
        return true;
    if (l == "false" || l == "0" || l == "no" || l == "off")
        return false;
    throw ConfigError("'" + key + "' expects a boolean, got '" + v + "'");
}

std::size_t parse_count(const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    unsigned long long n = 0;
    try {
        n = std::stoull(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size())
        throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
    return static_cast<std::size_t>(n);
}

using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    KeyValues kv;
    std::string line;
    for (int number = 1; std::getline(in, line); ++number) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(fmt::format("{}:{}: expected 'key = value'", path, number));
        kv.emplace_back(lower(trim(t.substr(0, eq))), trim(t.substr(eq + 1)));
    }
    return kv;
}

void apply_key(ModelConfig& c, const std::string& key, const std::string& v)
{
    if (key == "scales")
        c.scales = parse_count(key, v);
    else if (key == "base_channels")
        c.base_channels = parse_count(key, v);
    else if (key == "in_channels")
        c.in_channels = parse_count(key, v);
    else if (key == "out_channels")
        c.out_channels = parse_count(key, v);
    else if (key == "padding")
        c.padding = parse_padding(v);
    else if (key == "norm")
        c.norm = parse_norm(v);
    else if (key == "activation")
        c.activation.base = parse_activation(v);
    else if (key == "activation_filtered")
        c.activation.filtered = parse_bool(key, v);
    else if (key == "activation_oversample")
        c.activation.oversample = parse_count(key, v);
    else if (key == "pooling")
        c.pooling = parse_pooling(v);
    else if (key == "upsampling_filtered")
        c.upsampling_filtered = parse_bool(key, v);
    else if (key == "residual")
        c.residual = parse_bool(key, v);
    else if (key == "upconv_filter_after")
        c.upconv_filter_after = parse_bool(key, v);
    else if (key != "preset")
        throw ConfigError("unknown config key '" + key + "'");
}

struct ModelSpec {
    std::string label;
    ModelConfig config;
};

std::vector<ModelSpec> resolve_models(const Options& o)
{
    KeyValues file;
    if (!o.config_path.empty())
        file = read_config(o.config_path);
    std::string presets = o.presets;
    if (presets.empty()) {
        presets = "AF";
        for (const auto& [k, v] : file)
            if (k == "preset")
                presets = v;
    }
    std::vector<ModelSpec> out;
    std::stringstream list(presets);
    std::string item;
    while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        const Preset p = parse_preset(item);
        ModelConfig c = preset(p);
        for (const auto& [k, v] : file)
            apply_key(c, k, v);
        if (o.scales)
            c.scales = *o.scales;
        if (o.base_channels)
            c.base_channels = *o.base_channels;
        if (o.padding)
            c.padding = parse_padding(*o.padding);
        if (o.norm)
            c.norm = parse_norm(*o.norm);
        if (o.activation)
            c.activation.base = parse_activation(*o.activation);
        if (o.filtered_activation)
            c.activation.filtered = *o.filtered_activation;
        if (o.pooling)
            c.pooling = parse_pooling(*o.pooling);
        if (o.filtered_upsampling)
            c.upsampling_filtered = *o.filtered_upsampling;
        if (o.residual)
            c.residual = *o.residual;
        c.validate();
        out.push_back({std::string(name(p)), c});
    }
    if (out.empty())
        throw ConfigError("no preset given");
    return out;
}

WeightStore model_weights(const Options& o, const ModelConfig& c)
{
    if (o.weights.empty()) {
        Rng rng(weight_seed(o));
        return init(c, rng);
    }
    WeightStore w = load_weights(o.weights);
    try {
        check_weights(c, w);
    } catch (const ShapeMismatch& e) {
        throw ShapeMismatch(o.weights + ": " + e.what());
    }
    return w;
}

fs::path output_dir(const Options& o)
{
    const fs::path dir(o.out);
    if (!fs::is_directory(dir))
        throw IoError("output directory '" + o.out + "' does not exist");
    return dir;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

std::vector<fs::path> png_files(const std::string& dir)
{
    if (!fs::is_directory(dir))
        throw IoError("image directory '" + dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".png")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw IoError("no PNG files in '" + dir + "'");
    return files;
}

template <typename T>
BasicTensor<T> stack(const std::vector<Tensor>& items)
{
    Shape s = items.front().shape();
    s.batch = items.size();
    std::vector<T> data;
    data.reserve(s.numel());
    for (const auto& t : items)
        data.insert(data.end(), t.data().begin(), t.data().end());
    return BasicTensor<T>(s, std::move(data));
}

template <typename T>
BasicTensor<T> load_inputs(const Options& o, std::size_t channels, std::size_t default_count,
                           std::size_t default_size)
{
    if (!o.images.empty()) {
        std::vector<Tensor> items;
        for (const auto& path : png_files(o.images)) {
            items.push_back(read_png(path));
            if (items.back().shape() != items.front().shape())
                throw ShapeMismatch(path.string() + ": image size " + to_string(items.back().shape()) +
                                    " differs from " + to_string(items.front().shape()));
        }
        if (items.front().shape().channels != channels)
            throw ShapeMismatch("model expects " + std::to_string(channels) + " channels, images have 3");
        return stack<T>(items);
    }
    std::size_t count = default_count, size = default_size;
    if (o.synthetic.size() == 2) {
        count = o.synthetic[0];
        size = o.synthetic[1];
    }
    if (count == 0 || size == 0)
        throw ConfigError("--synthetic needs a positive count and size");
    Rng rng(image_seed(o));
    return synthetic_images<T>(rng, count, channels, size);
}

DegradationSpec degradation(const Options& o)
{
    DegradationSpec d;
    d.blur_sigma = o.blur_sigma;
    d.noise_sigma = o.noise_sigma;
    const auto b = lower(o.boundary);
    if (b == "circular")
        d.boundary = Boundary::Circular;
    else if (b == "valid")
        d.boundary = Boundary::Valid;
    else
        throw ConfigError("--boundary must be 'circular' or 'valid', got '" + o.boundary + "'");
    if (d.blur_sigma < 0 || d.noise_sigma < 0)
        throw ConfigError("degradation sigmas must be >= 0");
    return d;
}

std::string db_text(double db)
{
    return std::isinf(db) ? std::string("inf") : fmt::format("{:.2f}", db);
}

void check_sweep(double max_disp, double step)
{
    if (!(step > 0))
        throw ConfigError("--step must be > 0");
    if (!(max_disp >= 0))
        throw ConfigError("--max-disp must be >= 0");
}

void single_weights_guard(const Options& o, std::size_t models)
{
    if (!o.weights.empty() && models != 1)
        throw ConfigError("--weights can only be combined with a single preset");
}

template <typename T>
int cmd_equiv_sweep(const Options& o, std::ostream& out)
{
    check_sweep(o.max_disp, o.step);
    const auto models = resolve_models(o);
    single_weights_guard(o, models.size());
    const auto dir = output_dir(o);
    const auto truth = load_inputs<T>(o, models.front().config.in_channels, 1, 64);
    Rng noise(noise_seed(o));
    const auto x = o.degrade ? degrade(truth, degradation(o), noise) : truth;

    std::vector<Displacement> gs;
    const auto count = static_cast<std::size_t>(std::floor(o.max_disp / o.step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k)
        gs.push_back({double(k) * o.step, 0.0});

    for (const auto& m : models) {
        UNet<T> net(m.config, model_weights(o, m.config));
        ImageMap<T> f = [&](const BasicTensor<T>& t) { return net(t); };
        const auto report = equiv(f, x, std::span<const Displacement>(gs), o.degrade ? &truth : nullptr,
                                  SweepOptions{o.threads});
        write_text(dir / ("equiv_" + m.label + ".csv"), report.to_csv());
        write_text(dir / ("equiv_" + m.label + ".json"), report.summary_json());
        out << fmt::format("{:<12} EQUIV {} ± {} dB over {} displacement(s) x {} image(s)\n", m.label,
                           db_text(report.mean_db), db_text(report.std_db), gs.size(), x.shape().batch);
    }
    return kSuccess;
}

template <typename T>
int cmd_adversarial(const Options& o, std::ostream& out)
{
    check_sweep(o.max_disp, o.step);
    const auto models = resolve_models(o);
    single_weights_guard(o, models.size());
    const auto dir = output_dir(o);
    const auto truth = load_inputs<T>(o, models.front().config.in_channels, 1, 64);
    Rng noise(noise_seed(o));
    const auto x = o.degrade ? degrade(truth, degradation(o), noise) : truth;

    for (const auto& m : models) {
        UNet<T> net(m.config, model_weights(o, m.config));
        ImageMap<T> f = [&](const BasicTensor<T>& t) { return net(t); };
        const auto report = adversarial_sweep(f, x, truth, o.max_disp, o.step, SweepOptions{o.threads});
        write_text(dir / ("adversarial_" + m.label + ".csv"), report.to_csv());
        write_text(dir / ("adversarial_" + m.label + ".json"), report.summary_json());
        out << m.label << '\n';
        for (const auto& level : report.adversarial)
            out << fmt::format("  max {:.2f} px: worst PSNR {} dB at ({:.2f}, {:.2f})\n", level.max_disp,
                               db_text(level.worst_db), level.worst_g.gx, level.worst_g.gy);
    }
    return kSuccess;
}

struct AblationRow {
    std::string axis;
    std::string variant;
    ModelConfig config;
};

std::vector<AblationRow> ablation_rows(const ModelConfig& base)
{
    std::vector<AblationRow> rows;
    auto add = [&](const char* axis, const char* variant, auto&& edit) {
        ModelConfig c = base;
        edit(c);
        rows.push_back({axis, variant, c});
    };
    add("Residual connection", "Present", [](ModelConfig& c) { c.residual = true; });
    add("Residual connection", "Absent", [](ModelConfig& c) { c.residual = false; });
    add("Normalization", "LayerNorm-AF", [](ModelConfig& c) { c.norm = NormMode::LayerNormAF; });
    add("Normalization", "BatchNorm", [](ModelConfig& c) { c.norm = NormMode::BatchNorm; });
    add("Normalization", "InstanceNorm", [](ModelConfig& c) { c.norm = NormMode::InstanceNorm; });
    add("Normalization", "LayerNorm", [](ModelConfig& c) { c.norm = NormMode::LayerNorm; });
    add("Normalization", "None", [](ModelConfig& c) { c.norm = NormMode::None; });
    add("Padding", "Circular", [](ModelConfig& c) { c.padding = Padding::Circular; });
    add("Padding", "Zeros", [](ModelConfig& c) { c.padding = Padding::Zeros; });
    add("Padding", "Reflect", [](ModelConfig& c) { c.padding = Padding::Reflect; });
    for (auto base_fn : {ActivationBase::GELU, ActivationBase::ReLU, ActivationBase::Poly})
        for (bool filtered : {true, false}) {
            ModelConfig c = base;
            c.activation.base = base_fn;
            c.activation.filtered = filtered;
            rows.push_back({"Activation", (filtered ? "Filtered " : "") + std::string(name(base_fn)), c});
        }
    add("Upsampling", "Filtered", [](ModelConfig& c) { c.upsampling_filtered = true; });
    add("Upsampling", "Unfiltered", [](ModelConfig& c) { c.upsampling_filtered = false; });
    for (auto k : {PoolKind::BlurPool, PoolKind::MaxPool, PoolKind::AvgPool, PoolKind::MaxBlurPool})
        rows.push_back({"Pooling", std::string(name(k)), [&] {
                            ModelConfig c = base;
                            c.pooling = k;
                            return c;
                        }()});
    return rows;
}

template <typename T>
int cmd_ablate(const Options& o, std::ostream& out)
{
    if (!o.weights.empty())
        throw ConfigError("ablate initializes its own weights per variant; --weights is not accepted");
    if (!(o.max_disp >= 0))
        throw ConfigError("--max-disp must be >= 0");
    if (o.displacements == 0)
        throw ConfigError("--displacements must be >= 1");
    const auto models = resolve_models(o);
    if (models.size() != 1)
        throw ConfigError("ablate takes a single base preset");
    const auto dir = output_dir(o);
    const auto rows = ablation_rows(models.front().config);
    const auto x = load_inputs<T>(o, models.front().config.in_channels, 8, 64);
    Rng drng(displacement_seed(o));
    const auto gs = random_displacements(drng, o.displacements, o.max_disp);

    std::vector<std::pair<ModelConfig, EquivReport>> cache;
    std::string csv = "axis,variant,mean_db,std_db,n\n";
    std::string md = "| Replacement | Variant | EQUIV (dB) |\n|---|---|---|\n";
    std::string previous_axis;
    for (const auto& row : rows) {
        auto hit = std::find_if(cache.begin(), cache.end(), [&](const auto& e) { return e.first == row.config; });
        if (hit == cache.end()) {
            Rng wr(weight_seed(o));
            UNet<T> net(row.config, init(row.config, wr));
            ImageMap<T> f = [&](const BasicTensor<T>& t) { return net(t); };
            cache.emplace_back(row.config, equiv(f, x, std::span<const Displacement>(gs), static_cast<const BasicTensor<T>*>(nullptr),
                                                 SweepOptions{o.threads}));
            hit = std::prev(cache.end());
        }
        const auto& r = hit->second;
        csv += fmt::format("{},{},{:.6f},{:.6f},{}\n", row.axis, row.variant, r.mean_db, r.std_db, r.n);
        md += fmt::format("| {} | {} | {:.2f} ± {:.2f} |\n", row.axis == previous_axis ? "" : row.axis,
                          row.variant, r.mean_db, r.std_db);
        out << fmt::format("{:<20} {:<15} {:>8.2f} ± {:.2f} dB\n", row.axis, row.variant, r.mean_db, r.std_db);
        previous_axis = row.axis;
    }
    write_text(dir / "ablation.csv", csv);
    write_text(dir / "ablation.md", md);
    return kSuccess;
}

template <typename T>
int cmd_bench(const Options& o, std::ostream& out)
{
    if (o.iters == 0)
        throw ConfigError("--iters must be >= 1");
    const auto models = resolve_models(o);
    single_weights_guard(o, models.size());
    const auto dir = output_dir(o);
    const auto x = load_inputs<T>(o, models.front().config.in_channels, 8, 64);
    std::string csv = "preset,images_per_second\n";
    for (const auto& m : models) {
        UNet<T> net(m.config, model_weights(o, m.config));
        ImageMap<T> f = [&](const BasicTensor<T>& t) { return net(t); };
        const double fps = fps_bench(f, x, o.warmup, o.iters);
        csv += fmt::format("{},{:.3f}\n", m.label, fps);
        out << fmt::format("{:<12} {:10.2f} images/s\n", m.label, fps);
    }
    write_text(dir / "bench.csv", csv);
    return kSuccess;
}

template <typename T>
int cmd_restore(const Options& o, std::ostream& out)
{
    if (o.weights.empty())
        throw ConfigError("restore needs --weights");
    if (o.images.empty())
        throw ConfigError("restore needs --images");
    const auto models = resolve_models(o);
    if (models.size() != 1)
        throw ConfigError("restore takes a single preset");
    const auto& config = models.front().config;
    const auto dir = output_dir(o);
    const auto files = png_files(o.images);
    UNet<T> net(config, model_weights(o, config));
    const auto spec = degradation(o);
    Rng noise(noise_seed(o));

    std::string csv = "image,psnr_vs_input_db,psnr_input_db,ssim_input,psnr_output_db,ssim_output\n";
    for (const auto& path : files) {
        const Tensor image = read_png(path);
        const Tensor input = o.pre_degraded ? image : degrade(image, spec, noise);
        Tensor output;
        try {
            output = net(input.cast<T>()).template cast<double>();
        } catch (const Error& e) {
            throw ShapeMismatch(path.string() + ": " + e.what());
        }
        const std::string stem = path.stem().string();
        write_png(dir / (stem + "_restored.png"), output, 16);
        if (!o.pre_degraded)
            write_png(dir / (stem + "_degraded.png"), input, 16);
        const double vs_input = psnr(output, input);
        std::string row = fmt::format("{},{}", path.filename().string(), db_text(vs_input));
        if (o.pre_degraded) {
            row += ",,,,";
            out << fmt::format("{}: output vs input {} dB\n", path.filename().string(), db_text(vs_input));
        } else {
            const double pin = psnr(input, image), pout = psnr(output, image);
            const double sin = ssim(input, image), sout = ssim(output, image);
            row += fmt::format(",{},{:.6f},{},{:.6f}", db_text(pin), sin, db_text(pout), sout);
            out << fmt::format("{}: degraded {} dB / {:.4f}, restored {} dB / {:.4f}\n",
                               path.filename().string(), db_text(pin), sin, db_text(pout), sout);
        }
        csv += row + '\n';
    }
    write_text(dir / "restore.csv", csv);
    return kSuccess;
}

int cmd_init(const Options& o, std::ostream& out)
{
    const auto models = resolve_models(o);
    if (models.size() != 1)
        throw ConfigError("init takes a single preset");
    if (o.out.empty() || fs::is_directory(o.out))
        throw ConfigError("init needs --out naming the weight file to write");
    Rng rng(weight_seed(o));
    WeightStore w = init(models.front().config, rng);
    if (o.zero_head) {
        for (double& v : w.at("head/weight").values)
            v = 0;
        for (double& v : w.at("head/bias").values)
            v = 0;
    }
    save_weights(w, o.out);
    out << fmt::format("wrote {} parameter arrays for {} to {}\n", w.size(), models.front().label, o.out);
    return kSuccess;
}

template <typename Fn>
int with_precision(const Options& o, Fn&& fn)
{
    if (o.precision == "f64")
        return fn(double{});
    if (o.precision == "f32")
        return fn(float{});
    throw ConfigError("--precision must be f32 or f64");
}

void add_model_options(CLI::App* sub, Options& o, bool weights)
{
    sub->add_option("--preset", o.presets, "Preset name(s), comma separated: Ronneberger, Jin, AF, AF_denoise");
    sub->add_option("--config", o.config_path, "Key = value model configuration file (flags override it)");
    sub->add_option("--seed", o.seed, "Seed for weights, images, displacements and noise");
    sub->add_option("--precision", o.precision, "Arithmetic precision")->check(CLI::IsMember({"f32", "f64"}));
    sub->add_option("--threads", o.threads, "Worker threads for displacement sweeps")->check(CLI::PositiveNumber);
    if (weights)
        sub->add_option("--weights", o.weights, "Weight file (default: seeded initialization)");
    sub->add_option("--scales", o.scales, "Override the number of scales");
    sub->add_option("--base-channels", o.base_channels, "Override the base channel count");
    sub->add_option("--padding", o.padding, "Override padding: Circular, Zeros, Reflect");
    sub->add_option("--norm", o.norm, "Override normalization: LayerNormAF, BatchNorm, InstanceNorm, LayerNorm, None");
    sub->add_option("--activation", o.activation, "Override activation: GELU, ReLU, Poly");
    sub->add_option("--filtered-activation", o.filtered_activation, "Override activation filtering (true/false)");
    sub->add_option("--pooling", o.pooling, "Override pooling: BlurPool, MaxPool, AvgPool, MaxBlurPool");
    sub->add_option("--filtered-upsampling", o.filtered_upsampling, "Override upsampling filtering (true/false)");
    sub->add_option("--residual", o.residual, "Override the global residual connection (true/false)");
}

void add_input_options(CLI::App* sub, Options& o)
{
    sub->add_option("--images", o.images, "Directory of PNG images");
    sub->add_option("--synthetic", o.synthetic, "Synthesize N band-limited SIZE x SIZE images")
        ->expected(2)
        ->type_name("N SIZE");
    sub->add_option("--out", o.out, "Output directory (must exist)");
}

void add_degrade_options(CLI::App* sub, Options& o, bool toggle)
{
    if (toggle)
        sub->add_flag("--degrade", o.degrade, "Blur and add noise to the inputs; compare against the clean images");
    sub->add_option("--blur-sigma", o.blur_sigma, "Gaussian blur standard deviation in pixels");
    sub->add_option("--noise-sigma", o.noise_sigma, "Additive white Gaussian noise standard deviation");
    sub->add_option("--boundary", o.boundary, "Blur boundary: circular or valid");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Alias-free UNet equivariance toolkit", "unetaf"};
    app.require_subcommand(1);
    Options o;
    double sweep_max = 5.0, sweep_step = 0.01, adv_max = 1.0, adv_step = 0.25, ablate_max = 8.0;

    auto* sweep = app.add_subcommand("equiv-sweep", "Equivariance error along a horizontal displacement sweep");
    add_model_options(sweep, o, true);
    add_input_options(sweep, o);
    add_degrade_options(sweep, o, true);
    sweep->add_option("--max-disp", sweep_max, "Largest horizontal displacement in pixels")->capture_default_str();
    sweep->add_option("--step", sweep_step, "Displacement step in pixels")->capture_default_str();

    auto* adv = app.add_subcommand("adversarial", "Worst-case restoration PSNR over a displacement grid");
    add_model_options(adv, o, true);
    add_input_options(adv, o);
    add_degrade_options(adv, o, true);
    adv->add_option("--max-disp", adv_max, "Largest displacement component in pixels")->capture_default_str();
    adv->add_option("--step", adv_step, "Grid step in pixels")->capture_default_str();

    auto* ablate = app.add_subcommand("ablate", "EQUIV for every single-component substitution of a preset");
    add_model_options(ablate, o, false);
    add_input_options(ablate, o);
    ablate->add_option("--max-disp", ablate_max, "Displacement components drawn uniformly in [-max, max]")->capture_default_str();
    ablate->add_option("--displacements", o.displacements, "Number of random displacements")->capture_default_str();

    auto* bench = app.add_subcommand("bench", "Inference throughput in images per second");
    add_model_options(bench, o, true);
    add_input_options(bench, o);
    bench->add_option("--warmup", o.warmup, "Untimed warm-up passes")->capture_default_str();
    bench->add_option("--iters", o.iters, "Timed passes")->capture_default_str();

    auto* restore = app.add_subcommand("restore", "Degrade PNG images and reconstruct them with a trained model");
    add_model_options(restore, o, true);
    add_input_options(restore, o);
    add_degrade_options(restore, o, false);
    restore->add_flag("--pre-degraded", o.pre_degraded, "Inputs are already degraded; no ground truth available");

    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant suite");
    selftest->add_option("--precision", o.precision, "Arithmetic precision")->check(CLI::IsMember({"f32", "f64"}));

    auto* init_cmd = app.add_subcommand("init", "Write a seeded weight file for a preset");
    add_model_options(init_cmd, o, false);
    init_cmd->add_option("--out", o.out, "Weight file to write")->required();
    init_cmd->add_flag("--zero-head", o.zero_head, "Zero the output projection (identity map with residual on)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    if (sweep->parsed()) {
        o.max_disp = sweep_max;
        o.step = sweep_step;
    } else if (adv->parsed()) {
        o.max_disp = adv_max;
        o.step = adv_step;
    } else if (ablate->parsed()) {
        o.max_disp = ablate_max;
    }

    try {
        if (sweep->parsed())
            return with_precision(o, [&](auto tag) { return cmd_equiv_sweep<decltype(tag)>(o, out); });
        if (adv->parsed())
            return with_precision(o, [&](auto tag) { return cmd_adversarial<decltype(tag)>(o, out); });
        if (ablate->parsed())
            return with_precision(o, [&](auto tag) { return cmd_ablate<decltype(tag)>(o, out); });
        if (bench->parsed())
            return with_precision(o, [&](auto tag) { return cmd_bench<decltype(tag)>(o, out); });
        if (restore->parsed())
            return with_precision(o, [&](auto tag) { return cmd_restore<decltype(tag)>(o, out); });
        if (selftest->parsed())
            return run_selftest(o.precision == "f32", out) ? kSuccess : kInvariantFailure;
        if (init_cmd->parsed())
            return cmd_init(o, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const UnknownPreset& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoError;
    } catch (const FormatError& e) {
        err << "format error: " << e.what() << '\n';
        return kIoError;
    } catch (const ShapeMismatch& e) {
        err << "shape error: " << e.what() << '\n';
        return kIoError;
    } catch (const IndivisibleSize& e) {
        err << "shape error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvariantFailure;
    }
    return kUsageError;
}

} // namespace unetaf::cli
