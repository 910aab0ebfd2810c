#include "unetaf/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace unetaf {

namespace {

using Dims = std::vector<std::uint64_t>;

std::string scale_prefix(const char* part, std::size_t s) { return std::string(part) + "/" + std::to_string(s) + "/"; }

std::size_t width_at(const ModelConfig& c, std::size_t scale) { return c.base_channels << scale; }

void add_conv(std::vector<std::pair<std::string, Dims>>& out, const std::string& prefix, std::size_t cout,
              std::size_t cin, std::size_t k)
{
    out.push_back({prefix + "weight", {cout, cin, k, k}});
    out.push_back({prefix + "bias", {cout}});
}

void add_norm(std::vector<std::pair<std::string, Dims>>& out, const ModelConfig& c, const std::string& prefix,
              std::size_t channels)
{
    if (c.norm == NormMode::None)
        return;
    out.push_back({prefix + "gamma", {channels}});
    out.push_back({prefix + "beta", {channels}});
    if (c.norm == NormMode::BatchNorm) {
        out.push_back({prefix + "running_mean", {channels}});
        out.push_back({prefix + "running_var", {channels}});
    }
}

void add_block(std::vector<std::pair<std::string, Dims>>& out, const ModelConfig& c, const std::string& prefix,
               std::size_t cin, std::size_t cout)
{
    add_conv(out, prefix + "conv1/", cout, cin, 3);
    add_norm(out, c, prefix + "norm1/", cout);
    add_conv(out, prefix + "conv2/", cout, cout, 3);
    add_norm(out, c, prefix + "norm2/", cout);
}

bool ends_with(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

template <typename T>
std::vector<T> vector_param(const WeightStore& w, const std::string& path)
{
    const auto& p = w.at(path);
    return std::vector<T>(p.values.begin(), p.values.end());
}

template <typename T>
ConvParams<T> conv_param(const WeightStore& w, const std::string& prefix, Padding padding)
{
    const auto& p = w.at(prefix + "weight");
    Shape s{p.dims[0], p.dims[1], p.dims[2], p.dims[3]};
    ConvParams<T> conv;
    conv.weights = BasicTensor<T>(s, std::vector<T>(p.values.begin(), p.values.end()));
    conv.bias = vector_param<T>(w, prefix + "bias");
    conv.padding = padding;
    return conv;
}

template <typename T>
NormParams<T> norm_param(const WeightStore& w, const ModelConfig& c, const std::string& prefix)
{
    NormParams<T> n;
    n.mode = c.norm;
    if (c.norm == NormMode::None)
        return n;
    n.gamma = vector_param<T>(w, prefix + "gamma");
    n.beta = vector_param<T>(w, prefix + "beta");
    if (c.norm == NormMode::BatchNorm) {
        n.running_mean = vector_param<T>(w, prefix + "running_mean");
        n.running_var = vector_param<T>(w, prefix + "running_var");
    }
    return n;
}

} // namespace

void ModelConfig::validate() const
{
    if (scales < 1)
        throw ConfigError("scales must be >= 1");
    if (base_channels < 1 || in_channels < 1 || out_channels < 1)
        throw ConfigError("channel counts must be >= 1");
    if (residual && in_channels != out_channels)
        throw ConfigError("residual connection needs in_channels == out_channels");
    if (activation.filtered && activation.oversample < 2)
        throw ConfigError("filtered activation needs oversample >= 2");
}

std::string_view name(Preset p)
{
    switch (p) {
    case Preset::Ronneberger: return "Ronneberger";
    case Preset::Jin: return "Jin";
    case Preset::AF: return "AF";
    case Preset::AFDenoise: return "AF_denoise";
    }
    return "?";
}

Preset parse_preset(std::string_view s)
{
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    for (Preset p : {Preset::Ronneberger, Preset::Jin, Preset::AF, Preset::AFDenoise}) {
        std::string n(name(p));
        std::transform(n.begin(), n.end(), n.begin(), [](unsigned char ch) { return std::tolower(ch); });
        if (n == lower)
            return p;
    }
    throw UnknownPreset("unknown preset '" + std::string(s) +
                        "' (expected Ronneberger, Jin, AF or AF_denoise)");
}

ModelConfig preset(Preset p)
{
    ModelConfig c;
    switch (p) {
    case Preset::Ronneberger:
    case Preset::Jin:
        c.padding = Padding::Zeros;
        c.norm = NormMode::BatchNorm;
        c.activation = ActivationSpec{ActivationBase::ReLU, false, 2};
        c.pooling = PoolKind::MaxPool;
        c.upsampling_filtered = false;
        c.residual = p == Preset::Jin;
        break;
    case Preset::AF:
    case Preset::AFDenoise:
        c.padding = Padding::Circular;
        c.norm = NormMode::LayerNormAF;
        c.activation = ActivationSpec{ActivationBase::GELU, true, 2};
        c.pooling = PoolKind::BlurPool;
        c.upsampling_filtered = true;
        c.residual = p == Preset::AF;
        break;
    }
    return c;
}

ModelConfig preset(std::string_view n) { return preset(parse_preset(n)); }

ModelConfig full_profile(ModelConfig c)
{
    c.scales = 4;
    c.base_channels = 64;
    return c;
}

std::vector<std::pair<std::string, Dims>> parameter_layout(const ModelConfig& c)
{
    c.validate();
    std::vector<std::pair<std::string, Dims>> out;
    for (std::size_t s = 0; s < c.scales; ++s) {
        const std::size_t cin = s == 0 ? c.in_channels : width_at(c, s - 1);
        add_block(out, c, scale_prefix("enc", s), cin, width_at(c, s));
    }
    add_block(out, c, "bottleneck/", width_at(c, c.scales - 1), width_at(c, c.scales));
    for (std::size_t i = c.scales; i-- > 0;) {
        const std::string prefix = scale_prefix("dec", i);
        add_conv(out, prefix + "up/", width_at(c, i), width_at(c, i + 1), 3);
        add_block(out, c, prefix, 2 * width_at(c, i), width_at(c, i));
    }
    add_conv(out, "head/", c.out_channels, c.base_channels, 1);
    return out;
}

WeightStore init(const ModelConfig& c, Rng& rng)
{
    WeightStore store;
    for (const auto& [path, dims] : parameter_layout(c)) {
        ParamArray p{dims, {}};
        p.values.assign(p.numel(), 0.0);
        if (ends_with(path, "/weight")) {
            const double fan_in = double(dims[1] * dims[2] * dims[3]);
            const double std = std::sqrt(2.0 / fan_in);
            for (double& v : p.values)
                v = std * rng.normal();
        } else if (ends_with(path, "/gamma") || ends_with(path, "/running_var")) {
            std::fill(p.values.begin(), p.values.end(), 1.0);
        }
        store.set(path, std::move(p));
    }
    return store;
}

void check_weights(const ModelConfig& c, const WeightStore& w)
{
    const auto layout = parameter_layout(c);
    std::set<std::string> expected;
    for (const auto& [path, dims] : layout) {
        expected.insert(path);
        const auto& p = w.at(path);
        if (p.dims != dims)
            throw ShapeMismatch("parameter '" + path + "' has dims incompatible with the model config");
    }
    for (const auto& [path, p] : w)
        if (!expected.count(path))
            throw ShapeMismatch("unexpected parameter '" + path + "' for this model config");
}

template <typename T>
UNet<T>::UNet(ModelConfig config, const WeightStore& w) : config_(std::move(config))
{
    check_weights(config_, w);
    const Padding pad = config_.padding;
    auto block = [&](const std::string& prefix) {
        return Block{conv_param<T>(w, prefix + "conv1/", pad), norm_param<T>(w, config_, prefix + "norm1/"),
                     conv_param<T>(w, prefix + "conv2/", pad), norm_param<T>(w, config_, prefix + "norm2/")};
    };
    for (std::size_t s = 0; s < config_.scales; ++s)
        encoder_.push_back(block(scale_prefix("enc", s)));
    bottleneck_ = block("bottleneck/");
    for (std::size_t s = 0; s < config_.scales; ++s) {
        up_.push_back(conv_param<T>(w, scale_prefix("dec", s) + "up/", pad));
        decoder_.push_back(block(scale_prefix("dec", s)));
    }
    head_ = conv_param<T>(w, "head/", pad);
}

template <typename T>
BasicTensor<T> UNet<T>::run_block(const Block& b, BasicTensor<T> x) const
{
    x = activation(normalize(conv2d(x, b.conv1), b.norm1), config_.activation);
    return activation(normalize(conv2d(x, b.conv2), b.norm2), config_.activation);
}

template <typename T>
BasicTensor<T> UNet<T>::operator()(const BasicTensor<T>& x) const
{
    const Shape& s = x.shape();
    const std::size_t multiple = std::size_t(1) << config_.scales;
    if (s.channels != config_.in_channels)
        throw ShapeMismatch("model expects " + std::to_string(config_.in_channels) + " input channels, got " +
                            to_string(s));
    if (s.height % multiple != 0 || s.width % multiple != 0)
        throw IndivisibleSize("input " + to_string(s) + " must have spatial dims divisible by " +
                              std::to_string(multiple));

    const PoolSpec pooling{config_.pooling, 2};
    std::vector<BasicTensor<T>> skips;
    BasicTensor<T> h = x;
    for (const auto& block : encoder_) {
        h = run_block(block, std::move(h));
        skips.push_back(h);
        h = pool(h, pooling);
    }
    h = run_block(bottleneck_, std::move(h));
    for (std::size_t i = config_.scales; i-- > 0;) {
        h = upsample_layer(h, config_.upsampling_filtered, up_[i], config_.upconv_filter_after);
        h = run_block(decoder_[i], concat(skips[i], h));
    }
    h = conv2d(h, head_);
    if (config_.residual)
        h = h + x;
    return h;
}

template <typename T>
BasicTensor<T> forward(const ModelConfig& c, const WeightStore& w, const BasicTensor<T>& x)
{
    return UNet<T>(c, w)(x);
}

template class UNet<float>;
template class UNet<double>;
template BasicTensor<float> forward(const ModelConfig&, const WeightStore&, const BasicTensor<float>&);
template BasicTensor<double> forward(const ModelConfig&, const WeightStore&, const BasicTensor<double>&);

} // namespace unetaf
