#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unetaf/layers.hpp"
#include "unetaf/rng.hpp"
#include "unetaf/tensor.hpp"
#include "unetaf/weights.hpp"

namespace unetaf {

/// Architecture selectors. Defaults are the desk-scale alias-free network.
struct ModelConfig {
    std::size_t scales = 3;
    std::size_t base_channels = 16;
    std::size_t in_channels = 3;
    std::size_t out_channels = 3;
    Padding padding = Padding::Circular;
    NormMode norm = NormMode::LayerNormAF;
    ActivationSpec activation{};
    PoolKind pooling = PoolKind::BlurPool;
    bool upsampling_filtered = true;
    bool residual = true;
    /// Apply the up-convolution's low-pass after its conv instead of before.
    bool upconv_filter_after = false;

    /// Throws ConfigError for inconsistent settings.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class Preset { Ronneberger, Jin, AF, AFDenoise };

std::string_view name(Preset p);
/// Accepts "Ronneberger", "Jin", "AF", "AF_denoise" (case-insensitive).
Preset parse_preset(std::string_view s);
ModelConfig preset(Preset p);
/// Throws UnknownPreset.
ModelConfig preset(std::string_view name);

/// Switches a config to the full-size profile (4 scales, 64 base channels).
ModelConfig full_profile(ModelConfig c);

/// Every parameter the config needs, in construction order.
std::vector<std::pair<std::string, std::vector<std::uint64_t>>> parameter_layout(const ModelConfig& c);

/// He-normal conv weights (std = sqrt(2 / fan_in)), zero biases, unit gamma,
/// zero beta, BatchNorm statistics (0, 1).
WeightStore init(const ModelConfig& c, Rng& rng);

/// Throws ShapeMismatch when `w` lacks a parameter of the layout, has one with
/// different dims, or carries parameters the config does not use.
void check_weights(const ModelConfig& c, const WeightStore& w);

/// A UNet bound to its weights. Evaluation is const and thread-safe.
template <typename T>
class UNet {
public:
    UNet(ModelConfig config, const WeightStore& weights);

    BasicTensor<T> operator()(const BasicTensor<T>& x) const;

    const ModelConfig& config() const { return config_; }

private:
    struct Block {
        ConvParams<T> conv1;
        NormParams<T> norm1;
        ConvParams<T> conv2;
        NormParams<T> norm2;
    };

    BasicTensor<T> run_block(const Block& b, BasicTensor<T> x) const;

    ModelConfig config_;
    std::vector<Block> encoder_;
    Block bottleneck_;
    std::vector<ConvParams<T>> up_;   // indexed by scale
    std::vector<Block> decoder_;      // indexed by scale
    ConvParams<T> head_;
};

template <typename T>
BasicTensor<T> forward(const ModelConfig& c, const WeightStore& w, const BasicTensor<T>& x);

} // namespace unetaf
