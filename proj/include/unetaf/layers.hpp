#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "unetaf/tensor.hpp"

namespace unetaf {

enum class Padding { Circular, Zeros, Reflect };
enum class NormMode { LayerNormAF, BatchNorm, InstanceNorm, LayerNorm, None };
enum class ActivationBase { GELU, ReLU, Poly };
enum class PoolKind { BlurPool, MaxPool, AvgPool, MaxBlurPool };

std::string_view name(Padding p);
std::string_view name(NormMode m);
std::string_view name(ActivationBase a);
std::string_view name(PoolKind k);

// Case-insensitive parsers; throw ConfigError listing the accepted names.
Padding parse_padding(std::string_view s);
NormMode parse_norm(std::string_view s);
ActivationBase parse_activation(std::string_view s);
PoolKind parse_pooling(std::string_view s);

/// Weights are (out_channels, in_channels, kh, kw) with odd kh and kw.
template <typename T>
struct ConvParams {
    BasicTensor<T> weights;
    std::vector<T> bias;
    Padding padding = Padding::Circular;

    std::size_t out_channels() const { return weights.shape().batch; }
    std::size_t in_channels() const { return weights.shape().channels; }
};

template <typename T>
struct NormParams {
    NormMode mode = NormMode::LayerNormAF;
    std::vector<T> gamma;
    std::vector<T> beta;
    T epsilon = T(1e-5);
    // BatchNorm inference statistics.
    std::vector<T> running_mean;
    std::vector<T> running_var;
};

struct ActivationSpec {
    ActivationBase base = ActivationBase::GELU;
    bool filtered = true;
    std::size_t oversample = 2;

    friend bool operator==(const ActivationSpec&, const ActivationSpec&) = default;
};

struct PoolSpec {
    PoolKind kind = PoolKind::BlurPool;
    std::size_t factor = 2;
};

/// Same-size cross-correlation with the configured boundary handling, plus bias.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const ConvParams<T>& p);

/// Scalar base nonlinearities. Poly is u + u^2/4.
double gelu(double u);
double relu(double u);
double poly(double u);
double apply_base(ActivationBase base, double u);

/// Pointwise activation, or its filtered form: sinc-upsample by `oversample`,
/// apply the base function, then low-pass and decimate back.
template <typename T>
BasicTensor<T> activation(const BasicTensor<T>& x, const ActivationSpec& s);

template <typename T>
BasicTensor<T> pool(const BasicTensor<T>& x, const PoolSpec& s);

/// Zero insertion with gain 4: out(2i, 2j) = 4 * x(i, j), zeros elsewhere.
template <typename T>
BasicTensor<T> zero_insert(const BasicTensor<T>& x);

/// Learned 2x upsampling. Unfiltered: zero insertion then conv. Filtered: ideal
/// interpolation then conv, or with `filter_after_conv` zero insertion, conv,
/// then low-pass to the input band.
template <typename T>
BasicTensor<T> upsample_layer(const BasicTensor<T>& x, bool filtered, const ConvParams<T>& p,
                              bool filter_after_conv = false);

template <typename T>
BasicTensor<T> normalize(const BasicTensor<T>& x, const NormParams<T>& p);

/// Channel-wise concatenation, channels of `a` first.
template <typename T>
BasicTensor<T> concat(const BasicTensor<T>& a, const BasicTensor<T>& b);

} // namespace unetaf
