// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "essr/kernels.hpp"
#include "essr/tensor.hpp"

namespace essr {

/// 10-bit signed fixed point: real ~= value * 2^scale_exp, value in [-512, 511].
inline constexpr int kFxpBits = 10;
inline constexpr int kQMin = -512;
inline constexpr int kQMax = 511;
inline constexpr int kMinScaleExp = -24;
inline constexpr int kMaxScaleExp = 31;

struct QTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    int scale_exp = 0;
    std::vector<std::int16_t> values;

    std::size_t plane_size() const noexcept { return std::size_t(height) * std::size_t(width); }

    friend bool operator==(const QTensor&, const QTensor&) = default;
};

/// clamp(round_half_even(x / 2^scale_exp), -512, 511)
std::int16_t quantize_value(double x, int scale_exp) noexcept;
double dequantize_value(std::int16_t q, int scale_exp) noexcept;

QTensor quantize(const Tensor& x, int scale_exp);
Tensor dequantize(const QTensor& q);

/// Smallest exponent e (>= kMinScaleExp) with max_abs / 2^e <= 511.
int scale_exp_for(double max_abs);

/// calibrate_scale over a sample set; throws CalibrationError when it is empty.
int calibrate_scale(std::span<const Tensor> samples);

/// Rescale an integer held at exponent `from_exp` to `to_exp`, rounding half to even and
/// saturating to the 10-bit range.
std::int16_t requantize_value(std::int64_t v, int from_exp, int to_exp) noexcept;

/// Pointwise / depthwise weights in 10-bit fixed point. Bias, when present, is held as
/// int32 at the accumulator exponent (input_exp + weight_exp) of the layer it feeds.
struct QConvWeights {
    ConvKind kind = ConvKind::Pointwise;
    int in_channels = 0;
    int out_channels = 0;
    int weight_exp = 0;
    std::vector<std::int16_t> taps;
    std::vector<std::int32_t> bias;

    bool has_bias() const noexcept { return !bias.empty(); }

    friend bool operator==(const QConvWeights&, const QConvWeights&) = default;
};

/// Quantize taps at `weight_exp`; bias goes to exponent `input_exp + weight_exp`.
QConvWeights quantize_weights(const ConvWeights& w, int weight_exp, int input_exp);

/// Float view of quantized weights (bias recovered using `input_exp`).
ConvWeights dequantize_weights(const QConvWeights& w, int input_exp);

/// Integer convolution: int32 accumulation, one rescale per output to `out_exp`.
QTensor qconv(const QTensor& x, const QConvWeights& w, int out_exp, Padding padding = Padding::Zero);

QTensor qrelu(QTensor x);

/// a + b, both aligned to `out_exp` before saturation.
QTensor qadd(const QTensor& a, const QTensor& b, int out_exp);

}  // namespace essr
