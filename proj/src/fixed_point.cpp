// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "essr/simd.hpp"

namespace essr {

std::int16_t quantize_value(double x, int scale_exp) noexcept {
    const double scaled = std::nearbyint(std::ldexp(x, -scale_exp));
    return std::int16_t(std::clamp(scaled, double(kQMin), double(kQMax)));
}

double dequantize_value(std::int16_t q, int scale_exp) noexcept { return std::ldexp(double(q), scale_exp); }

QTensor quantize(const Tensor& x, int scale_exp) {
    QTensor q{x.channels(), x.height(), x.width(), scale_exp, {}};
    q.values.resize(x.size());
    auto d = x.data();
    for (std::size_t i = 0; i < d.size(); ++i) q.values[i] = quantize_value(d[i], scale_exp);
    return q;
}

Tensor dequantize(const QTensor& q) {
    std::vector<real> d(q.values.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = real(dequantize_value(q.values[i], q.scale_exp));
    return Tensor(q.channels, q.height, q.width, std::move(d));
}

int scale_exp_for(double max_abs) {
    if (!(max_abs > 0.0)) return kMinScaleExp;
    int e = int(std::ceil(std::log2(max_abs / double(kQMax))));
    e = std::max(e, kMinScaleExp);
    // log2 may be off by one ulp near powers of two
    while (e > kMinScaleExp && std::ldexp(max_abs, -(e - 1)) <= double(kQMax)) --e;
    while (std::ldexp(max_abs, -e) > double(kQMax)) ++e;
    if (e > kMaxScaleExp) throw CalibrationError("value range too large for the scale exponent");
    return e;
}

int calibrate_scale(std::span<const Tensor> samples) {
    if (samples.empty()) throw CalibrationError("calibrate_scale: no calibration samples");
    double m = 0.0;
    for (const Tensor& t : samples) m = std::max(m, max_abs(t));
    return scale_exp_for(m);
}

std::int16_t requantize_value(std::int64_t v, int from_exp, int to_exp) noexcept {
    const int shift = to_exp - from_exp;
    std::int64_t q = 0;
    if (shift <= 0) {
        if (shift < -40) {
            q = v == 0 ? 0 : (v > 0 ? kQMax : kQMin);
        } else {
            const std::int64_t limit = std::int64_t(1) << (62 + shift);
            q = v >= limit ? kQMax : (v <= -limit ? kQMin : v * (std::int64_t(1) << -shift));
        }
    } else if (shift >= 62) {
        q = 0;
    } else {
        const std::int64_t floor_q = v >> shift;  // arithmetic shift = floor division
        const std::int64_t rem = v - (floor_q << shift);
        const std::int64_t half = std::int64_t(1) << (shift - 1);
        q = floor_q;
        if (rem > half || (rem == half && (floor_q & 1) != 0)) ++q;
    }
    return std::int16_t(std::clamp<std::int64_t>(q, kQMin, kQMax));
}

QConvWeights quantize_weights(const ConvWeights& w, int weight_exp, int input_exp) {
    w.validate();
    QConvWeights q;
    q.kind = w.kind;
    q.in_channels = w.in_channels;
    q.out_channels = w.out_channels;
    q.weight_exp = weight_exp;
    q.taps.resize(w.taps.size());
    for (std::size_t i = 0; i < w.taps.size(); ++i) q.taps[i] = quantize_value(w.taps[i], weight_exp);
    if (w.has_bias()) {
        q.bias.resize(w.bias.size());
        const int acc_exp = weight_exp + input_exp;
        for (std::size_t i = 0; i < w.bias.size(); ++i) {
            const double s = std::nearbyint(std::ldexp(double(w.bias[i]), -acc_exp));
            q.bias[i] = std::int32_t(std::clamp(s, -double(1 << 24), double(1 << 24)));
        }
    }
    return q;
}

ConvWeights dequantize_weights(const QConvWeights& w, int input_exp) {
    ConvWeights f;
    f.kind = w.kind;
    f.in_channels = w.in_channels;
    f.out_channels = w.out_channels;
    f.taps.resize(w.taps.size());
    for (std::size_t i = 0; i < w.taps.size(); ++i) f.taps[i] = real(dequantize_value(w.taps[i], w.weight_exp));
    f.bias.resize(w.bias.size());
    for (std::size_t i = 0; i < w.bias.size(); ++i) f.bias[i] = real(std::ldexp(double(w.bias[i]), w.weight_exp + input_exp));
    return f;
}

QTensor qconv(const QTensor& x, const QConvWeights& w, int out_exp, Padding padding) {
    if (x.channels != w.in_channels) {
        throw DimensionError("qconv: input has " + std::to_string(x.channels) + " channels, weights expect " +
                             std::to_string(w.in_channels));
    }
    const std::size_t pixels = x.plane_size();
    std::vector<std::int32_t> acc(std::size_t(w.out_channels) * pixels);
    const auto& k = simd::kernels();
    const std::int32_t* bias = w.has_bias() ? w.bias.data() : nullptr;
    if (w.kind == ConvKind::Pointwise) {
        k.pointwise_q(x.values.data(), x.channels, pixels, w.taps.data(), bias, w.out_channels, acc.data());
    } else {
        k.depthwise3x3_q(x.values.data(), x.channels, x.height, x.width, w.taps.data(), bias,
                         padding == Padding::Replicate, acc.data());
    }
    QTensor out{w.out_channels, x.height, x.width, out_exp, {}};
    out.values.resize(acc.size());
    const int acc_exp = x.scale_exp + w.weight_exp;
    for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = requantize_value(acc[i], acc_exp, out_exp);
    return out;
}

QTensor qrelu(QTensor x) {
    for (auto& v : x.values) v = std::max<std::int16_t>(v, 0);
    return x;
}

QTensor qadd(const QTensor& a, const QTensor& b, int out_exp) {
    if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
        throw DimensionError("qadd: shape mismatch");
    }
    // Align both operands to the finer exponent exactly, add, then round once. Gaps
    // beyond 40 bits are truncated; the finer operand is then far below one LSB of out_exp.
    const int common = std::max(std::min(a.scale_exp, b.scale_exp), std::max(a.scale_exp, b.scale_exp) - 40);
    auto aligned = [common](std::int16_t v, int e) -> std::int64_t {
        return e >= common ? std::int64_t(v) * (std::int64_t(1) << (e - common)) : 0;
    };
    QTensor out{a.channels, a.height, a.width, out_exp, {}};
    out.values.resize(a.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const std::int64_t sum = aligned(a.values[i], a.scale_exp) + aligned(b.values[i], b.scale_exp);
        out.values[i] = requantize_value(sum, common, out_exp);
    }
    return out;
}

}  // namespace essr
