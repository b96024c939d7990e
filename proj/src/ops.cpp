// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "essr/kernels.hpp"
#include "essr/simd.hpp"

namespace essr {

ConvWeights ConvWeights::pointwise(int in_channels, int out_channels, bool with_bias) {
    if (in_channels < 1 || out_channels < 1) {
        throw DimensionError("pointwise conv needs at least one input and output channel");
    }
    ConvWeights w;
    w.kind = ConvKind::Pointwise;
    w.in_channels = in_channels;
    w.out_channels = out_channels;
    w.taps.assign(std::size_t(in_channels) * std::size_t(out_channels), real(0));
    if (with_bias) w.bias.assign(std::size_t(out_channels), real(0));
    return w;
}

ConvWeights ConvWeights::depthwise(int channels, bool with_bias) {
    if (channels < 1) {
        throw DimensionError("depthwise conv needs at least one channel");
    }
    ConvWeights w;
    w.kind = ConvKind::Depthwise3x3;
    w.in_channels = channels;
    w.out_channels = channels;
    w.taps.assign(std::size_t(channels) * 9, real(0));
    if (with_bias) w.bias.assign(std::size_t(channels), real(0));
    return w;
}

void ConvWeights::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        throw DimensionError("conv weights with non-positive channel count");
    }
    std::size_t expected = 0;
    if (kind == ConvKind::Pointwise) {
        expected = std::size_t(in_channels) * std::size_t(out_channels);
    } else {
        if (in_channels != out_channels) {
            throw DimensionError("depthwise conv must have in_channels == out_channels");
        }
        expected = std::size_t(in_channels) * 9;
    }
    if (taps.size() != expected) {
        throw DimensionError("conv taps length " + std::to_string(taps.size()) + ", expected " +
                             std::to_string(expected));
    }
    if (!bias.empty() && bias.size() != std::size_t(out_channels)) {
        throw DimensionError("conv bias length " + std::to_string(bias.size()) + ", expected " +
                             std::to_string(out_channels));
    }
}

Tensor pointwise_conv(const Tensor& x, const ConvWeights& w) {
    if (w.kind != ConvKind::Pointwise) throw DimensionError("pointwise_conv given depthwise weights");
    w.validate();
    if (x.channels() != w.in_channels) {
        throw DimensionError("pointwise_conv: input has " + std::to_string(x.channels()) +
                             " channels, weights expect " + std::to_string(w.in_channels));
    }
    Tensor out(w.out_channels, x.height(), x.width());
    simd::kernels().pointwise(x.data().data(), x.channels(), x.plane_size(), w.taps.data(),
                              w.has_bias() ? w.bias.data() : nullptr, w.out_channels,
                              out.data().data());
    return out;
}

Tensor depthwise_conv3x3(const Tensor& x, const ConvWeights& w, Padding padding) {
    if (w.kind != ConvKind::Depthwise3x3) throw DimensionError("depthwise_conv3x3 given pointwise weights");
    w.validate();
    if (x.channels() != w.in_channels) {
        throw DimensionError("depthwise_conv3x3: input has " + std::to_string(x.channels()) +
                             " channels, weights expect " + std::to_string(w.in_channels));
    }
    Tensor out(x.channels(), x.height(), x.width());
    simd::kernels().depthwise3x3(x.data().data(), x.channels(), x.height(), x.width(),
                                 w.taps.data(), w.has_bias() ? w.bias.data() : nullptr,
                                 padding == Padding::Replicate, out.data().data());
    return out;
}

Tensor conv(const Tensor& x, const ConvWeights& w, Padding padding) {
    return w.kind == ConvKind::Pointwise ? pointwise_conv(x, w) : depthwise_conv3x3(x, w, padding);
}

void relu_inplace(Tensor& x) { simd::kernels().relu(x.data().data(), x.size()); }

Tensor relu(Tensor x) {
    relu_inplace(x);
    return x;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw DimensionError("add: shape mismatch");
    Tensor out(a.channels(), a.height(), a.width());
    simd::kernels().add(a.data().data(), b.data().data(), out.data().data(), a.size());
    return out;
}

Tensor pixel_shuffle(const Tensor& x, int r) {
    if (r < 1 || x.channels() % (r * r) != 0) {
        throw DimensionError("pixel_shuffle: " + std::to_string(x.channels()) +
                             " channels not divisible by r^2 = " + std::to_string(r * r));
    }
    const int c_out = x.channels() / (r * r);
    Tensor out(c_out, x.height() * r, x.width() * r);
    for (int c = 0; c < c_out; ++c) {
        for (int dy = 0; dy < r; ++dy) {
            for (int dx = 0; dx < r; ++dx) {
                const int src_c = c * r * r + dy * r + dx;
                for (int y = 0; y < x.height(); ++y) {
                    for (int xx = 0; xx < x.width(); ++xx) {
                        out.at(c, y * r + dy, xx * r + dx) = x.at(src_c, y, xx);
                    }
                }
            }
        }
    }
    return out;
}

namespace {

struct Tap {
    int lo;
    int hi;
    double frac;
};

// Source taps for output coordinate `d` of an axis of length n upsampled by r.
Tap source_tap(int d, int r, int n) {
    const double src = (double(d) + 0.5) / double(r) - 0.5;
    const double fl = std::floor(src);
    const int i0 = int(fl);
    return {std::clamp(i0, 0, n - 1), std::clamp(i0 + 1, 0, n - 1), src - fl};
}

}  // namespace

Tensor bilinear_resize_region(const Tensor& x, int y0, int x0, int h, int w, int r) {
    if (r != 2 && r != 4) {
        throw ConfigError("bilinear_resize: unsupported scale " + std::to_string(r) + " (expected 2 or 4)");
    }
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > x.height() || x0 + w > x.width()) {
        throw DimensionError("bilinear_resize_region: rectangle outside input");
    }
    Tensor out(x.channels(), h * r, w * r);
    std::vector<Tap> xs(std::size_t(w) * std::size_t(r));
    for (int ox = 0; ox < w * r; ++ox) xs[std::size_t(ox)] = source_tap(x0 * r + ox, r, x.width());
    for (int c = 0; c < x.channels(); ++c) {
        for (int oy = 0; oy < h * r; ++oy) {
            const Tap ty = source_tap(y0 * r + oy, r, x.height());
            for (int ox = 0; ox < w * r; ++ox) {
                const Tap& tx = xs[std::size_t(ox)];
                const double a = x.at(c, ty.lo, tx.lo);
                const double b = x.at(c, ty.lo, tx.hi);
                const double cc = x.at(c, ty.hi, tx.lo);
                const double d = x.at(c, ty.hi, tx.hi);
                const double top = a + (b - a) * tx.frac;
                const double bot = cc + (d - cc) * tx.frac;
                double v = top + (bot - top) * ty.frac;
                v = std::clamp(v, std::min({a, b, cc, d}), std::max({a, b, cc, d}));
                out.at(c, oy, ox) = real(v);
            }
        }
    }
    return out;
}

Tensor bilinear_resize(const Tensor& x, int r) {
    return bilinear_resize_region(x, 0, 0, x.height(), x.width(), r);
}

}  // namespace essr
