// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "essr/tensor.hpp"

namespace essr {

enum class ConvKind : std::uint8_t { Pointwise = 0, Depthwise3x3 = 1 };

enum class Padding { Zero, Replicate };

/// Weights of a 1x1 pointwise or 3x3 depthwise convolution.
///
/// Pointwise taps are laid out [out][in]; depthwise taps [channel][ky*3+kx].
/// An empty `bias` means the layer has none.
struct ConvWeights {
    ConvKind kind = ConvKind::Pointwise;
    int in_channels = 0;
    int out_channels = 0;
    std::vector<real> taps;
    std::vector<real> bias;

    static ConvWeights pointwise(int in_channels, int out_channels, bool with_bias = false);
    static ConvWeights depthwise(int channels, bool with_bias = false);

    bool has_bias() const noexcept { return !bias.empty(); }
    std::size_t param_count() const noexcept { return taps.size() + bias.size(); }

    real& pw(int o, int i) { return taps[std::size_t(o) * std::size_t(in_channels) + std::size_t(i)]; }
    real pw(int o, int i) const { return taps[std::size_t(o) * std::size_t(in_channels) + std::size_t(i)]; }
    real& dw(int c, int k) { return taps[std::size_t(c) * 9 + std::size_t(k)]; }
    real dw(int c, int k) const { return taps[std::size_t(c) * 9 + std::size_t(k)]; }

    /// Throws DimensionError when taps/bias lengths disagree with the declared shape.
    void validate() const;

    friend bool operator==(const ConvWeights&, const ConvWeights&) = default;
};

Tensor pointwise_conv(const Tensor& x, const ConvWeights& w);
Tensor depthwise_conv3x3(const Tensor& x, const ConvWeights& w, Padding padding = Padding::Zero);

/// Dispatches on `w.kind`.
Tensor conv(const Tensor& x, const ConvWeights& w, Padding padding = Padding::Zero);

Tensor relu(Tensor x);
void relu_inplace(Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);

/// Depth-to-space: (C*r*r, H, W) -> (C, H*r, W*r).
Tensor pixel_shuffle(const Tensor& x, int r);

/// Half-pixel-centre bilinear upsampling with edge clamping; r must be 2 or 4.
Tensor bilinear_resize(const Tensor& x, int r);

/// The part of bilinear_resize(x, r) covering LR rectangle [y0, y0+h) x [x0, x0+w),
/// i.e. an (C, h*r, w*r) tensor. Neighbours outside the rectangle but inside `x`
/// are used, so tiles assembled from regions match the whole-image result exactly.
Tensor bilinear_resize_region(const Tensor& x, int y0, int x0, int h, int w, int r);

}  // namespace essr
