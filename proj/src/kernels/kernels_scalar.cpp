// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels. Plain multiply then add, no contraction; every other ISA
// variant is tested against these.

#include <algorithm>

#include "kernel_impl.hpp"

namespace essr::simd::scalar {

void pointwise(const real* in, int in_ch, std::size_t pixels, const real* taps, const real* bias,
               int out_ch, real* out) {
    for (int o = 0; o < out_ch; ++o) {
        real* dst = out + std::size_t(o) * pixels;
        const real b = bias ? bias[o] : real(0);
        std::fill(dst, dst + pixels, b);
        const real* w = taps + std::size_t(o) * std::size_t(in_ch);
        for (int i = 0; i < in_ch; ++i) {
            const real* src = in + std::size_t(i) * pixels;
            const real wi = w[i];
            for (std::size_t p = 0; p < pixels; ++p) {
                dst[p] += wi * src[p];
            }
        }
    }
}

void depthwise3x3(const real* in, int channels, int height, int width, const real* taps,
                  const real* bias, bool replicate, real* out) {
    const std::size_t plane = std::size_t(height) * std::size_t(width);
    for (int c = 0; c < channels; ++c) {
        const real* src = in + std::size_t(c) * plane;
        const real* k = taps + std::size_t(c) * 9;
        real* dst = out + std::size_t(c) * plane;
        const real b = bias ? bias[c] : real(0);
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                real acc = b;
                for (int ky = 0; ky < 3; ++ky) {
                    int sy = y + ky - 1;
                    if (sy < 0 || sy >= height) {
                        if (!replicate) continue;
                        sy = clamp_index(sy, height);
                    }
                    for (int kx = 0; kx < 3; ++kx) {
                        int sx = x + kx - 1;
                        if (sx < 0 || sx >= width) {
                            if (!replicate) continue;
                            sx = clamp_index(sx, width);
                        }
                        acc += k[ky * 3 + kx] * src[std::size_t(sy) * std::size_t(width) + std::size_t(sx)];
                    }
                }
                dst[std::size_t(y) * std::size_t(width) + std::size_t(x)] = acc;
            }
        }
    }
}

void relu(real* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        data[i] = data[i] > real(0) ? data[i] : real(0);
    }
}

void add(const real* a, const real* b, real* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void pointwise_q(const std::int16_t* in, int in_ch, std::size_t pixels, const std::int16_t* taps,
                 const std::int32_t* bias, int out_ch, std::int32_t* out) {
    for (int o = 0; o < out_ch; ++o) {
        std::int32_t* dst = out + std::size_t(o) * pixels;
        std::fill(dst, dst + pixels, bias ? bias[o] : 0);
        const std::int16_t* w = taps + std::size_t(o) * std::size_t(in_ch);
        for (int i = 0; i < in_ch; ++i) {
            const std::int16_t* src = in + std::size_t(i) * pixels;
            const std::int32_t wi = w[i];
            for (std::size_t p = 0; p < pixels; ++p) {
                dst[p] += wi * std::int32_t(src[p]);
            }
        }
    }
}

void depthwise3x3_q(const std::int16_t* in, int channels, int height, int width,
                    const std::int16_t* taps, const std::int32_t* bias, bool replicate,
                    std::int32_t* out) {
    const std::size_t plane = std::size_t(height) * std::size_t(width);
    for (int c = 0; c < channels; ++c) {
        const std::int16_t* src = in + std::size_t(c) * plane;
        const std::int16_t* k = taps + std::size_t(c) * 9;
        std::int32_t* dst = out + std::size_t(c) * plane;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                std::int32_t acc = bias ? bias[c] : 0;
                for (int ky = 0; ky < 3; ++ky) {
                    int sy = y + ky - 1;
                    if (sy < 0 || sy >= height) {
                        if (!replicate) continue;
                        sy = clamp_index(sy, height);
                    }
                    for (int kx = 0; kx < 3; ++kx) {
                        int sx = x + kx - 1;
                        if (sx < 0 || sx >= width) {
                            if (!replicate) continue;
                            sx = clamp_index(sx, width);
                        }
                        acc += std::int32_t(k[ky * 3 + kx]) *
                               std::int32_t(src[std::size_t(sy) * std::size_t(width) + std::size_t(sx)]);
                    }
                }
                dst[std::size_t(y) * std::size_t(width) + std::size_t(x)] = acc;
            }
        }
    }
}

}  // namespace essr::simd::scalar
