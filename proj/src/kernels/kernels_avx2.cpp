// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached through the
// dispatch table after a CPUID check.
//
// Scalar tails use std::fma so that a pixel gets bit-identical results whether it
// lands in a vector lane or in a tail. Tiled and whole-image inference depend on it.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "kernel_impl.hpp"

namespace essr::simd::avx2 {

namespace {

constexpr std::size_t kLanes = 8;

inline void pointwise_rows4(const real* in, int in_ch, std::size_t pixels, const real* w0,
                            const real* w1, const real* w2, const real* w3, const real b[4],
                            real* d0, real* d1, real* d2, real* d3) {
    std::size_t p = 0;
    for (; p + kLanes <= pixels; p += kLanes) {
        __m256 a0 = _mm256_set1_ps(b[0]);
        __m256 a1 = _mm256_set1_ps(b[1]);
        __m256 a2 = _mm256_set1_ps(b[2]);
        __m256 a3 = _mm256_set1_ps(b[3]);
        for (int i = 0; i < in_ch; ++i) {
            const __m256 x = _mm256_loadu_ps(in + std::size_t(i) * pixels + p);
            a0 = _mm256_fmadd_ps(_mm256_set1_ps(w0[i]), x, a0);
            a1 = _mm256_fmadd_ps(_mm256_set1_ps(w1[i]), x, a1);
            a2 = _mm256_fmadd_ps(_mm256_set1_ps(w2[i]), x, a2);
            a3 = _mm256_fmadd_ps(_mm256_set1_ps(w3[i]), x, a3);
        }
        _mm256_storeu_ps(d0 + p, a0);
        _mm256_storeu_ps(d1 + p, a1);
        _mm256_storeu_ps(d2 + p, a2);
        _mm256_storeu_ps(d3 + p, a3);
    }
    for (; p < pixels; ++p) {
        real a[4] = {b[0], b[1], b[2], b[3]};
        for (int i = 0; i < in_ch; ++i) {
            const real x = in[std::size_t(i) * pixels + p];
            a[0] = std::fma(w0[i], x, a[0]);
            a[1] = std::fma(w1[i], x, a[1]);
            a[2] = std::fma(w2[i], x, a[2]);
            a[3] = std::fma(w3[i], x, a[3]);
        }
        d0[p] = a[0];
        d1[p] = a[1];
        d2[p] = a[2];
        d3[p] = a[3];
    }
}

inline void pointwise_row1(const real* in, int in_ch, std::size_t pixels, const real* w, real b,
                           real* d) {
    std::size_t p = 0;
    for (; p + kLanes <= pixels; p += kLanes) {
        __m256 a = _mm256_set1_ps(b);
        for (int i = 0; i < in_ch; ++i) {
            a = _mm256_fmadd_ps(_mm256_set1_ps(w[i]), _mm256_loadu_ps(in + std::size_t(i) * pixels + p), a);
        }
        _mm256_storeu_ps(d + p, a);
    }
    for (; p < pixels; ++p) {
        real a = b;
        for (int i = 0; i < in_ch; ++i) {
            a = std::fma(w[i], in[std::size_t(i) * pixels + p], a);
        }
        d[p] = a;
    }
}

// One output sample computed tap by tap; out-of-range taps are skipped (zero) or clamped.
inline real depthwise_sample(const real* src, int height, int width, const real* k, real b,
                             bool replicate, int y, int x) {
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
            acc = std::fma(k[ky * 3 + kx], src[std::size_t(sy) * std::size_t(width) + std::size_t(sx)], acc);
        }
    }
    return acc;
}

inline std::int32_t depthwise_sample_q(const std::int16_t* src, int height, int width,
                                       const std::int16_t* k, std::int32_t b, bool replicate,
                                       int y, int x) {
    std::int32_t acc = b;
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
    return acc;
}

}  // namespace

void pointwise(const real* in, int in_ch, std::size_t pixels, const real* taps, const real* bias,
               int out_ch, real* out) {
    int o = 0;
    for (; o + 4 <= out_ch; o += 4) {
        const real b[4] = {bias ? bias[o] : real(0), bias ? bias[o + 1] : real(0),
                           bias ? bias[o + 2] : real(0), bias ? bias[o + 3] : real(0)};
        const real* w = taps + std::size_t(o) * std::size_t(in_ch);
        pointwise_rows4(in, in_ch, pixels, w, w + in_ch, w + 2 * in_ch, w + 3 * in_ch, b,
                        out + std::size_t(o) * pixels, out + std::size_t(o + 1) * pixels,
                        out + std::size_t(o + 2) * pixels, out + std::size_t(o + 3) * pixels);
    }
    for (; o < out_ch; ++o) {
        pointwise_row1(in, in_ch, pixels, taps + std::size_t(o) * std::size_t(in_ch),
                       bias ? bias[o] : real(0), out + std::size_t(o) * pixels);
    }
}

void depthwise3x3(const real* in, int channels, int height, int width, const real* taps,
                  const real* bias, bool replicate, real* out) {
    const std::size_t plane = std::size_t(height) * std::size_t(width);
    const std::size_t w = std::size_t(width);
    for (int c = 0; c < channels; ++c) {
        const real* src = in + std::size_t(c) * plane;
        const real* k = taps + std::size_t(c) * 9;
        real* dst = out + std::size_t(c) * plane;
        const real b = bias ? bias[c] : real(0);
        __m256 kv[9];
        for (int t = 0; t < 9; ++t) kv[t] = _mm256_set1_ps(k[t]);
        const __m256 bv = _mm256_set1_ps(b);
        for (int y = 0; y < height; ++y) {
            int x = 0;
            if (y == 0 || y == height - 1 || width < 3) {
                for (; x < width; ++x) {
                    dst[std::size_t(y) * w + std::size_t(x)] = depthwise_sample(src, height, width, k, b, replicate, y, x);
                }
                continue;
            }
            dst[std::size_t(y) * w] = depthwise_sample(src, height, width, k, b, replicate, y, 0);
            x = 1;
            const real* r0 = src + std::size_t(y - 1) * w;
            const real* r1 = src + std::size_t(y) * w;
            const real* r2 = src + std::size_t(y + 1) * w;
            for (; x + int(kLanes) <= width - 1; x += int(kLanes)) {
                __m256 acc = bv;
                acc = _mm256_fmadd_ps(kv[0], _mm256_loadu_ps(r0 + x - 1), acc);
                acc = _mm256_fmadd_ps(kv[1], _mm256_loadu_ps(r0 + x), acc);
                acc = _mm256_fmadd_ps(kv[2], _mm256_loadu_ps(r0 + x + 1), acc);
                acc = _mm256_fmadd_ps(kv[3], _mm256_loadu_ps(r1 + x - 1), acc);
                acc = _mm256_fmadd_ps(kv[4], _mm256_loadu_ps(r1 + x), acc);
                acc = _mm256_fmadd_ps(kv[5], _mm256_loadu_ps(r1 + x + 1), acc);
                acc = _mm256_fmadd_ps(kv[6], _mm256_loadu_ps(r2 + x - 1), acc);
                acc = _mm256_fmadd_ps(kv[7], _mm256_loadu_ps(r2 + x), acc);
                acc = _mm256_fmadd_ps(kv[8], _mm256_loadu_ps(r2 + x + 1), acc);
                _mm256_storeu_ps(dst + std::size_t(y) * w + std::size_t(x), acc);
            }
            for (; x < width; ++x) {
                dst[std::size_t(y) * w + std::size_t(x)] = depthwise_sample(src, height, width, k, b, replicate, y, x);
            }
        }
    }
}

void relu(real* data, std::size_t n) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_ps(data + i, _mm256_max_ps(_mm256_loadu_ps(data + i), zero));
    }
    for (; i < n; ++i) {
        data[i] = data[i] > real(0) ? data[i] : real(0);
    }
}

void add(const real* a, const real* b, real* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] + b[i];
    }
}

void pointwise_q(const std::int16_t* in, int in_ch, std::size_t pixels, const std::int16_t* taps,
                 const std::int32_t* bias, int out_ch, std::int32_t* out) {
    for (int o = 0; o < out_ch; ++o) {
        std::int32_t* dst = out + std::size_t(o) * pixels;
        const std::int16_t* w = taps + std::size_t(o) * std::size_t(in_ch);
        const std::int32_t b = bias ? bias[o] : 0;
        std::size_t p = 0;
        for (; p + kLanes <= pixels; p += kLanes) {
            __m256i acc = _mm256_set1_epi32(b);
            for (int i = 0; i < in_ch; ++i) {
                const __m128i x16 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + std::size_t(i) * pixels + p));
                acc = _mm256_add_epi32(acc, _mm256_mullo_epi32(_mm256_cvtepi16_epi32(x16), _mm256_set1_epi32(w[i])));
            }
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + p), acc);
        }
        for (; p < pixels; ++p) {
            std::int32_t acc = b;
            for (int i = 0; i < in_ch; ++i) {
                acc += std::int32_t(w[i]) * std::int32_t(in[std::size_t(i) * pixels + p]);
            }
            dst[p] = acc;
        }
    }
}

void depthwise3x3_q(const std::int16_t* in, int channels, int height, int width,
                    const std::int16_t* taps, const std::int32_t* bias, bool replicate,
                    std::int32_t* out) {
    const std::size_t plane = std::size_t(height) * std::size_t(width);
    const std::size_t w = std::size_t(width);
    auto load8 = [](const std::int16_t* p) {
        return _mm256_cvtepi16_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(p)));
    };
    for (int c = 0; c < channels; ++c) {
        const std::int16_t* src = in + std::size_t(c) * plane;
        const std::int16_t* k = taps + std::size_t(c) * 9;
        std::int32_t* dst = out + std::size_t(c) * plane;
        const std::int32_t b = bias ? bias[c] : 0;
        __m256i kv[9];
        for (int t = 0; t < 9; ++t) kv[t] = _mm256_set1_epi32(k[t]);
        for (int y = 0; y < height; ++y) {
            int x = 0;
            if (y == 0 || y == height - 1 || width < 3) {
                for (; x < width; ++x) {
                    dst[std::size_t(y) * w + std::size_t(x)] = depthwise_sample_q(src, height, width, k, b, replicate, y, x);
                }
                continue;
            }
            dst[std::size_t(y) * w] = depthwise_sample_q(src, height, width, k, b, replicate, y, 0);
            x = 1;
            const std::int16_t* rows[3] = {src + std::size_t(y - 1) * w, src + std::size_t(y) * w,
                                           src + std::size_t(y + 1) * w};
            for (; x + int(kLanes) <= width - 1; x += int(kLanes)) {
                __m256i acc = _mm256_set1_epi32(b);
                for (int ky = 0; ky < 3; ++ky) {
                    for (int kx = 0; kx < 3; ++kx) {
                        acc = _mm256_add_epi32(acc, _mm256_mullo_epi32(kv[ky * 3 + kx], load8(rows[ky] + x + kx - 1)));
                    }
                }
                _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + std::size_t(y) * w + std::size_t(x)), acc);
            }
            for (; x < width; ++x) {
                dst[std::size_t(y) * w + std::size_t(x)] = depthwise_sample_q(src, height, width, k, b, replicate, y, x);
            }
        }
    }
}

}  // namespace essr::simd::avx2
