// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "essr/common.hpp"

namespace essr::simd {

#define ESSR_DECLARE_KERNELS                                                                       \
    void pointwise(const real* in, int in_ch, std::size_t pixels, const real* taps,               \
                   const real* bias, int out_ch, real* out);                                       \
    void depthwise3x3(const real* in, int channels, int height, int width, const real* taps,     \
                      const real* bias, bool replicate, real* out);                                \
    void relu(real* data, std::size_t n);                                                          \
    void add(const real* a, const real* b, real* out, std::size_t n);                             \
    void pointwise_q(const std::int16_t* in, int in_ch, std::size_t pixels,                       \
                     const std::int16_t* taps, const std::int32_t* bias, int out_ch,              \
                     std::int32_t* out);                                                           \
    void depthwise3x3_q(const std::int16_t* in, int channels, int height, int width,              \
                        const std::int16_t* taps, const std::int32_t* bias, bool replicate,       \
                        std::int32_t* out);

namespace scalar {
ESSR_DECLARE_KERNELS
}

#if defined(ESSR_HAVE_AVX2)
namespace avx2 {
ESSR_DECLARE_KERNELS
}
#endif

#undef ESSR_DECLARE_KERNELS

inline int clamp_index(int v, int n) noexcept { return v < 0 ? 0 : (v >= n ? n - 1 : v); }

}  // namespace essr::simd
