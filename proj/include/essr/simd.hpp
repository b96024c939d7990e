// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "essr/common.hpp"

namespace essr::simd {

enum class Isa { Scalar, Avx2 };

/// Raw inner-loop kernels. All planes are channel-major, row-major inside a plane.
///
/// Float kernels: `bias` may be null. Integer kernels accumulate 10-bit operands in
/// int32; the caller rescales. Every ISA variant accumulates taps in the same order,
/// the vector variants with fused multiply-add.
struct KernelTable {
    Isa isa;
    void (*pointwise)(const real* in, int in_ch, std::size_t pixels, const real* taps,
                      const real* bias, int out_ch, real* out);
    void (*depthwise3x3)(const real* in, int channels, int height, int width, const real* taps,
                         const real* bias, bool replicate, real* out);
    void (*relu)(real* data, std::size_t n);
    void (*add)(const real* a, const real* b, real* out, std::size_t n);
    void (*pointwise_q)(const std::int16_t* in, int in_ch, std::size_t pixels,
                        const std::int16_t* taps, const std::int32_t* bias, int out_ch,
                        std::int32_t* out);
    void (*depthwise3x3_q)(const std::int16_t* in, int channels, int height, int width,
                           const std::int16_t* taps, const std::int32_t* bias, bool replicate,
                           std::int32_t* out);
};

/// Best ISA the running CPU supports.
Isa detected_isa() noexcept;

bool isa_supported(Isa isa) noexcept;

/// ISA used by the tensor ops. Defaults to detected_isa(); ESSR_ISA=scalar|avx2 overrides.
Isa active_isa() noexcept;

/// Throws ConfigError if the CPU lacks `isa`.
void set_active_isa(Isa isa);

const KernelTable& kernels() noexcept;
const KernelTable& kernels_for(Isa isa);

std::string_view isa_name(Isa isa) noexcept;
Isa parse_isa(std::string_view name);

}  // namespace essr::simd
