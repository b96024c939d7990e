// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "essr/simd.hpp"
#include "kernel_impl.hpp"

namespace essr::simd {

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar,      scalar::pointwise,   scalar::depthwise3x3,
                                   scalar::relu,     scalar::add,         scalar::pointwise_q,
                                   scalar::depthwise3x3_q};

#if defined(ESSR_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::Avx2,      avx2::pointwise,   avx2::depthwise3x3,
                                 avx2::relu,     avx2::add,         avx2::pointwise_q,
                                 avx2::depthwise3x3_q};
#endif

Isa initial_isa() noexcept {
    if (const char* env = std::getenv("ESSR_ISA")) {
        try {
            const Isa wanted = parse_isa(env);
            if (isa_supported(wanted)) return wanted;
        } catch (const Error&) {
        }
    }
    return detected_isa();
}

std::atomic<Isa>& active() noexcept {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(ESSR_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept { return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw ConfigError("ISA '" + std::string(isa_name(isa)) + "' is not supported on this CPU");
    }
    active().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw ConfigError("ISA '" + std::string(isa_name(isa)) + "' is not supported on this CPU");
    }
#if defined(ESSR_HAVE_AVX2)
    if (isa == Isa::Avx2) return kAvx2Table;
#endif
    return kScalarTable;
}

const KernelTable& kernels() noexcept {
#if defined(ESSR_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return kAvx2Table;
#endif
    return kScalarTable;
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return "scalar";
        case Isa::Avx2:
            return "avx2";
    }
    return "unknown";
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::Scalar;
    if (name == "avx2") return Isa::Avx2;
    throw ConfigError("unknown ISA '" + std::string(name) + "'");
}

}  // namespace essr::simd
