// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "essr/model.hpp"
#include "essr/quantized_model.hpp"

namespace essr {

/// Little-endian weight file layout:
///
///   "ESSR" | version u16 | scale u8 | width u16 | n_sfb u8 | with_bias u8
///   per tensor, in WeightStore order:
///     kind u8 | in_ch u16 | out_ch u16 | tap count u32 | taps | bias
///
/// Version 1 (float): taps and bias are f32.
/// Version 2 (FXP10): taps are i16 holding 10-bit values, bias is i32 at the
/// accumulator exponent, then weight_exp i8 | input_exp i8 | output_exp i8.
inline constexpr std::uint16_t kFloatFormatVersion = 1;
inline constexpr std::uint16_t kFxp10FormatVersion = 2;

struct LoadedWeights {
    ModelConfig cfg;
    WeightStore weights;
};

std::vector<std::uint8_t> save_weights(const WeightStore& w, const ModelConfig& cfg);
LoadedWeights load_weights(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> save_quantized(const QuantizedModel& q);
QuantizedModel load_quantized(std::span<const std::uint8_t> bytes);

/// Format version of a weight file, after checking the magic. Throws ParseError.
std::uint16_t peek_format_version(std::span<const std::uint8_t> bytes);

/// Human-readable name of tensor `index` ("first_pw", "sfb[2].dw1", "recon_pw", ...).
std::string tensor_name(std::size_t index, int n_sfb);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace essr
