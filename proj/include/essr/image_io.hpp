// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "essr/tensor.hpp"

namespace essr {

/// Reads a PNG as an RGB tensor with values in [0, 255]. Grey, palette and alpha inputs
/// are converted to RGB8. IoError when the file is missing or not a PNG.
Tensor read_png(const std::string& path);

/// Writes a 3-channel tensor as 8-bit RGB, rounding half to even and clamping to [0, 255].
void write_png(const std::string& path, const Tensor& rgb);

/// Interleaved RGB8 bytes of a 3-channel tensor, same rounding as write_png.
std::vector<std::uint8_t> to_rgb8(const Tensor& rgb);

/// Inverse of to_rgb8.
Tensor from_rgb8(const std::uint8_t* data, int width, int height);

/// Rounds every sample to an 8-bit value as stored in a PNG.
Tensor quantize_to_8bit(const Tensor& rgb);

}  // namespace essr
