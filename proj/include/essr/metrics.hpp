// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "essr/tensor.hpp"

namespace essr {

struct QualityMetrics {
    double psnr_y = 0.0;  ///< dB, +inf for identical luminance
    double ssim_y = 0.0;
};

/// PSNR on BT.601 luminance, peak 255. DimensionError on shape mismatch.
double psnr_y(const Tensor& a, const Tensor& b);

/// Mean SSIM on BT.601 luminance: 11-tap Gaussian window (sigma 1.5), K1 0.01, K2 0.03,
/// L 255, evaluated where the window fits inside the image. Images must be at least 11x11.
double ssim_y(const Tensor& a, const Tensor& b);

QualityMetrics quality(const Tensor& a, const Tensor& b);

}  // namespace essr
