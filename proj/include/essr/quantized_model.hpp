// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "essr/fixed_point.hpp"
#include "essr/model.hpp"

namespace essr {

/// One convolution of the FXP10 network with its activation exponents.
struct QuantizedLayer {
    QConvWeights weights;
    int input_exp = 0;
    int output_exp = 0;

    friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

/// Whole network in 10-bit fixed point; layers follow WeightStore serialization order.
struct QuantizedModel {
    ModelConfig cfg;
    std::vector<QuantizedLayer> layers;

    void validate() const;

    friend bool operator==(const QuantizedModel&, const QuantizedModel&) = default;
};

/// Observed per-layer activation ranges (max |x|), indexed like WeightStore::tensors().
struct ActivationRanges {
    std::vector<double> input_max;
    std::vector<double> output_max;
    std::size_t samples = 0;
};

/// Run both network subnets over `patches` in float and record every layer's ranges.
/// Throws CalibrationError when `patches` is empty.
ActivationRanges collect_ranges(const ModelConfig& cfg, const WeightStore& w, std::span<const Tensor> patches);

/// Weight exponents come from each tensor's own max |tap|; activation exponents from `ranges`.
QuantizedModel quantize_model(const ModelConfig& cfg, const WeightStore& w, const ActivationRanges& ranges);

/// Re-quantize float weights keeping the activation exponents of `reference`.
QuantizedModel requantize_model(const WeightStore& w, const QuantizedModel& reference);

/// Float weights equal to the fixed-point ones.
WeightStore dequantize_store(const QuantizedModel& q);

/// Integer inference of `subnet` (FullWidth or HalfWidth). Output is dequantized.
Tensor forward_fxp(const Tensor& patch, const QuantizedModel& q, SubnetId subnet);

struct LayerQuantError {
    double max_abs_error = 0.0;
    double half_step = 0.0;
};

/// |w - dequantize(quantize(w))| per tensor, next to the tensor's half quantization step.
std::vector<LayerQuantError> weight_quant_errors(const WeightStore& w, const QuantizedModel& q);

}  // namespace essr
