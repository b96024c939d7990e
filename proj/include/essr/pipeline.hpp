// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "essr/dispatch.hpp"
#include "essr/model.hpp"
#include "essr/quantized_model.hpp"
#include "essr/tiling.hpp"

namespace essr {

enum class Precision { Float, Fxp10 };

std::string_view precision_name(Precision p) noexcept;
Precision parse_precision(std::string_view name);

struct UpscaleOptions {
    Thresholds thresholds;
    bool adaptive = false;  ///< run the per-second FullWidth controller
    int patch = 32;
    int overlap = 2;        ///< LR pixels; ignored by the lossless mode
    BoundaryMode boundary = BoundaryMode::OverlapAverage;
    Precision precision = Precision::Float;
    LaplacianKernel kernel = LaplacianKernel::FourNeighbor;
    int threads = 0;        ///< 0: one per hardware thread
};

struct UpscaleResult {
    Tensor sr;
    TileGrid grid;
    std::vector<PatchDecision> decisions;  ///< raster order, one per tile
};

/// Tile grid used for an image of this size under `opts`.
TileGrid plan_for(int lr_w, int lr_h, const ModelConfig& cfg, const UpscaleOptions& opts);

/// Scores every tile in raster order and picks its subnet. With a controller the
/// decisions go through it and the frame is closed afterwards.
std::vector<PatchDecision> decide_tiles(const Tensor& lr, const TileGrid& grid, const UpscaleOptions& opts,
                                        Controller* controller = nullptr, int frame = 0);

class Upscaler {
public:
    /// Float path. fxp10 requests need the quantized constructor.
    Upscaler(Model model, UpscaleOptions opts);
    Upscaler(Model model, QuantizedModel quantized, UpscaleOptions opts);

    const Model& model() const noexcept { return model_; }
    const UpscaleOptions& options() const noexcept { return opts_; }

    /// Decide, infer every tile on a worker pool, then fuse.
    UpscaleResult run(const Tensor& lr, Controller* controller = nullptr, int frame = 0) const;

    /// Inference and fusion for precomputed decisions.
    Tensor infer(const Tensor& lr, const TileGrid& grid, std::span<const PatchDecision> decisions) const;

private:
    TileOutput run_tile(const Tensor& lr, const Tile& tile, SubnetId subnet, const TileGrid& grid) const;

    Model model_;
    std::optional<QuantizedModel> quantized_;
    UpscaleOptions opts_;
};

/// LR-sized overlay: each owned tile area tinted green (bilinear), yellow (half width)
/// or red (full width) over the image luminance.
Tensor score_map(const Tensor& lr, const TileGrid& grid, std::span<const PatchDecision> decisions);

}  // namespace essr
