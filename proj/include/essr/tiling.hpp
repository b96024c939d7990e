// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "essr/tensor.hpp"

namespace essr {

/// Axis-aligned rectangle in pixel units, [x, x+w) x [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const noexcept { return x + w; }
    int bottom() const noexcept { return y + h; }
    bool contains(const Rect& r) const noexcept {
        return r.x >= x && r.y >= y && r.right() <= right() && r.bottom() <= bottom();
    }
    Rect scaled(int s) const noexcept { return {x * s, y * s, w * s, h * s}; }
    Rect intersect(const Rect& r) const noexcept;

    friend bool operator==(const Rect&, const Rect&) = default;
};

enum class BoundaryMode {
    NonOverlap,         ///< place tiles side by side, no blending
    OverlapAverage,     ///< blend overlapping SR pixels by coverage count
    RecomputeLossless,  ///< tiles carry receptive-field context; cropped outputs are exact
};

std::string_view boundary_mode_name(BoundaryMode mode) noexcept;
/// "none", "average", "lossless"
BoundaryMode parse_boundary_mode(std::string_view name);

/// One LR tile. `src` is what the network sees (may reach past the image, which is then
/// replicate padded); `core` is src clipped to the image; `owned` is the part of the image
/// this tile alone is responsible for in disjoint placement. Owned rects partition the image.
struct Tile {
    int row = 0;
    int col = 0;
    Rect src;
    Rect core;
    Rect owned;
};

struct TileGrid {
    int image_w = 0;
    int image_h = 0;
    int patch = 32;
    int lr_overlap = 2;
    int context = 0;  ///< extra LR context around each core (RecomputeLossless)
    int rows = 0;
    int cols = 0;
    std::vector<Tile> tiles;  ///< raster order

    int stride() const noexcept { return patch - lr_overlap; }
    const Tile& at(int row, int col) const { return tiles[std::size_t(row) * std::size_t(cols) + std::size_t(col)]; }
};

/// Tiles per axis: 1 if dim <= patch, else ceil((dim - patch) / stride) + 1.
int tiles_along(int dim, int patch, int lr_overlap);

/// Full-size patch tiles with stride patch - lr_overlap; the last row/column shifts
/// inward to stay inside the image. Images smaller than a patch get one tile whose
/// source is replicate padded.
TileGrid plan_tiles(int w, int h, int patch, int lr_overlap);

/// Non-overlapping cores (as plan_tiles with overlap 0) whose sources are grown by
/// `context` pixels on every side and clipped to the image.
TileGrid plan_lossless(int w, int h, int patch, int context);

/// Copy `src` out of `image`, replicate padding anything outside it.
Tensor extract_patch(const Tensor& image, const Rect& src);

/// SR output of one tile. `lr_rect` is the LR rectangle the output corresponds to.
struct TileOutput {
    Rect lr_rect;
    Tensor sr;
};

/// Accumulates SR tiles (sum and coverage count per pixel) and produces the final image.
class FusionAccumulator {
public:
    FusionAccumulator(int channels, int sr_h, int sr_w);

    /// Add `region` (SR coordinates) of a tile whose SR output starts at `origin`.
    void accumulate(const Tensor& sr, const Rect& region, int origin_x, int origin_y);

    const std::vector<double>& sums() const noexcept { return sum_; }
    const std::vector<std::uint32_t>& weights() const noexcept { return weight_; }

    /// sum / weight per pixel; FusionError if any pixel has weight 0.
    Tensor finish() const;

private:
    int channels_;
    int h_;
    int w_;
    std::vector<double> sum_;
    std::vector<std::uint32_t> weight_;
};

/// Assemble the SR image. `outputs[i]` belongs to `grid.tiles[i]`; an empty optional is a
/// missing tile (FusionError). The result does not depend on the order tiles were computed in.
Tensor fuse(std::span<const std::optional<TileOutput>> outputs, const TileGrid& grid, BoundaryMode mode, int scale);

/// Steady-state MAC overhead of overlapped tiling: (patch / stride)^2.
double mac_overhead(int patch, int lr_overlap);

/// MACs of tiling a concrete w x h image, relative to processing each pixel once:
/// tiles * patch^2 / (w * h).
double mac_overhead(int patch, int lr_overlap, int w, int h);

}  // namespace essr
