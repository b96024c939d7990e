// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/tiling.hpp"

#include <algorithm>
#include <string>

namespace essr {

Rect Rect::intersect(const Rect& r) const noexcept {
    const int x0 = std::max(x, r.x);
    const int y0 = std::max(y, r.y);
    const int x1 = std::min(right(), r.right());
    const int y1 = std::min(bottom(), r.bottom());
    if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
    return {x0, y0, x1 - x0, y1 - y0};
}

std::string_view boundary_mode_name(BoundaryMode mode) noexcept {
    switch (mode) {
        case BoundaryMode::NonOverlap:
            return "none";
        case BoundaryMode::OverlapAverage:
            return "average";
        case BoundaryMode::RecomputeLossless:
            return "lossless";
    }
    return "unknown";
}

BoundaryMode parse_boundary_mode(std::string_view name) {
    if (name == "none") return BoundaryMode::NonOverlap;
    if (name == "average") return BoundaryMode::OverlapAverage;
    if (name == "lossless") return BoundaryMode::RecomputeLossless;
    throw ConfigError("unknown boundary mode '" + std::string(name) + "' (expected none, average or lossless)");
}

int tiles_along(int dim, int patch, int lr_overlap) {
    if (dim <= patch) return 1;
    const int stride = patch - lr_overlap;
    return (dim - patch + stride - 1) / stride + 1;
}

namespace {

struct Span1D {
    int pos;   // tile start (may be 0 with size > dim for small images)
    int size;  // source size
    int own_begin;
    int own_end;
};

std::vector<Span1D> plan_axis(int dim, int patch, int lr_overlap) {
    const int n = tiles_along(dim, patch, lr_overlap);
    const int stride = patch - lr_overlap;
    std::vector<Span1D> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int pos = dim <= patch ? 0 : std::min(k * stride, dim - patch);
        out[std::size_t(k)] = {pos, patch, 0, 0};
    }
    // Ownership: split each overlap at its midpoint so owned spans partition [0, dim).
    for (int k = 0; k < n; ++k) {
        auto& s = out[std::size_t(k)];
        s.own_begin = k == 0 ? 0 : out[std::size_t(k - 1)].own_end;
        if (k + 1 == n) {
            s.own_end = dim;
        } else {
            const int next = out[std::size_t(k + 1)].pos;
            const int end = std::min(s.pos + patch, dim);
            s.own_end = (next + end + 1) / 2;
        }
    }
    return out;
}

void validate_grid_args(int w, int h, int patch, int lr_overlap) {
    if (w < 1 || h < 1) throw DimensionError("image must be at least 1x1");
    if (!(patch > lr_overlap && lr_overlap >= 0)) {
        throw ConfigError("tiling needs patch > overlap >= 0, got patch " + std::to_string(patch) + ", overlap " +
                          std::to_string(lr_overlap));
    }
}

}  // namespace

TileGrid plan_tiles(int w, int h, int patch, int lr_overlap) {
    validate_grid_args(w, h, patch, lr_overlap);
    TileGrid g;
    g.image_w = w;
    g.image_h = h;
    g.patch = patch;
    g.lr_overlap = lr_overlap;
    const auto xs = plan_axis(w, patch, lr_overlap);
    const auto ys = plan_axis(h, patch, lr_overlap);
    g.rows = int(ys.size());
    g.cols = int(xs.size());
    const Rect image{0, 0, w, h};
    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < g.cols; ++c) {
            const auto& sx = xs[std::size_t(c)];
            const auto& sy = ys[std::size_t(r)];
            Tile t;
            t.row = r;
            t.col = c;
            t.src = {sx.pos, sy.pos, sx.size, sy.size};
            t.core = t.src.intersect(image);
            t.owned = {sx.own_begin, sy.own_begin, sx.own_end - sx.own_begin, sy.own_end - sy.own_begin};
            g.tiles.push_back(t);
        }
    }
    return g;
}

TileGrid plan_lossless(int w, int h, int patch, int context) {
    if (context < 0) throw ConfigError("lossless context must be >= 0");
    TileGrid g = plan_tiles(w, h, patch, 0);
    g.context = context;
    const Rect image{0, 0, w, h};
    for (Tile& t : g.tiles) {
        t.core = t.src.intersect(image);
        t.src = Rect{t.core.x - context, t.core.y - context, t.core.w + 2 * context, t.core.h + 2 * context}.intersect(image);
        // Cores of shifted edge tiles overlap their neighbour; ownership already partitions.
    }
    return g;
}

Tensor extract_patch(const Tensor& image, const Rect& src) {
    if (src.w < 1 || src.h < 1) throw DimensionError("extract_patch: empty source rectangle");
    if (Rect{0, 0, image.width(), image.height()}.contains(src)) return image.crop(src.y, src.x, src.h, src.w);
    Tensor out(image.channels(), src.h, src.w);
    for (int c = 0; c < image.channels(); ++c) {
        for (int y = 0; y < src.h; ++y) {
            const int sy = std::clamp(src.y + y, 0, image.height() - 1);
            for (int x = 0; x < src.w; ++x) {
                out.at(c, y, x) = image.at(c, sy, std::clamp(src.x + x, 0, image.width() - 1));
            }
        }
    }
    return out;
}

FusionAccumulator::FusionAccumulator(int channels, int sr_h, int sr_w)
    : channels_(channels), h_(sr_h), w_(sr_w),
      sum_(std::size_t(channels) * std::size_t(sr_h) * std::size_t(sr_w), 0.0),
      weight_(std::size_t(sr_h) * std::size_t(sr_w), 0u) {}

void FusionAccumulator::accumulate(const Tensor& sr, const Rect& region, int origin_x, int origin_y) {
    if (sr.channels() != channels_) throw DimensionError("fusion: tile channel count mismatch");
    if (!Rect{0, 0, w_, h_}.contains(region) ||
        !Rect{origin_x, origin_y, sr.width(), sr.height()}.contains(region)) {
        throw DimensionError("fusion: tile region outside the image or the tile output");
    }
    const std::size_t plane = std::size_t(h_) * std::size_t(w_);
    for (int y = region.y; y < region.bottom(); ++y) {
        for (int x = region.x; x < region.right(); ++x) {
            const std::size_t p = std::size_t(y) * std::size_t(w_) + std::size_t(x);
            for (int c = 0; c < channels_; ++c) {
                sum_[std::size_t(c) * plane + p] += double(sr.at(c, y - origin_y, x - origin_x));
            }
            ++weight_[p];
        }
    }
}

Tensor FusionAccumulator::finish() const {
    Tensor out(channels_, h_, w_);
    const std::size_t plane = std::size_t(h_) * std::size_t(w_);
    for (std::size_t p = 0; p < plane; ++p) {
        if (weight_[p] == 0) {
            throw FusionError("fusion left SR pixel (" + std::to_string(p % std::size_t(w_)) + ", " +
                              std::to_string(p / std::size_t(w_)) + ") uncovered");
        }
        for (int c = 0; c < channels_; ++c) {
            out.data()[std::size_t(c) * plane + p] = real(sum_[std::size_t(c) * plane + p] / double(weight_[p]));
        }
    }
    return out;
}

Tensor fuse(std::span<const std::optional<TileOutput>> outputs, const TileGrid& grid, BoundaryMode mode, int scale) {
    if (outputs.size() != grid.tiles.size()) {
        throw FusionError("fusion got " + std::to_string(outputs.size()) + " tiles for a grid of " +
                          std::to_string(grid.tiles.size()));
    }
    if (scale < 1) throw ConfigError("fusion scale must be >= 1");
    int channels = 0;
    for (const auto& o : outputs) {
        if (o) {
            channels = o->sr.channels();
            break;
        }
    }
    if (channels == 0) throw FusionError("fusion got no tiles");
    FusionAccumulator acc(channels, grid.image_h * scale, grid.image_w * scale);
    // Tiles are always folded in grid order, whatever order they were produced in.
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const Tile& t = grid.tiles[i];
        if (!outputs[i]) {
            throw FusionError("tile (" + std::to_string(t.row) + ", " + std::to_string(t.col) + ") is missing");
        }
        const TileOutput& o = *outputs[i];
        if (o.sr.height() != o.lr_rect.h * scale || o.sr.width() != o.lr_rect.w * scale) {
            throw DimensionError("tile (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                 ") output size does not match its LR rectangle");
        }
        const Rect place = mode == BoundaryMode::OverlapAverage ? t.core : t.owned;
        acc.accumulate(o.sr, place.scaled(scale), o.lr_rect.x * scale, o.lr_rect.y * scale);
    }
    return acc.finish();
}

double mac_overhead(int patch, int lr_overlap) {
    if (!(patch > lr_overlap && lr_overlap >= 0)) throw ConfigError("mac_overhead needs patch > overlap >= 0");
    const double r = double(patch) / double(patch - lr_overlap);
    return r * r;
}

double mac_overhead(int patch, int lr_overlap, int w, int h) {
    const TileGrid g = plan_tiles(w, h, patch, lr_overlap);
    return double(g.tiles.size()) * double(patch) * double(patch) / (double(w) * double(h));
}

}  // namespace essr
