// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/pipeline.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "essr/common.hpp"
#include "essr/kernels.hpp"

namespace essr {

std::string_view precision_name(Precision p) noexcept { return p == Precision::Float ? "float" : "fxp10"; }

Precision parse_precision(std::string_view name) {
    if (name == "float") return Precision::Float;
    if (name == "fxp10") return Precision::Fxp10;
    throw ConfigError("unknown precision '" + std::string(name) + "' (expected float or fxp10)");
}

TileGrid plan_for(int lr_w, int lr_h, const ModelConfig& cfg, const UpscaleOptions& opts) {
    if (opts.boundary == BoundaryMode::RecomputeLossless) {
        return plan_lossless(lr_w, lr_h, opts.patch, cfg.receptive_radius());
    }
    return plan_tiles(lr_w, lr_h, opts.patch, opts.overlap);
}

std::vector<PatchDecision> decide_tiles(const Tensor& lr, const TileGrid& grid, const UpscaleOptions& opts,
                                        Controller* controller, int frame) {
    opts.thresholds.validate();
    std::vector<PatchDecision> out;
    out.reserve(grid.tiles.size());
    for (const Tile& t : grid.tiles) {
        // Lossless tiles score their core, not the added context.
        const Rect& scored = grid.context > 0 ? t.core : t.src;
        const double score = edge_score(extract_patch(lr, scored), opts.kernel);
        PatchDecision d;
        if (controller) {
            d = controller->step(score);
        } else {
            d.edge_score = score;
            d.subnet = decide(score, opts.thresholds);
        }
        d.frame = frame;
        d.patch_row = t.row;
        d.patch_col = t.col;
        out.push_back(d);
    }
    if (controller) controller->end_of_frame();
    return out;
}

Upscaler::Upscaler(Model model, UpscaleOptions opts) : model_(std::move(model)), opts_(opts) {
    if (opts_.precision == Precision::Fxp10) {
        throw ConfigError("fxp10 inference needs a quantized model");
    }
}

Upscaler::Upscaler(Model model, QuantizedModel quantized, UpscaleOptions opts)
    : model_(std::move(model)), quantized_(std::move(quantized)), opts_(opts) {
    quantized_->validate();
    if (!(quantized_->cfg == model_.config())) throw ConfigError("quantized model does not match the float model");
}

TileOutput Upscaler::run_tile(const Tensor& lr, const Tile& tile, SubnetId subnet, const TileGrid& grid) const {
    const int scale = model_.config().scale;
    if (subnet == SubnetId::Bilinear) {
        // Only the placed region is needed, and region resizing matches the whole image exactly.
        const Rect r = opts_.boundary == BoundaryMode::OverlapAverage ? tile.core : tile.owned;
        return {r, bilinear_resize_region(lr, r.y, r.x, r.h, r.w, scale)};
    }
    (void)grid;
    const Tensor patch = extract_patch(lr, tile.src);
    if (opts_.precision == Precision::Fxp10) return {tile.src, forward_fxp(patch, *quantized_, subnet)};
    return {tile.src, model_.run(patch, subnet)};
}

Tensor Upscaler::infer(const Tensor& lr, const TileGrid& grid, std::span<const PatchDecision> decisions) const {
    if (lr.channels() != 3) throw DimensionError("upscale expects an RGB image");
    if (decisions.size() != grid.tiles.size()) throw InputError("one decision per tile is required");
    const std::size_t n = grid.tiles.size();
    std::vector<std::optional<TileOutput>> outputs(n);

    unsigned workers = opts_.threads > 0 ? unsigned(opts_.threads) : std::max(1u, std::thread::hardware_concurrency());
    workers = unsigned(std::min<std::size_t>(workers, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                outputs[i] = run_tile(lr, grid.tiles[i], decisions[i].subnet, grid);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return fuse(outputs, grid, opts_.boundary, model_.config().scale);
}

UpscaleResult Upscaler::run(const Tensor& lr, Controller* controller, int frame) const {
    UpscaleResult r;
    r.grid = plan_for(lr.width(), lr.height(), model_.config(), opts_);
    r.decisions = decide_tiles(lr, r.grid, opts_, opts_.adaptive ? controller : nullptr, frame);
    r.sr = infer(lr, r.grid, r.decisions);
    return r;
}

Tensor score_map(const Tensor& lr, const TileGrid& grid, std::span<const PatchDecision> decisions) {
    if (decisions.size() != grid.tiles.size()) throw InputError("one decision per tile is required");
    const Tensor y = luminance(lr);
    Tensor out(3, lr.height(), lr.width());
    static constexpr real kColour[3][3] = {{0, 255, 0}, {255, 255, 0}, {255, 0, 0}};
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const Rect& r = grid.tiles[i].owned;
        const real* col = kColour[std::size_t(decisions[i].subnet)];
        for (int yy = r.y; yy < r.bottom(); ++yy) {
            for (int xx = r.x; xx < r.right(); ++xx) {
                const real l = y.at(0, yy, xx);
                for (int c = 0; c < 3; ++c) out.at(c, yy, xx) = real(0.5) * l + real(0.5) * col[c];
            }
        }
    }
    return out;
}

}  // namespace essr
