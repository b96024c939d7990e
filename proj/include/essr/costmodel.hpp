// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "essr/dispatch.hpp"
#include "essr/model.hpp"
#include "essr/tiling.hpp"

namespace essr::cost {

// ---------------------------------------------------------------------------
// MAC counting

struct LayerMacs {
    std::string name;
    std::uint64_t macs = 0;
};

struct MacBreakdown {
    SubnetId subnet = SubnetId::FullWidth;
    std::vector<LayerMacs> layers;
    std::uint64_t total = 0;
};

/// Bilinear output pixels cost this many MACs per channel.
inline constexpr std::uint64_t kBilinearMacsPerSample = 4;

/// Pointwise: h*w*Cin*Cout. Depthwise: h*w*C*9. Bilinear: 4 * (h*s) * (w*s) * 3.
MacBreakdown macs(SubnetId subnet, const ModelConfig& cfg, int patch_h, int patch_w);
inline MacBreakdown macs(SubnetId subnet, const ModelConfig& cfg, int patch) { return macs(subnet, cfg, patch, patch); }

/// Whole-image (untiled) MACs of running `subnet` on an LR image.
std::uint64_t image_macs(SubnetId subnet, const ModelConfig& cfg, int lr_w, int lr_h);

/// Sum of per-tile MACs for a decided grid (tile overlap included).
std::uint64_t full_frame_macs(const ModelConfig& cfg, const TileGrid& grid, std::span<const SubnetId> decisions);

/// Same with every tile on `subnet`.
std::uint64_t full_frame_macs(const ModelConfig& cfg, const TileGrid& grid, SubnetId subnet);

// ---------------------------------------------------------------------------
// PE-array schedule and utilization

enum class BlockKind { Pointwise, Depthwise };

/// One 27x9 PE block (one multiplier-accumulator per PE).
struct PeBlock {
    std::string name;
    BlockKind kind;
    int rows = 27;
    int cols = 9;

    int pes() const noexcept { return rows * cols; }
};

/// Work placed on a block during one iteration.
struct BlockLoad {
    int block = 0;
    std::uint64_t useful_macs_per_pixel = 0;
    int passes_per_pixel = 0;
};

struct Iteration {
    std::string label;
    std::vector<std::string> layers;
    std::vector<BlockLoad> loads;
};

/// Group-of-layer mapping of one subnet onto the PE blocks.
struct SchedulePlan {
    SubnetId subnet = SubnetId::FullWidth;
    std::vector<Iteration> iterations;
};

struct BlockUtilization {
    std::string block;
    double utilization = 0.0;
};

struct IterationUtilization {
    std::string label;
    std::vector<double> per_block;  ///< indexed like ScheduleModel::blocks
};

struct UtilizationReport {
    SubnetId subnet = SubnetId::FullWidth;
    std::vector<IterationUtilization> iterations;
    std::vector<BlockUtilization> per_block;  ///< mean over iterations
    double average = 0.0;                     ///< mean over iterations and blocks
};

/// Accelerator model: six 27x9 blocks (1x1-A..D, 3x3-B, 3x3-C) by default.
///
/// A pointwise layer is cut into 27-input x 27-output tiles handed to its blocks in
/// order; each block streams a tile as ceil(outputs / 9) passes of 9 output columns.
/// A depthwise layer (and the bilinear stencil, one 3x3 kernel per output phase) is
/// cut into 27-channel groups, one column per channel and one row per tap.
/// A block's utilization in an iteration is the occupied share of its PEs over its
/// active passes times `load_efficiency`, the fixed share of cycles left after the
/// per-iteration weight/feature loading.
class ScheduleModel {
public:
    /// 95% for steady-state full-width layers.
    static constexpr double kDefaultLoadEfficiency = 0.95;

    ScheduleModel();
    explicit ScheduleModel(std::vector<PeBlock> blocks, double load_efficiency = kDefaultLoadEfficiency);

    const std::vector<PeBlock>& blocks() const noexcept { return blocks_; }
    double load_efficiency() const noexcept { return load_efficiency_; }
    int total_pes() const noexcept;

    /// Iteration plan for `subnet`; every network layer appears in exactly one iteration.
    SchedulePlan plan(SubnetId subnet, const ModelConfig& cfg) const;

    UtilizationReport utilization(SubnetId subnet, const ModelConfig& cfg) const;

    /// Compute cycles for one patch (passes * pixels / load_efficiency, summed over iterations).
    double cycles_per_patch(SubnetId subnet, const ModelConfig& cfg, int patch) const;

private:
    int block_index(const std::string& name) const;
    void map_pointwise(Iteration& it, int in_ch, int out_ch, std::span<const std::string> blocks) const;
    void map_depthwise(Iteration& it, int channels, std::span<const std::string> blocks) const;

    std::vector<PeBlock> blocks_;
    double load_efficiency_;
};

/// Sum of share_i * util_i. Shares must sum to 1 within 0.01 (InputError otherwise).
double weighted_utilization(std::span<const double> shares, std::span<const double> utilizations);

// ---------------------------------------------------------------------------
// SRAM sizing and traffic

inline constexpr int kFxpStorageBits = 10;
inline constexpr int kFeatureBuffers = 3;  ///< ping, pong and shortcut

struct SramModel {
    std::uint64_t feature_bytes = 0;  ///< one buffer
    int feature_buffers = kFeatureBuffers;
    std::uint64_t weight_bytes = 0;
    std::uint64_t boundary_bytes = 0;

    /// Decimal kilobytes.
    static double kb(std::uint64_t bytes) noexcept { return double(bytes) / 1000.0; }
};

/// Feature buffer: patch^2 * width samples; weights: `params` samples; boundary: the SR
/// fringe kept for blending, one band of `sr_overlap` rows across the SR frame plus one
/// column of `sr_overlap` for the left neighbour. All samples are 10-bit.
SramModel sram_sizes(int width, int patch, int sr_overlap, std::size_t params, int scale = 4,
                     int frame_sr_width = 7680);

/// Same with params = param_count(cfg).
SramModel sram_sizes(const ModelConfig& cfg, int patch, int sr_overlap, int frame_sr_width = 7680);

enum class Fusion { Layerwise, Grouped };

struct AccessCount {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;

    std::uint64_t total() const noexcept { return reads + writes; }
};

struct GroupAccess {
    std::string label;
    AccessCount layerwise;
    AccessCount grouped;
    double saving = 0.0;
};

/// Feature-SRAM traffic of one patch in samples (pixels x channels). Layerwise: every
/// layer (the shortcut add included) reads its inputs and writes its output. Grouped:
/// each schedule iteration reads its input once, plus the shortcut when it holds the add,
/// and writes its output once.
struct SramAccessReport {
    SubnetId subnet = SubnetId::FullWidth;
    std::vector<GroupAccess> groups;
    AccessCount layerwise;
    AccessCount grouped;
    double saving = 0.0;  ///< 1 - grouped / layerwise
};

SramAccessReport sram_accesses(SubnetId subnet, const ModelConfig& cfg, int patch);
AccessCount sram_access_count(SubnetId subnet, const ModelConfig& cfg, int patch, Fusion fusion);

// ---------------------------------------------------------------------------
// Throughput

struct ThroughputLimits {
    long full_width_per_second = 25500;
    long tiles_per_frame = 2304;  ///< 8K x4: 64 x 36 tiles of 32 with overlap 2
    int fps = 30;
};

struct ThroughputVerdict {
    bool feasible = true;
    std::string reason;
    double patches_per_second = 0.0;
    long max_full_width_per_second = 0;
};

/// Rate form: steady patches/s and FullWidth patches/s.
ThroughputVerdict throughput_check(double patches_per_second, double full_width_per_second,
                                   const ThroughputLimits& limits = {});

/// Stream form: decisions carry frame numbers; windows are aligned groups of `fps` frames.
ThroughputVerdict throughput_check(std::span<const PatchDecision> decisions, const ThroughputLimits& limits = {});

// ---------------------------------------------------------------------------
// Report

struct SubnetHistogram {
    std::uint64_t bilinear = 0;
    std::uint64_t half = 0;
    std::uint64_t full = 0;

    std::uint64_t total() const noexcept { return bilinear + half + full; }
    std::uint64_t count(SubnetId id) const noexcept;
};

SubnetHistogram histogram(std::span<const SubnetId> decisions);

struct CostReport {
    ModelConfig cfg;
    int patch = 32;
    int lr_overlap = 2;
    SubnetHistogram subnets;
    std::uint64_t total_macs = 0;
    std::uint64_t all_full_macs = 0;
    double mac_saving = 0.0;  ///< 1 - total / all-FullWidth
    std::array<MacBreakdown, 3> per_patch;  ///< indexed by SubnetId
    std::array<UtilizationReport, 3> utilization;
    std::array<double, 3> cycle_share{};
    double weighted_utilization = 0.0;
    double load_efficiency = ScheduleModel::kDefaultLoadEfficiency;
    SramModel sram;
    std::array<SramAccessReport, 3> sram_traffic;
    ThroughputVerdict throughput;
    std::size_t params = 0;
};

/// Report for a decided stream of patch-sized tiles.
CostReport build_report(const ModelConfig& cfg, int patch, int lr_overlap, std::span<const PatchDecision> decisions,
                        const ScheduleModel& schedule = ScheduleModel());

}  // namespace essr::cost
