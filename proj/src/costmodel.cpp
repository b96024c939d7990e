// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace essr::cost {

namespace {

std::uint64_t u64(int v) { return std::uint64_t(v); }

void push(MacBreakdown& b, std::string name, std::uint64_t m) {
    b.layers.push_back({std::move(name), m});
    b.total += m;
}

}  // namespace

MacBreakdown macs(SubnetId subnet, const ModelConfig& cfg, int patch_h, int patch_w) {
    if (patch_h < 1 || patch_w < 1) throw DimensionError("macs: patch must be at least 1x1");
    MacBreakdown b;
    b.subnet = subnet;
    const std::uint64_t px = u64(patch_h) * u64(patch_w);
    if (subnet == SubnetId::Bilinear) {
        const std::uint64_t out_px = px * u64(cfg.scale) * u64(cfg.scale);
        push(b, "bilinear", kBilinearMacsPerSample * out_px * 3);
        return b;
    }
    const std::uint64_t c = u64(cfg.width_for(subnet));
    const std::uint64_t r = u64(cfg.recon_channels());
    push(b, "first_pw", px * 3 * c);
    push(b, "first_dw", px * c * 9);
    for (int k = 0; k < cfg.n_sfb; ++k) {
        const std::string p = "sfb[" + std::to_string(k) + "].";
        push(b, p + "pw1", px * c * c);
        push(b, p + "dw1", px * c * 9);
        push(b, p + "pw2", px * c * c);
        push(b, p + "dw2", px * c * 9);
        push(b, p + "fuse", px * c * c);
    }
    push(b, "recon_dw", px * c * 9);
    push(b, "recon_pw", px * c * r);
    return b;
}

std::uint64_t image_macs(SubnetId subnet, const ModelConfig& cfg, int lr_w, int lr_h) {
    return macs(subnet, cfg, lr_h, lr_w).total;
}

std::uint64_t full_frame_macs(const ModelConfig& cfg, const TileGrid& grid, std::span<const SubnetId> decisions) {
    if (decisions.size() != grid.tiles.size()) {
        throw InputError("full_frame_macs: " + std::to_string(decisions.size()) + " decisions for " +
                         std::to_string(grid.tiles.size()) + " tiles");
    }
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const Rect& s = grid.tiles[i].src;
        total += macs(decisions[i], cfg, s.h, s.w).total;
    }
    return total;
}

std::uint64_t full_frame_macs(const ModelConfig& cfg, const TileGrid& grid, SubnetId subnet) {
    std::vector<SubnetId> all(grid.tiles.size(), subnet);
    return full_frame_macs(cfg, grid, all);
}

// ---------------------------------------------------------------------------

ScheduleModel::ScheduleModel()
    : ScheduleModel({{"1x1-A", BlockKind::Pointwise},
                     {"1x1-B", BlockKind::Pointwise},
                     {"1x1-C", BlockKind::Pointwise},
                     {"1x1-D", BlockKind::Pointwise},
                     {"3x3-B", BlockKind::Depthwise},
                     {"3x3-C", BlockKind::Depthwise}}) {}

ScheduleModel::ScheduleModel(std::vector<PeBlock> blocks, double load_efficiency)
    : blocks_(std::move(blocks)), load_efficiency_(load_efficiency) {
    if (blocks_.empty()) throw ConfigError("schedule model needs at least one PE block");
    if (!(load_efficiency_ > 0.0 && load_efficiency_ <= 1.0)) {
        throw ConfigError("load efficiency must be in (0, 1]");
    }
}

int ScheduleModel::total_pes() const noexcept {
    int n = 0;
    for (const auto& b : blocks_) n += b.pes();
    return n;
}

int ScheduleModel::block_index(const std::string& name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (blocks_[i].name == name) return int(i);
    }
    throw ConfigError("schedule references unknown PE block '" + name + "'");
}

namespace {

BlockLoad& load_for(Iteration& it, int block) {
    for (auto& l : it.loads) {
        if (l.block == block) return l;
    }
    it.loads.push_back({block, 0, 0});
    return it.loads.back();
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

void ScheduleModel::map_pointwise(Iteration& it, int in_ch, int out_ch, std::span<const std::string> names) const {
    std::size_t next = 0;
    for (int o0 = 0; o0 < out_ch; ) {
        const PeBlock& first = blocks_[std::size_t(block_index(names[0]))];
        const int out_tile = std::min(out_ch - o0, first.rows);
        for (int i0 = 0; i0 < in_ch; ) {
            const int idx = block_index(names[next % names.size()]);
            const PeBlock& b = blocks_[std::size_t(idx)];
            const int in_used = std::min(in_ch - i0, b.rows);
            BlockLoad& l = load_for(it, idx);
            l.useful_macs_per_pixel += std::uint64_t(in_used) * std::uint64_t(out_tile);
            l.passes_per_pixel += ceil_div(out_tile, b.cols);
            i0 += in_used;
            ++next;
        }
        o0 += out_tile;
    }
}

void ScheduleModel::map_depthwise(Iteration& it, int channels, std::span<const std::string> names) const {
    std::size_t next = 0;
    for (int c0 = 0; c0 < channels; ) {
        const int idx = block_index(names[next % names.size()]);
        const PeBlock& b = blocks_[std::size_t(idx)];
        const int used = std::min(channels - c0, b.rows);
        BlockLoad& l = load_for(it, idx);
        l.useful_macs_per_pixel += std::uint64_t(used) * 9;
        l.passes_per_pixel += 1;
        c0 += used;
        ++next;
    }
}

SchedulePlan ScheduleModel::plan(SubnetId subnet, const ModelConfig& cfg) const {
    SchedulePlan p;
    p.subnet = subnet;
    const int r = cfg.recon_channels();
    const std::string rs = std::to_string(r);
    using Names = std::vector<std::string>;
    const Names all1x1{"1x1-A", "1x1-B", "1x1-C", "1x1-D"};
    const Names both3x3{"3x3-B", "3x3-C"};

    auto iteration = [&p](std::string label, std::vector<std::string> layers) -> Iteration& {
        p.iterations.push_back({std::move(label), std::move(layers), {}});
        return p.iterations.back();
    };

    if (subnet == SubnetId::Bilinear) {
        Iteration& it = iteration("Bilinear", {"bilinear"});
        // One 3x3 stencil per output phase and colour channel.
        map_depthwise(it, r, both3x3);
        return p;
    }

    const int c = cfg.width_for(subnet);
    const std::string cs = std::to_string(c);
    if (subnet == SubnetId::FullWidth) {
        Iteration& first = iteration("BSConv(3," + cs + ")", {"first_pw", "first_dw"});
        map_pointwise(first, 3, c, Names{"1x1-A", "1x1-D"});
        map_depthwise(first, c, both3x3);
        for (int k = 0; k < cfg.n_sfb; ++k) {
            const std::string pre = "sfb[" + std::to_string(k) + "].";
            Iteration& b1 = iteration("BSConv(" + cs + "," + cs + ")", {pre + "pw1", pre + "dw1"});
            map_pointwise(b1, c, c, all1x1);
            map_depthwise(b1, c, both3x3);
            Iteration& b2 = iteration("BSConv(" + cs + "," + cs + ")", {pre + "pw2", pre + "dw2"});
            map_pointwise(b2, c, c, all1x1);
            map_depthwise(b2, c, both3x3);
            Iteration& f = iteration("1x1(" + cs + "," + cs + ")", {pre + "add", pre + "fuse"});
            map_pointwise(f, c, c, all1x1);
        }
        Iteration& last = iteration("DSConv(" + cs + "," + rs + ")", {"recon_dw", "recon_pw"});
        map_depthwise(last, c, both3x3);
        map_pointwise(last, c, r, all1x1);
        return p;
    }

    Iteration& first = iteration("BSConv(3," + cs + ")", {"first_pw", "first_dw"});
    map_pointwise(first, 3, c, Names{"1x1-A"});
    map_depthwise(first, c, Names{"3x3-B"});
    for (int k = 0; k < cfg.n_sfb; ++k) {
        const std::string pre = "sfb[" + std::to_string(k) + "].";
        Iteration& s = iteration("SFB", {pre + "pw1", pre + "dw1", pre + "pw2", pre + "dw2", pre + "add", pre + "fuse"});
        map_pointwise(s, c, c, Names{"1x1-B"});
        map_depthwise(s, c, Names{"3x3-B"});
        map_pointwise(s, c, c, Names{"1x1-C"});
        map_depthwise(s, c, Names{"3x3-C"});
        map_pointwise(s, c, c, Names{"1x1-A"});
    }
    Iteration& last = iteration("DSConv(" + cs + "," + rs + ")", {"recon_dw", "recon_pw"});
    map_depthwise(last, c, Names{"3x3-B"});
    map_pointwise(last, c, r, Names{"1x1-B", "1x1-C"});
    return p;
}

UtilizationReport ScheduleModel::utilization(SubnetId subnet, const ModelConfig& cfg) const {
    const SchedulePlan p = plan(subnet, cfg);
    UtilizationReport rep;
    rep.subnet = subnet;
    std::vector<double> block_sum(blocks_.size(), 0.0);
    double total = 0.0;
    for (const Iteration& it : p.iterations) {
        IterationUtilization iu{it.label, std::vector<double>(blocks_.size(), 0.0)};
        for (const BlockLoad& l : it.loads) {
            const PeBlock& b = blocks_[std::size_t(l.block)];
            const double occupancy =
                double(l.useful_macs_per_pixel) / (double(b.pes()) * double(l.passes_per_pixel));
            iu.per_block[std::size_t(l.block)] = occupancy * load_efficiency_;
        }
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            block_sum[i] += iu.per_block[i];
            total += iu.per_block[i];
        }
        rep.iterations.push_back(std::move(iu));
    }
    const double n_it = double(p.iterations.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) rep.per_block.push_back({blocks_[i].name, block_sum[i] / n_it});
    rep.average = total / (n_it * double(blocks_.size()));
    return rep;
}

double ScheduleModel::cycles_per_patch(SubnetId subnet, const ModelConfig& cfg, int patch) const {
    const SchedulePlan p = plan(subnet, cfg);
    double cycles = 0.0;
    for (const Iteration& it : p.iterations) {
        int passes = 0;
        for (const BlockLoad& l : it.loads) passes = std::max(passes, l.passes_per_pixel);
        cycles += double(passes) * double(patch) * double(patch);
    }
    return cycles / load_efficiency_;
}

double weighted_utilization(std::span<const double> shares, std::span<const double> utilizations) {
    if (shares.size() != utilizations.size()) throw InputError("weighted_utilization: length mismatch");
    double sum = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        if (shares[i] < 0.0) throw InputError("weighted_utilization: negative share");
        sum += shares[i];
        acc += shares[i] * utilizations[i];
    }
    if (std::abs(sum - 1.0) > 0.01) {
        throw InputError("weighted_utilization: shares sum to " + std::to_string(sum) + ", expected 1 +/- 0.01");
    }
    return acc;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t bits_to_bytes(std::uint64_t bits) { return (bits + 7) / 8; }

}  // namespace

SramModel sram_sizes(int width, int patch, int sr_overlap, std::size_t params, int scale, int frame_sr_width) {
    if (width < 1 || patch < 1 || sr_overlap < 0 || frame_sr_width < 1) {
        throw ConfigError("sram_sizes: invalid geometry");
    }
    SramModel m;
    m.feature_bytes = bits_to_bytes(u64(patch) * u64(patch) * u64(width) * kFxpStorageBits);
    m.weight_bytes = bits_to_bytes(std::uint64_t(params) * kFxpStorageBits);
    const std::uint64_t fringe_px = u64(frame_sr_width) * u64(sr_overlap) + u64(patch * scale) * u64(sr_overlap);
    m.boundary_bytes = bits_to_bytes(fringe_px * 3 * kFxpStorageBits);
    return m;
}

SramModel sram_sizes(const ModelConfig& cfg, int patch, int sr_overlap, int frame_sr_width) {
    return sram_sizes(cfg.width, patch, sr_overlap, param_count(cfg), cfg.scale, frame_sr_width);
}

namespace {

struct TrafficLayer {
    std::uint64_t reads;   // channels read
    std::uint64_t writes;  // channels written
};

struct TrafficGroup {
    std::string label;
    std::vector<TrafficLayer> layers;
    std::uint64_t grouped_reads;
    std::uint64_t grouped_writes;
};

std::vector<TrafficGroup> traffic_groups(SubnetId subnet, const ModelConfig& cfg) {
    const std::uint64_t r = u64(cfg.recon_channels());
    if (subnet == SubnetId::Bilinear) {
        return {{"Bilinear", {{3, r}}, 3, r}};
    }
    const std::uint64_t c = u64(cfg.width_for(subnet));
    const std::string cs = std::to_string(c);
    std::vector<TrafficGroup> g;
    g.push_back({"BSConv(3," + cs + ")", {{3, c}, {c, c}}, 3, c});
    const TrafficLayer pw{c, c};
    const TrafficLayer dw{c, c};
    const TrafficLayer add{2 * c, c};
    for (int k = 0; k < cfg.n_sfb; ++k) {
        if (subnet == SubnetId::FullWidth) {
            g.push_back({"BSConv(" + cs + "," + cs + ")", {pw, dw}, c, c});
            g.push_back({"BSConv(" + cs + "," + cs + ")", {pw, dw}, c, c});
            g.push_back({"1x1(" + cs + "," + cs + ")", {add, pw}, 2 * c, c});
        } else {
            // input once into the block, once more from the shortcut buffer
            g.push_back({"SFB", {pw, dw, pw, dw, add, pw}, 2 * c, c});
        }
    }
    g.push_back({"DSConv(" + cs + "," + std::to_string(r) + ")", {{c, c}, {c, r}}, c, r});
    return g;
}

}  // namespace

SramAccessReport sram_accesses(SubnetId subnet, const ModelConfig& cfg, int patch) {
    if (patch < 1) throw DimensionError("sram_accesses: patch must be >= 1");
    const std::uint64_t px = u64(patch) * u64(patch);
    SramAccessReport rep;
    rep.subnet = subnet;
    for (const TrafficGroup& tg : traffic_groups(subnet, cfg)) {
        GroupAccess ga;
        ga.label = tg.label;
        for (const TrafficLayer& l : tg.layers) {
            ga.layerwise.reads += l.reads * px;
            ga.layerwise.writes += l.writes * px;
        }
        ga.grouped = {tg.grouped_reads * px, tg.grouped_writes * px};
        ga.saving = 1.0 - double(ga.grouped.total()) / double(ga.layerwise.total());
        rep.layerwise.reads += ga.layerwise.reads;
        rep.layerwise.writes += ga.layerwise.writes;
        rep.grouped.reads += ga.grouped.reads;
        rep.grouped.writes += ga.grouped.writes;
        rep.groups.push_back(std::move(ga));
    }
    rep.saving = 1.0 - double(rep.grouped.total()) / double(rep.layerwise.total());
    return rep;
}

AccessCount sram_access_count(SubnetId subnet, const ModelConfig& cfg, int patch, Fusion fusion) {
    const SramAccessReport r = sram_accesses(subnet, cfg, patch);
    return fusion == Fusion::Layerwise ? r.layerwise : r.grouped;
}

// ---------------------------------------------------------------------------

ThroughputVerdict throughput_check(double patches_per_second, double full_width_per_second,
                                   const ThroughputLimits& limits) {
    ThroughputVerdict v;
    v.patches_per_second = patches_per_second;
    v.max_full_width_per_second = long(std::ceil(full_width_per_second));
    const double capacity = double(limits.tiles_per_frame) * double(limits.fps);
    if (full_width_per_second > double(limits.full_width_per_second)) {
        v.feasible = false;
        v.reason = "FullWidth cap exceeded: " + std::to_string(v.max_full_width_per_second) + " > " +
                   std::to_string(limits.full_width_per_second) + " patches per second";
    } else if (patches_per_second > capacity) {
        v.feasible = false;
        v.reason = "tile capacity exceeded: " + std::to_string(long(std::ceil(patches_per_second))) + " > " +
                   std::to_string(long(capacity)) + " patches per second";
    }
    return v;
}

ThroughputVerdict throughput_check(std::span<const PatchDecision> decisions, const ThroughputLimits& limits) {
    ThroughputVerdict v;
    if (decisions.empty()) return v;
    std::map<int, long> per_frame;
    std::map<int, long> full_per_window;
    for (const PatchDecision& d : decisions) {
        ++per_frame[d.frame];
        if (d.subnet == SubnetId::FullWidth) ++full_per_window[d.frame / limits.fps];
    }
    long max_tiles = 0;
    long total = 0;
    for (const auto& [frame, n] : per_frame) {
        max_tiles = std::max(max_tiles, n);
        total += n;
    }
    for (const auto& [w, n] : full_per_window) v.max_full_width_per_second = std::max(v.max_full_width_per_second, n);
    v.patches_per_second = double(total) / double(per_frame.size()) * double(limits.fps);
    if (v.max_full_width_per_second > limits.full_width_per_second) {
        v.feasible = false;
        v.reason = "FullWidth cap exceeded: " + std::to_string(v.max_full_width_per_second) + " > " +
                   std::to_string(limits.full_width_per_second) + " patches in one second";
    } else if (max_tiles > limits.tiles_per_frame) {
        v.feasible = false;
        v.reason = "tile capacity exceeded: " + std::to_string(max_tiles) + " > " +
                   std::to_string(limits.tiles_per_frame) + " tiles in one frame";
    }
    return v;
}

// ---------------------------------------------------------------------------

std::uint64_t SubnetHistogram::count(SubnetId id) const noexcept {
    switch (id) {
        case SubnetId::Bilinear:
            return bilinear;
        case SubnetId::HalfWidth:
            return half;
        case SubnetId::FullWidth:
            return full;
    }
    return 0;
}

SubnetHistogram histogram(std::span<const SubnetId> decisions) {
    SubnetHistogram h;
    for (SubnetId d : decisions) {
        if (d == SubnetId::Bilinear) ++h.bilinear;
        else if (d == SubnetId::HalfWidth) ++h.half;
        else ++h.full;
    }
    return h;
}

CostReport build_report(const ModelConfig& cfg, int patch, int lr_overlap, std::span<const PatchDecision> decisions,
                        const ScheduleModel& schedule) {
    cfg.validate();
    CostReport rep;
    rep.cfg = cfg;
    rep.patch = patch;
    rep.lr_overlap = lr_overlap;
    std::vector<SubnetId> ids;
    ids.reserve(decisions.size());
    for (const auto& d : decisions) ids.push_back(d.subnet);
    rep.subnets = histogram(ids);

    constexpr std::array<SubnetId, 3> kAll{SubnetId::Bilinear, SubnetId::HalfWidth, SubnetId::FullWidth};
    std::array<double, 3> cycles{};
    for (SubnetId id : kAll) {
        const auto k = std::size_t(id);
        rep.per_patch[k] = macs(id, cfg, patch);
        rep.utilization[k] = schedule.utilization(id, cfg);
        rep.sram_traffic[k] = sram_accesses(id, cfg, patch);
        cycles[k] = double(rep.subnets.count(id)) * schedule.cycles_per_patch(id, cfg, patch);
        rep.total_macs += rep.subnets.count(id) * rep.per_patch[k].total;
    }
    rep.all_full_macs = rep.subnets.total() * rep.per_patch[std::size_t(SubnetId::FullWidth)].total;
    rep.mac_saving = rep.all_full_macs == 0 ? 0.0 : 1.0 - double(rep.total_macs) / double(rep.all_full_macs);
    const double cycle_total = cycles[0] + cycles[1] + cycles[2];
    if (cycle_total > 0.0) {
        std::array<double, 3> utils{};
        for (std::size_t k = 0; k < 3; ++k) {
            rep.cycle_share[k] = cycles[k] / cycle_total;
            utils[k] = rep.utilization[k].average;
        }
        rep.weighted_utilization = weighted_utilization(rep.cycle_share, utils);
    }
    rep.load_efficiency = schedule.load_efficiency();
    rep.sram = sram_sizes(cfg, patch, lr_overlap * cfg.scale);
    rep.throughput = throughput_check(decisions);
    rep.params = param_count(cfg);
    return rep;
}

}  // namespace essr::cost
