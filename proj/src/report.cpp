// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/report.hpp"

#include <iomanip>
#include <ostream>

namespace essr::cost {

namespace {

constexpr std::array<SubnetId, 3> kSubnets{SubnetId::Bilinear, SubnetId::HalfWidth, SubnetId::FullWidth};

nlohmann::ordered_json access_json(const AccessCount& a) {
    nlohmann::ordered_json j;
    j["reads"] = a.reads;
    j["writes"] = a.writes;
    j["total"] = a.total();
    return j;
}

}  // namespace

std::size_t reference_param_count(const ModelConfig& cfg) noexcept {
    if (cfg.width != 54 || cfg.n_sfb != 5 || cfg.with_bias) return 0;
    if (cfg.scale == 4) return 53600;
    if (cfg.scale == 2) return 51000;
    return 0;
}

nlohmann::ordered_json report_json(const CostReport& r) {
    using json = nlohmann::ordered_json;
    json j;
    j["schema"] = kReportSchema;

    json cfg;
    cfg["scale"] = r.cfg.scale;
    cfg["width"] = r.cfg.width;
    cfg["n_sfb"] = r.cfg.n_sfb;
    cfg["with_bias"] = r.cfg.with_bias;
    cfg["patch"] = r.patch;
    cfg["lr_overlap"] = r.lr_overlap;
    j["config"] = cfg;

    json params;
    params["count"] = r.params;
    const std::size_t ref = reference_param_count(r.cfg);
    if (ref != 0) {
        params["reference_count"] = ref;
        params["gap"] = 1.0 - double(r.params) / double(ref);
        params["note"] =
            "closed-form count over the listed layers; the reference figure is larger by the gap shown";
    }
    j["params"] = params;

    json hist;
    hist["bilinear"] = r.subnets.bilinear;
    hist[subnet_label(SubnetId::HalfWidth, r.cfg.width)] = r.subnets.half;
    hist[subnet_label(SubnetId::FullWidth, r.cfg.width)] = r.subnets.full;
    hist["total"] = r.subnets.total();
    j["subnets"] = hist;

    json m;
    m["total"] = r.total_macs;
    m["all_full_width"] = r.all_full_macs;
    m["saving"] = r.mac_saving;
    json per_patch;
    for (SubnetId id : kSubnets) {
        const MacBreakdown& b = r.per_patch[std::size_t(id)];
        json layers = json::object();
        for (const auto& l : b.layers) layers[l.name] = l.macs;
        json e;
        e["total"] = b.total;
        e["layers"] = layers;
        per_patch[subnet_label(id, r.cfg.width)] = e;
    }
    m["per_patch"] = per_patch;
    j["macs"] = m;

    json util;
    util["load_efficiency"] = r.load_efficiency;
    util["load_efficiency_note"] =
        "fixed share of cycles left after per-iteration loading; set so steady full-width layers report 95%";
    json models;
    for (SubnetId id : kSubnets) {
        const UtilizationReport& u = r.utilization[std::size_t(id)];
        json e;
        e["average"] = u.average;
        e["cycle_share"] = r.cycle_share[std::size_t(id)];
        json blocks = json::object();
        for (const auto& b : u.per_block) blocks[b.block] = b.utilization;
        e["per_block"] = blocks;
        json its = json::array();
        for (const auto& it : u.iterations) {
            json ij;
            ij["label"] = it.label;
            ij["per_block"] = it.per_block;
            its.push_back(ij);
        }
        e["iterations"] = its;
        models[subnet_label(id, r.cfg.width)] = e;
    }
    util["models"] = models;
    util["weighted"] = r.weighted_utilization;
    j["utilization"] = util;

    json sram;
    sram["unit"] = "decimal KB";
    sram["feature_kb"] = SramModel::kb(r.sram.feature_bytes);
    sram["feature_buffers"] = r.sram.feature_buffers;
    sram["weight_kb"] = SramModel::kb(r.sram.weight_bytes);
    sram["boundary_kb"] = SramModel::kb(r.sram.boundary_bytes);
    j["sram"] = sram;

    json traffic;
    for (SubnetId id : kSubnets) {
        const SramAccessReport& a = r.sram_traffic[std::size_t(id)];
        json e;
        e["layerwise"] = access_json(a.layerwise);
        e["grouped"] = access_json(a.grouped);
        e["saving"] = a.saving;
        json groups = json::array();
        for (const auto& g : a.groups) {
            json gj;
            gj["label"] = g.label;
            gj["layerwise"] = g.layerwise.total();
            gj["grouped"] = g.grouped.total();
            gj["saving"] = g.saving;
            groups.push_back(gj);
        }
        e["groups"] = groups;
        traffic[subnet_label(id, r.cfg.width)] = e;
    }
    j["sram_traffic"] = traffic;

    json tp;
    tp["feasible"] = r.throughput.feasible;
    tp["reason"] = r.throughput.reason;
    tp["patches_per_second"] = r.throughput.patches_per_second;
    tp["max_full_width_per_second"] = r.throughput.max_full_width_per_second;
    j["throughput"] = tp;
    return j;
}

void write_report_csv(std::ostream& out, const CostReport& r) {
    out << "subnet,patches,macs_per_patch,macs,utilization,cycle_share,sram_saving\n";
    const auto old = out.flags();
    out << std::setprecision(6);
    for (SubnetId id : kSubnets) {
        const auto k = std::size_t(id);
        const std::uint64_t n = r.subnets.count(id);
        out << subnet_label(id, r.cfg.width) << ',' << n << ',' << r.per_patch[k].total << ','
            << n * r.per_patch[k].total << ',' << r.utilization[k].average << ',' << r.cycle_share[k] << ','
            << r.sram_traffic[k].saving << '\n';
    }
    out << "total," << r.subnets.total() << ",," << r.total_macs << ',' << r.weighted_utilization << ",1,\n";
    out.flags(old);
}

}  // namespace essr::cost
