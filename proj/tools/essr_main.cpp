// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0
//
// essr: command-line front end.
//
// Exit codes
//   0  success
//   1  internal error
//   2  usage error
//   3  file I/O error
//   4  weight file malformed or inconsistent with the requested configuration
//   5  invalid or unsupported configuration
//   6  calibration error
//   7  invalid input data

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "essr/common.hpp"
#include "essr/costmodel.hpp"
#include "essr/image_io.hpp"
#include "essr/metrics.hpp"
#include "essr/pipeline.hpp"
#include "essr/quantized_model.hpp"
#include "essr/report.hpp"
#include "essr/simd.hpp"
#include "essr/weights_io.hpp"

namespace {

using namespace essr;
using json = nlohmann::ordered_json;

enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kIo = 3,
    kWeights = 4,
    kConfig = 5,
    kCalibration = 6,
    kInput = 7,
};

/// Weight file is readable but does not fit the requested run.
class WeightMismatch : public Error {
public:
    using Error::Error;
};

struct Options {
    std::vector<std::string> inputs;
    std::string output;
    std::optional<int> scale;
    int width = 54;
    int n_sfb = 5;
    bool with_bias = false;
    int t1 = 8;
    int t2 = 40;
    bool adaptive = false;
    int patch = 32;
    int overlap = 2;
    std::string boundary = "average";
    std::string precision = "float";
    std::string weights;
    std::uint64_t seed = 1;
    std::string report;
    std::string csv;
    std::string trace;
    std::vector<std::string> calibrate;
    int threads = 0;
    std::string laplacian = "4";
    // cost
    bool overlap_table = false;
    std::string decisions;
    std::string all;
    std::string lr_size;
    int frames = 1;
};

struct LoadedModel {
    ModelConfig cfg;
    WeightStore weights;
    std::optional<QuantizedModel> quantized;
};

ModelConfig requested_config(const Options& o) {
    ModelConfig cfg;
    cfg.scale = o.scale.value_or(4);
    cfg.width = o.width;
    cfg.n_sfb = o.n_sfb;
    cfg.with_bias = o.with_bias;
    cfg.validate();
    return cfg;
}

LoadedModel load_model(const Options& o) {
    LoadedModel m;
    if (o.weights.empty()) {
        m.cfg = requested_config(o);
        m.weights = random_init(m.cfg, o.seed);
        return m;
    }
    const auto bytes = read_file(o.weights);
    if (peek_format_version(bytes) == kFxp10FormatVersion) {
        QuantizedModel q = load_quantized(bytes);
        m.cfg = q.cfg;
        m.weights = dequantize_store(q);
        m.quantized = std::move(q);
    } else {
        auto loaded = load_weights(bytes);
        m.cfg = loaded.cfg;
        m.weights = std::move(loaded.weights);
    }
    if (o.scale && *o.scale != m.cfg.scale) {
        throw WeightMismatch("weight file '" + o.weights + "' is for scale " + std::to_string(m.cfg.scale) +
                             ", requested scale " + std::to_string(*o.scale));
    }
    return m;
}

Thresholds thresholds(const Options& o) {
    // Out-of-range requests such as (255, 255) are pulled back to the nearest valid pair.
    return Thresholds::clamped(o.t1, o.t2);
}

UpscaleOptions upscale_options(const Options& o) {
    UpscaleOptions u;
    u.thresholds = thresholds(o);
    u.adaptive = o.adaptive;
    u.patch = o.patch;
    u.overlap = o.overlap;
    u.boundary = parse_boundary_mode(o.boundary);
    u.precision = parse_precision(o.precision);
    u.threads = o.threads;
    if (o.laplacian == "4") u.kernel = LaplacianKernel::FourNeighbor;
    else if (o.laplacian == "8") u.kernel = LaplacianKernel::EightNeighbor;
    else throw ConfigError("laplacian must be 4 or 8");
    if (u.patch < 1) throw ConfigError("patch must be >= 1");
    return u;
}

/// Calibration patches: non-overlapping patch-sized crops of every image.
std::vector<Tensor> calibration_patches(const std::vector<std::string>& paths, int patch) {
    std::vector<Tensor> out;
    for (const auto& p : paths) {
        const Tensor img = read_png(p);
        const TileGrid g = plan_tiles(img.width(), img.height(), patch, 0);
        for (const Tile& t : g.tiles) out.push_back(extract_patch(img, t.src));
    }
    return out;
}

QuantizedModel quantize_from(const LoadedModel& m, const std::vector<std::string>& calib, int patch) {
    const auto patches = calibration_patches(calib, patch);
    if (patches.empty()) throw CalibrationError("calibration set is empty");
    return quantize_model(m.cfg, m.weights, collect_ranges(m.cfg, m.weights, patches));
}

Upscaler make_upscaler(const LoadedModel& m, const Options& o, const UpscaleOptions& u) {
    Model model(m.cfg, m.weights);
    if (u.precision == Precision::Float) return Upscaler(std::move(model), u);
    if (m.quantized) return Upscaler(std::move(model), *m.quantized, u);
    if (o.calibrate.empty()) {
        throw ConfigError("fxp10 needs a quantized weight file or --calibrate images");
    }
    return Upscaler(std::move(model), quantize_from(m, o.calibrate, o.patch), u);
}

std::string frame_path(const std::string& pattern, std::size_t index, std::size_t count) {
    if (count == 1) return pattern;
    const auto pos = pattern.find("{}");
    if (pos == std::string::npos) throw ConfigError("several inputs need an output pattern containing {}");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu", index);
    return pattern.substr(0, pos) + buf + pattern.substr(pos + 2);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw IoError("cannot write '" + path + "'");
}

void emit_json(const std::string& path, const json& j) {
    if (path.empty()) std::cout << j.dump(2) << '\n';
    else write_text(path, j.dump(2) + "\n");
}

void emit_trace(const std::string& path, const std::vector<PatchDecision>& decisions, int width) {
    if (path.empty()) return;
    std::ostringstream s;
    write_trace_csv(s, decisions, width);
    write_text(path, s.str());
}

void emit_report(const Options& o, const cost::CostReport& r, bool to_stdout) {
    if (!o.report.empty() || to_stdout) emit_json(o.report, cost::report_json(r));
    if (!o.csv.empty()) {
        std::ostringstream s;
        cost::write_report_csv(s, r);
        write_text(o.csv, s.str());
    }
}

// ---------------------------------------------------------------------------

int cmd_upscale(const Options& o) {
    const LoadedModel m = load_model(o);
    const UpscaleOptions u = upscale_options(o);
    const Upscaler up = make_upscaler(m, o, u);
    Controller controller(u.thresholds);
    std::vector<PatchDecision> all;
    int lr_overlap = u.overlap;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        const Tensor lr = read_png(o.inputs[i]);
        const UpscaleResult r = up.run(lr, &controller, int(i));
        write_png(frame_path(o.output, i, o.inputs.size()), r.sr);
        all.insert(all.end(), r.decisions.begin(), r.decisions.end());
        lr_overlap = r.grid.lr_overlap;
    }
    emit_trace(o.trace, all, m.cfg.width);
    if (!o.report.empty() || !o.csv.empty()) emit_report(o, cost::build_report(m.cfg, u.patch, lr_overlap, all), false);
    return kOk;
}

int cmd_score_map(const Options& o) {
    const ModelConfig cfg = requested_config(o);
    const UpscaleOptions u = upscale_options(o);
    Controller controller(u.thresholds);
    std::vector<PatchDecision> all;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        const Tensor lr = read_png(o.inputs[i]);
        const TileGrid g = plan_for(lr.width(), lr.height(), cfg, u);
        const auto d = decide_tiles(lr, g, u, u.adaptive ? &controller : nullptr, int(i));
        write_png(frame_path(o.output, i, o.inputs.size()), score_map(lr, g, d));
        all.insert(all.end(), d.begin(), d.end());
    }
    emit_trace(o.trace, all, cfg.width);
    return kOk;
}

std::pair<int, int> parse_size(const std::string& s) {
    const auto x = s.find('x');
    try {
        if (x == std::string::npos) throw std::invalid_argument("");
        const int w = std::stoi(s.substr(0, x));
        const int h = std::stoi(s.substr(x + 1));
        if (w < 1 || h < 1) throw std::invalid_argument("");
        return {w, h};
    } catch (const std::logic_error&) {
        throw ConfigError("size must look like WIDTHxHEIGHT, got '" + s + "'");
    }
}

int cmd_overlap_table(const Options& o) {
    const ModelConfig cfg = requested_config(o);
    const int sr_patch = o.patch * cfg.scale;
    json rows = json::array();
    for (int ov : {0, 4, 8, 12, 16}) {
        json r;
        r["sr_overlap"] = ov;
        r["mac_overhead_pct"] = 100.0 * mac_overhead(sr_patch, ov);
        r["boundary_sram_kb"] = cost::SramModel::kb(cost::sram_sizes(cfg, o.patch, ov).boundary_bytes);
        rows.push_back(r);
    }
    json j;
    j["schema"] = "essr-overlap/1";
    j["sr_patch"] = sr_patch;
    j["rows"] = rows;
    emit_json(o.report, j);
    return kOk;
}

int cmd_cost(const Options& o) {
    if (o.overlap_table) return cmd_overlap_table(o);
    const ModelConfig cfg = requested_config(o);
    const UpscaleOptions u = upscale_options(o);
    std::vector<PatchDecision> decisions;
    int lr_overlap = u.overlap;
    const int sources = int(!o.decisions.empty()) + int(!o.all.empty()) + int(!o.inputs.empty());
    if (sources != 1) throw ConfigError("cost needs exactly one of: input images, --decisions, --all");
    if (!o.decisions.empty()) {
        std::ifstream f(o.decisions);
        if (!f) throw IoError("cannot open '" + o.decisions + "'");
        decisions = read_trace_csv(f, cfg.width);
    } else if (!o.all.empty()) {
        if (o.lr_size.empty()) throw ConfigError("--all needs --lr-size");
        const auto [w, h] = parse_size(o.lr_size);
        const SubnetId id = parse_subnet(o.all, cfg.width);
        const TileGrid g = plan_for(w, h, cfg, u);
        lr_overlap = g.lr_overlap;
        for (int f = 0; f < o.frames; ++f) {
            for (const Tile& t : g.tiles) decisions.push_back({f, t.row, t.col, 0.0, id, false});
        }
    } else {
        Controller controller(u.thresholds);
        for (std::size_t i = 0; i < o.inputs.size(); ++i) {
            const Tensor lr = read_png(o.inputs[i]);
            const TileGrid g = plan_for(lr.width(), lr.height(), cfg, u);
            lr_overlap = g.lr_overlap;
            const auto d = decide_tiles(lr, g, u, u.adaptive ? &controller : nullptr, int(i));
            decisions.insert(decisions.end(), d.begin(), d.end());
        }
    }
    emit_trace(o.trace, decisions, cfg.width);
    emit_report(o, cost::build_report(cfg, u.patch, lr_overlap, decisions), true);
    return kOk;
}

int cmd_quantize(const Options& o) {
    const LoadedModel m = load_model(o);
    QuantizedModel q;
    if (m.quantized && o.calibrate.empty()) {
        q = requantize_model(m.weights, *m.quantized);
    } else {
        q = quantize_from(m, o.calibrate, o.patch);
    }
    write_file(o.output, save_quantized(q));

    json j;
    j["schema"] = "essr-quantize/1";
    json layers = json::array();
    const auto errs = weight_quant_errors(m.weights, q);
    double worst_ratio = 0.0;
    for (std::size_t i = 0; i < errs.size(); ++i) {
        json l;
        l["tensor"] = tensor_name(i, m.cfg.n_sfb);
        l["max_abs_error"] = errs[i].max_abs_error;
        l["half_step"] = errs[i].half_step;
        layers.push_back(l);
        if (errs[i].half_step > 0) worst_ratio = std::max(worst_ratio, errs[i].max_abs_error / errs[i].half_step);
    }
    j["weights"] = layers;
    j["worst_error_over_half_step"] = worst_ratio;

    // End-to-end deviation on the calibration patches, both network subnets.
    const auto patches = calibration_patches(o.calibrate, o.patch);
    json dev;
    for (SubnetId id : {SubnetId::HalfWidth, SubnetId::FullWidth}) {
        double sum = 0.0;
        double worst = 0.0;
        std::size_t n = 0;
        for (const Tensor& p : patches) {
            const Tensor a = forward(p, m.cfg, m.weights, id);
            const Tensor b = forward_fxp(p, q, id);
            const auto da = a.data();
            const auto db = b.data();
            for (std::size_t k = 0; k < da.size(); ++k) {
                const double d = std::abs(double(da[k]) - double(db[k]));
                sum += d;
                worst = std::max(worst, d);
            }
            n += da.size();
        }
        json e;
        e["patches"] = patches.size();
        e["mean_abs_deviation"] = n ? sum / double(n) : 0.0;
        e["max_abs_deviation"] = worst;
        dev[subnet_label(id, m.cfg.width)] = e;
    }
    j["output_deviation"] = dev;
    emit_json(o.report, j);
    return kOk;
}

int cmd_metrics(const Options& o) {
    if (o.inputs.size() != 2) throw ConfigError("metrics needs exactly two images");
    const Tensor a = read_png(o.inputs[0]);
    const Tensor b = read_png(o.inputs[1]);
    const QualityMetrics q = quality(a, b);
    json j;
    if (std::isinf(q.psnr_y)) j["psnr_y"] = "inf";
    else j["psnr_y"] = q.psnr_y;
    j["ssim_y"] = q.ssim_y;
    emit_json(o.report, j);
    return kOk;
}

int cmd_init_weights(const Options& o) {
    const ModelConfig cfg = requested_config(o);
    write_file(o.output, save_weights(random_init(cfg, o.seed), cfg));
    return kOk;
}

// ---------------------------------------------------------------------------

void add_model_options(CLI::App* c, Options& o) {
    c->add_option("--scale", o.scale, "Upscaling factor")->check(CLI::IsMember({2, 4}));
    c->add_option("--width", o.width, "Full network width")->capture_default_str();
    c->add_option("--n-sfb", o.n_sfb, "Number of fusion blocks")->capture_default_str();
    c->add_flag("--bias", o.with_bias, "Give convolutions a bias");
}

void add_weight_options(CLI::App* c, Options& o) {
    auto* w = c->add_option("--weights", o.weights, "Weight file (float or fxp10)");
    c->add_option("--seed", o.seed, "Seed for random weights when no file is given")->excludes(w)->capture_default_str();
}

void add_dispatch_options(CLI::App* c, Options& o) {
    c->add_option("--t1", o.t1, "Bilinear below this edge score")->capture_default_str();
    c->add_option("--t2", o.t2, "Full width at or above this edge score")->capture_default_str();
    c->add_flag("--adaptive", o.adaptive, "Adjust thresholds per frame and cap full-width patches per second");
    c->add_option("--patch", o.patch, "LR patch size")->capture_default_str();
    c->add_option("--overlap", o.overlap, "LR overlap between patches")->capture_default_str();
    c->add_option("--boundary", o.boundary, "Tile boundary handling")
        ->check(CLI::IsMember({"none", "average", "lossless"}))
        ->capture_default_str();
    c->add_option("--laplacian", o.laplacian, "Edge filter: 4 or 8 neighbours")->capture_default_str();
    c->add_option("--trace", o.trace, "Write per-patch decisions as CSV");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-selective super-resolution engine"};
    app.require_subcommand(1);
    Options o;
    std::string isa;
    app.add_option("--isa", isa, "Kernel set: scalar or avx2 (default: best available)");

    auto* up = app.add_subcommand("upscale", "Upscale one image or a numbered frame sequence");
    up->add_option("inputs", o.inputs, "LR PNG files")->required();
    up->add_option("-o,--output", o.output, "Output PNG ({} is the frame number for several inputs)")->required();
    add_model_options(up, o);
    add_weight_options(up, o);
    add_dispatch_options(up, o);
    up->add_option("--precision", o.precision, "float or fxp10")->check(CLI::IsMember({"float", "fxp10"}));
    up->add_option("--calibrate", o.calibrate, "Calibration PNGs for fxp10 with float weights");
    up->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    up->add_option("--report", o.report, "Write the cost report as JSON");
    up->add_option("--csv", o.csv, "Write the cost summary as CSV");

    auto* sm = app.add_subcommand("score-map", "Colour each patch by its chosen subnet");
    sm->add_option("inputs", o.inputs, "LR PNG files")->required();
    sm->add_option("-o,--output", o.output, "Overlay PNG")->required();
    add_model_options(sm, o);
    add_dispatch_options(sm, o);

    auto* co = app.add_subcommand("cost", "Accelerator cost report");
    co->add_option("inputs", o.inputs, "LR PNG files to decide on");
    add_model_options(co, o);
    add_dispatch_options(co, o);
    co->add_option("--decisions", o.decisions, "Decision trace CSV");
    co->add_option("--all", o.all, "Synthetic stream using one subnet: bilinear, half or full");
    co->add_option("--lr-size", o.lr_size, "LR frame size for --all, e.g. 480x270");
    co->add_option("--frames", o.frames, "Frames in the synthetic stream")->check(CLI::PositiveNumber);
    co->add_flag("--overlap-table", o.overlap_table, "MAC overhead and boundary SRAM for SR overlaps 0, 4, 8, 12, 16");
    co->add_option("--report", o.report, "Write JSON here instead of stdout");
    co->add_option("--csv", o.csv, "Write the summary as CSV");

    auto* qu = app.add_subcommand("quantize", "Convert weights to 10-bit fixed point");
    add_model_options(qu, o);
    add_weight_options(qu, o);
    qu->add_option("--calibrate", o.calibrate, "Calibration PNGs");
    qu->add_option("--patch", o.patch, "Calibration patch size")->capture_default_str();
    qu->add_option("-o,--output", o.output, "Quantized weight file")->required();
    qu->add_option("--report", o.report, "Write the error report here instead of stdout");

    auto* me = app.add_subcommand("metrics", "PSNR and SSIM on luminance");
    me->add_option("images", o.inputs, "Two PNG files")->required()->expected(2);
    me->add_option("--report", o.report, "Write JSON here instead of stdout");

    auto* iw = app.add_subcommand("init-weights", "Write random float weights");
    add_model_options(iw, o);
    iw->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    iw->add_option("-o,--output", o.output, "Weight file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (!isa.empty()) simd::set_active_isa(simd::parse_isa(isa));
        if (*up) return cmd_upscale(o);
        if (*sm) return cmd_score_map(o);
        if (*co) return cmd_cost(o);
        if (*qu) return cmd_quantize(o);
        if (*me) return cmd_metrics(o);
        if (*iw) return cmd_init_weights(o);
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << '\n';
        return kIo;
    } catch (const ParseError& e) {
        std::cerr << "error: weights: " << e.what() << '\n';
        return kWeights;
    } catch (const WeightMismatch& e) {
        std::cerr << "error: weights: " << e.what() << '\n';
        return kWeights;
    } catch (const ConfigError& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kConfig;
    } catch (const CalibrationError& e) {
        std::cerr << "error: calibration: " << e.what() << '\n';
        return kCalibration;
    } catch (const Error& e) {
        std::cerr << "error: input: " << e.what() << '\n';
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}
