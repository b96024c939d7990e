// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace essr {

void Thresholds::validate() const {
    if (t1 < 0 || t1 >= t2 || t2 > 255) {
        throw ConfigError("thresholds must satisfy 0 <= t1 < t2 <= 255, got (" + std::to_string(t1) + ", " +
                          std::to_string(t2) + ")");
    }
}

Thresholds Thresholds::clamped(int t1, int t2) noexcept {
    Thresholds th;
    th.t2 = std::clamp(t2, 1, 255);
    th.t1 = std::clamp(t1, 0, th.t2 - 1);
    return th;
}

Tensor luminance(const Tensor& rgb) {
    if (rgb.channels() != 3) {
        throw DimensionError("luminance expects 3 channels, got " + std::to_string(rgb.channels()));
    }
    Tensor y(1, rgb.height(), rgb.width());
    auto r = rgb.plane(0);
    auto g = rgb.plane(1);
    auto b = rgb.plane(2);
    auto out = y.plane(0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = real(0.299 * double(r[i]) + 0.587 * double(g[i]) + 0.114 * double(b[i]));
    }
    return y;
}

double edge_score(const Tensor& rgb, LaplacianKernel kernel) {
    const Tensor y = luminance(rgb);
    const int h = y.height();
    const int w = y.width();
    auto at = [&](int yy, int xx) {
        return double(y.at(0, std::clamp(yy, 0, h - 1), std::clamp(xx, 0, w - 1)));
    };
    double sum = 0.0;
    for (int yy = 0; yy < h; ++yy) {
        for (int xx = 0; xx < w; ++xx) {
            double resp = 0.0;
            if (kernel == LaplacianKernel::FourNeighbor) {
                resp = at(yy - 1, xx) + at(yy + 1, xx) + at(yy, xx - 1) + at(yy, xx + 1) - 4.0 * at(yy, xx);
            } else {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dy != 0 || dx != 0) resp += at(yy + dy, xx + dx);
                    }
                }
                resp -= 8.0 * at(yy, xx);
            }
            sum += std::min(std::abs(resp), 255.0);
        }
    }
    return sum / (double(h) * double(w));
}

SubnetId decide(double score, const Thresholds& th) noexcept {
    if (score < double(th.t1)) return SubnetId::Bilinear;
    if (score < double(th.t2)) return SubnetId::HalfWidth;
    return SubnetId::FullWidth;
}

PatchDecision controller_step(ControllerState& state, double score, const ControllerLimits& limits) {
    PatchDecision d;
    d.edge_score = score;
    d.subnet = decide(score, state.thresholds);
    if (d.subnet == SubnetId::FullWidth) {
        if (state.c54_this_second >= limits.full_width_per_window) {
            d.subnet = SubnetId::HalfWidth;
            d.demoted = true;
            state.cap_engaged = true;
        } else {
            ++state.c54_this_second;
            ++state.c54_this_frame;
        }
    }
    return d;
}

void end_of_frame(ControllerState& state, const ControllerLimits& limits) {
    // While the window cap is engaged the thresholds are left alone.
    if (!state.cap_engaged) {
        Thresholds& th = state.thresholds;
        if (state.c54_this_frame > limits.raise_above) {
            th = Thresholds::clamped(th.t1 + limits.t1_step, th.t2 + limits.t2_step);
        } else if (state.c54_this_frame < limits.lower_below) {
            const int t1 = std::max(th.t1 - limits.t1_step, 0);
            th = Thresholds::clamped(t1, std::max(th.t2 - limits.t2_step, t1 + 1));
        }
    }
    state.c54_this_frame = 0;
    if (++state.frames_this_second >= limits.frames_per_window) {
        state.frames_this_second = 0;
        state.c54_this_second = 0;
        state.cap_engaged = false;
    }
}

Controller::Controller(Thresholds initial, ControllerLimits limits) : limits_(limits) {
    initial.validate();
    if (limits.frames_per_window < 1 || limits.full_width_per_window < 0) {
        throw ConfigError("controller window must span at least one frame");
    }
    state_.thresholds = initial;
}

PatchDecision Controller::step(double score) { return controller_step(state_, score, limits_); }

void Controller::end_of_frame() { essr::end_of_frame(state_, limits_); }

void write_trace_csv(std::ostream& out, std::span<const PatchDecision> decisions, int width) {
    out << "frame,patch_row,patch_col,edge_score,subnet,demoted\n";
    for (const PatchDecision& d : decisions) {
        std::ostringstream score;
        score << std::fixed << std::setprecision(4) << d.edge_score;
        out << d.frame << ',' << d.patch_row << ',' << d.patch_col << ',' << score.str() << ','
            << subnet_label(d.subnet, width) << ',' << (d.demoted ? 1 : 0) << '\n';
    }
}

std::vector<PatchDecision> read_trace_csv(std::istream& in, int width) {
    std::vector<PatchDecision> out;
    std::string line;
    if (!std::getline(in, line) || line.rfind("frame,patch_row,patch_col,edge_score,subnet,demoted", 0) != 0) {
        throw InputError("decision trace: missing or unexpected header");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) cols.push_back(col);
        if (cols.size() != 6) throw InputError("decision trace line " + std::to_string(line_no) + ": expected 6 columns");
        try {
            PatchDecision d;
            d.frame = std::stoi(cols[0]);
            d.patch_row = std::stoi(cols[1]);
            d.patch_col = std::stoi(cols[2]);
            d.edge_score = std::stod(cols[3]);
            d.subnet = parse_subnet(cols[4], width);
            d.demoted = cols[5] == "1";
            out.push_back(d);
        } catch (const std::logic_error&) {
            throw InputError("decision trace line " + std::to_string(line_no) + ": malformed value");
        }
    }
    return out;
}

}  // namespace essr
