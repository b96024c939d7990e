// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "essr/model.hpp"
#include "essr/tensor.hpp"

namespace essr {

/// Edge-score thresholds; 0 <= t1 < t2 <= 255.
struct Thresholds {
    int t1 = 8;
    int t2 = 40;

    void validate() const;
    /// Nearest valid pair: t2 clamped to [1, 255], t1 to [0, t2 - 1].
    static Thresholds clamped(int t1, int t2) noexcept;

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

enum class LaplacianKernel { FourNeighbor, EightNeighbor };

/// Controller limits. Defaults follow the 8K@30FPS target.
struct ControllerLimits {
    long full_width_per_window = 25500;
    int frames_per_window = 30;
    long raise_above = 1000;  ///< per-frame FullWidth count that raises thresholds
    long lower_below = 700;   ///< per-frame FullWidth count that lowers thresholds
    int t1_step = 1;
    int t2_step = 5;
};

struct ControllerState {
    Thresholds thresholds;
    long c54_this_second = 0;
    long c54_this_frame = 0;
    int frames_this_second = 0;
    bool cap_engaged = false;

    friend bool operator==(const ControllerState&, const ControllerState&) = default;
};

struct PatchDecision {
    int frame = 0;
    int patch_row = 0;
    int patch_col = 0;
    double edge_score = 0.0;
    SubnetId subnet = SubnetId::Bilinear;
    bool demoted = false;  ///< FullWidth forced down to HalfWidth by the window cap

    friend bool operator==(const PatchDecision&, const PatchDecision&) = default;
};

/// BT.601 luma of an RGB tensor: 0.299 R + 0.587 G + 0.114 B.
Tensor luminance(const Tensor& rgb);

/// Mean of clamp(|Laplacian(luma)|, 0, 255) with replicate padding. Result in [0, 255].
double edge_score(const Tensor& rgb, LaplacianKernel kernel = LaplacianKernel::FourNeighbor);

/// Half-open bands: [0, t1) bilinear, [t1, t2) half width, [t2, 255] full width.
SubnetId decide(double score, const Thresholds& th) noexcept;

/// Resource-adaptive switching. Feed scores in raster order, call end_of_frame between frames.
class Controller {
public:
    explicit Controller(Thresholds initial = {}, ControllerLimits limits = {});

    const ControllerState& state() const noexcept { return state_; }
    const ControllerLimits& limits() const noexcept { return limits_; }

    /// Decide one patch; demotes FullWidth to HalfWidth once the window cap is reached.
    PatchDecision step(double score);

    /// Adjust thresholds from this frame's FullWidth count and roll the counters.
    void end_of_frame();

private:
    ControllerState state_;
    ControllerLimits limits_;
};

/// Functional forms of Controller::step / end_of_frame.
PatchDecision controller_step(ControllerState& state, double score, const ControllerLimits& limits = {});
void end_of_frame(ControllerState& state, const ControllerLimits& limits = {});

/// CSV trace: frame,patch_row,patch_col,edge_score,subnet,demoted
void write_trace_csv(std::ostream& out, std::span<const PatchDecision> decisions, int width);
std::vector<PatchDecision> read_trace_csv(std::istream& in, int width);

}  // namespace essr
