// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "essr/kernels.hpp"
#include "essr/tensor.hpp"

namespace essr {

/// Per-patch inference path. HalfWidth runs the first width/2 channels of the shared weights.
enum class SubnetId : std::uint8_t { Bilinear = 0, HalfWidth = 1, FullWidth = 2 };

/// "bilinear", "C27", "C54" for a width-54 model.
std::string subnet_label(SubnetId id, int width);
/// Accepts subnet_label output as well as "bilinear", "half", "full".
SubnetId parse_subnet(std::string_view label, int width);

struct ModelConfig {
    int scale = 4;
    int width = 54;
    int n_sfb = 5;
    bool with_bias = false;

    int recon_channels() const noexcept { return 3 * scale * scale; }
    int half_width() const noexcept { return width / 2; }

    /// Width of the network actually executed for `id` (0 for Bilinear).
    int width_for(SubnetId id) const noexcept;

    /// Radius (in LR pixels) of the receptive field: one per 3x3 layer.
    int receptive_radius() const noexcept { return 2 * n_sfb + 2; }

    /// scale in {2,4}, width positive and divisible by 18, n_sfb in [0, 255].
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Structure-friendly fusion block: two BSConv layers, shortcut add, fusing 1x1.
struct SfbWeights {
    ConvWeights pw1, dw1, pw2, dw2, fuse;

    friend bool operator==(const SfbWeights&, const SfbWeights&) = default;
};

/// All network weights in serialization order:
/// first BSConv (pw, dw), per SFB (pw1, dw1, pw2, dw2, fuse), reconstruction DSConv (dw, pw).
struct WeightStore {
    ConvWeights first_pw;
    ConvWeights first_dw;
    std::vector<SfbWeights> sfbs;
    ConvWeights recon_dw;
    ConvWeights recon_pw;

    /// Zero weights shaped for a network of the given width.
    static WeightStore zeros(int width, int n_sfb, int recon_channels, bool with_bias);

    int width() const noexcept { return first_pw.out_channels; }
    int recon_channels() const noexcept { return recon_pw.out_channels; }
    int n_sfb() const noexcept { return int(sfbs.size()); }

    std::vector<const ConvWeights*> tensors() const;
    std::vector<ConvWeights*> tensors();
    std::size_t tensor_count() const noexcept { return 4 + 5 * sfbs.size(); }
    std::size_t param_count() const;

    /// Shapes chain correctly from 3 input channels to recon_channels outputs.
    void validate() const;

    friend bool operator==(const WeightStore&, const WeightStore&) = default;
};

/// Closed-form parameter total of a full-width store for `cfg`.
std::size_t param_count(const ModelConfig& cfg);

/// Same, for the network executed by `id` (0 for Bilinear).
std::size_t param_count(const ModelConfig& cfg, SubnetId id);

/// Keep the leading width/2 channels of every tensor; the first layer keeps its 3 inputs
/// and the reconstruction layer keeps all of its outputs. Throws DimensionError if the
/// store width is odd (e.g. an already-sliced store).
WeightStore slice_subnet(const WeightStore& w, SubnetId subnet);

/// Fan-in scaled uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], reproducible for a seed.
WeightStore random_init(const ModelConfig& cfg, std::uint64_t seed);

/// Called once per convolution with its serialization index, input and (pre-activation) output.
using LayerObserver = std::function<void(std::size_t tensor_index, const Tensor& in, const Tensor& out)>;

/// Run the store as-is: BSConv -> SFB x n -> DSConv -> pixel shuffle.
Tensor forward(const Tensor& patch, const WeightStore& w, int scale, const LayerObserver* observer = nullptr,
               Padding padding = Padding::Zero);

/// Run `subnet` of the supernet `w`. Bilinear is rejected; it is not a network path.
Tensor forward(const Tensor& patch, const ModelConfig& cfg, const WeightStore& w, SubnetId subnet);

/// Supernet with its half-width slice cached. Immutable and shareable between threads.
class Model {
public:
    Model(ModelConfig cfg, WeightStore weights);

    const ModelConfig& config() const noexcept { return cfg_; }
    const WeightStore& weights() const noexcept { return full_; }
    const WeightStore& weights(SubnetId id) const;

    /// FullWidth / HalfWidth network, or bilinear_resize for Bilinear.
    Tensor run(const Tensor& patch, SubnetId id) const;

private:
    ModelConfig cfg_;
    WeightStore full_;
    WeightStore half_;
};

}  // namespace essr
