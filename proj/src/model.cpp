// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/model.hpp"

#include <cmath>
#include <random>
#include <string>

namespace essr {

std::string subnet_label(SubnetId id, int width) {
    switch (id) {
        case SubnetId::Bilinear:
            return "bilinear";
        case SubnetId::HalfWidth:
            return "C" + std::to_string(width / 2);
        case SubnetId::FullWidth:
            return "C" + std::to_string(width);
    }
    return "unknown";
}

SubnetId parse_subnet(std::string_view label, int width) {
    if (label == "bilinear") return SubnetId::Bilinear;
    if (label == "half") return SubnetId::HalfWidth;
    if (label == "full") return SubnetId::FullWidth;
    if (label == subnet_label(SubnetId::HalfWidth, width)) return SubnetId::HalfWidth;
    if (label == subnet_label(SubnetId::FullWidth, width)) return SubnetId::FullWidth;
    throw InputError("unknown subnet label '" + std::string(label) + "'");
}

int ModelConfig::width_for(SubnetId id) const noexcept {
    switch (id) {
        case SubnetId::Bilinear:
            return 0;
        case SubnetId::HalfWidth:
            return half_width();
        case SubnetId::FullWidth:
            return width;
    }
    return 0;
}

void ModelConfig::validate() const {
    if (scale != 2 && scale != 4) {
        throw ConfigError("unsupported scale " + std::to_string(scale) + " (expected 2 or 4)");
    }
    if (width <= 0 || width % 2 != 0 || width % 9 != 0) {
        throw ConfigError("width " + std::to_string(width) + " must be positive and divisible by 2 and 9");
    }
    if (width > 65535) throw ConfigError("width too large");
    if (n_sfb < 0 || n_sfb > 255) {
        throw ConfigError("SFB count " + std::to_string(n_sfb) + " outside [0, 255]");
    }
}

WeightStore WeightStore::zeros(int width, int n_sfb, int recon_channels, bool with_bias) {
    WeightStore w;
    w.first_pw = ConvWeights::pointwise(3, width, with_bias);
    w.first_dw = ConvWeights::depthwise(width, with_bias);
    w.sfbs.resize(std::size_t(n_sfb));
    for (auto& s : w.sfbs) {
        s.pw1 = ConvWeights::pointwise(width, width, with_bias);
        s.dw1 = ConvWeights::depthwise(width, with_bias);
        s.pw2 = ConvWeights::pointwise(width, width, with_bias);
        s.dw2 = ConvWeights::depthwise(width, with_bias);
        s.fuse = ConvWeights::pointwise(width, width, with_bias);
    }
    w.recon_dw = ConvWeights::depthwise(width, with_bias);
    w.recon_pw = ConvWeights::pointwise(width, recon_channels, with_bias);
    return w;
}

std::vector<const ConvWeights*> WeightStore::tensors() const {
    std::vector<const ConvWeights*> out{&first_pw, &first_dw};
    for (const auto& s : sfbs) {
        out.insert(out.end(), {&s.pw1, &s.dw1, &s.pw2, &s.dw2, &s.fuse});
    }
    out.insert(out.end(), {&recon_dw, &recon_pw});
    return out;
}

std::vector<ConvWeights*> WeightStore::tensors() {
    std::vector<ConvWeights*> out{&first_pw, &first_dw};
    for (auto& s : sfbs) {
        out.insert(out.end(), {&s.pw1, &s.dw1, &s.pw2, &s.dw2, &s.fuse});
    }
    out.insert(out.end(), {&recon_dw, &recon_pw});
    return out;
}

std::size_t WeightStore::param_count() const {
    std::size_t n = 0;
    for (const ConvWeights* t : tensors()) n += t->param_count();
    return n;
}

void WeightStore::validate() const {
    const int c = width();
    auto expect = [](const ConvWeights& w, ConvKind kind, int in, int out, const char* name) {
        w.validate();
        if (w.kind != kind || w.in_channels != in || w.out_channels != out) {
            throw DimensionError(std::string("weight tensor ") + name + " has shape " +
                                 std::to_string(w.in_channels) + "->" + std::to_string(w.out_channels) +
                                 ", expected " + std::to_string(in) + "->" + std::to_string(out));
        }
    };
    expect(first_pw, ConvKind::Pointwise, 3, c, "first_pw");
    expect(first_dw, ConvKind::Depthwise3x3, c, c, "first_dw");
    for (const auto& s : sfbs) {
        expect(s.pw1, ConvKind::Pointwise, c, c, "sfb.pw1");
        expect(s.dw1, ConvKind::Depthwise3x3, c, c, "sfb.dw1");
        expect(s.pw2, ConvKind::Pointwise, c, c, "sfb.pw2");
        expect(s.dw2, ConvKind::Depthwise3x3, c, c, "sfb.dw2");
        expect(s.fuse, ConvKind::Pointwise, c, c, "sfb.fuse");
    }
    expect(recon_dw, ConvKind::Depthwise3x3, c, c, "recon_dw");
    expect(recon_pw, ConvKind::Pointwise, c, recon_pw.out_channels, "recon_pw");
    const bool bias = first_pw.has_bias();
    for (const ConvWeights* t : tensors()) {
        if (t->has_bias() != bias) throw DimensionError("weight store mixes biased and unbiased layers");
    }
}

std::size_t param_count(const ModelConfig& cfg) { return param_count(cfg, SubnetId::FullWidth); }

std::size_t param_count(const ModelConfig& cfg, SubnetId id) {
    const std::size_t c = std::size_t(cfg.width_for(id));
    if (c == 0) return 0;
    const std::size_t r = std::size_t(cfg.recon_channels());
    const std::size_t n = std::size_t(cfg.n_sfb);
    std::size_t total = (3 * c + 9 * c) + n * (3 * c * c + 18 * c) + (9 * c + c * r);
    if (cfg.with_bias) total += 2 * c + n * 5 * c + c + r;
    return total;
}

namespace {

ConvWeights slice_tensor(const ConvWeights& w, int keep_in, int keep_out) {
    ConvWeights s;
    s.kind = w.kind;
    s.in_channels = keep_in;
    s.out_channels = keep_out;
    if (w.kind == ConvKind::Pointwise) {
        s.taps.resize(std::size_t(keep_in) * std::size_t(keep_out));
        for (int o = 0; o < keep_out; ++o) {
            for (int i = 0; i < keep_in; ++i) s.pw(o, i) = w.pw(o, i);
        }
    } else {
        s.taps.assign(w.taps.begin(), w.taps.begin() + std::ptrdiff_t(keep_out) * 9);
    }
    if (w.has_bias()) s.bias.assign(w.bias.begin(), w.bias.begin() + keep_out);
    return s;
}

}  // namespace

WeightStore slice_subnet(const WeightStore& w, SubnetId subnet) {
    if (subnet != SubnetId::HalfWidth) {
        throw ConfigError("slice_subnet only produces the half-width subnet");
    }
    w.validate();
    const int c = w.width();
    if (c % 2 != 0) {
        throw DimensionError("cannot halve a store of odd width " + std::to_string(c) + " (already sliced?)");
    }
    const int h = c / 2;
    WeightStore s;
    s.first_pw = slice_tensor(w.first_pw, 3, h);
    s.first_dw = slice_tensor(w.first_dw, h, h);
    s.sfbs.reserve(w.sfbs.size());
    for (const auto& b : w.sfbs) {
        s.sfbs.push_back({slice_tensor(b.pw1, h, h), slice_tensor(b.dw1, h, h), slice_tensor(b.pw2, h, h),
                          slice_tensor(b.dw2, h, h), slice_tensor(b.fuse, h, h)});
    }
    s.recon_dw = slice_tensor(w.recon_dw, h, h);
    s.recon_pw = slice_tensor(w.recon_pw, h, w.recon_channels());
    return s;
}

WeightStore random_init(const ModelConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    WeightStore w = WeightStore::zeros(cfg.width, cfg.n_sfb, cfg.recon_channels(), cfg.with_bias);
    std::mt19937_64 rng(seed);
    // 24 random bits -> exact float in [-bound, bound)
    auto draw = [&rng](double bound) {
        const double u = double(rng() >> 40) / double(1u << 24);
        return real((2.0 * u - 1.0) * bound);
    };
    for (ConvWeights* t : w.tensors()) {
        const int fan_in = t->kind == ConvKind::Pointwise ? t->in_channels : 9;
        const double bound = 1.0 / std::sqrt(double(fan_in));
        for (real& v : t->taps) v = draw(bound);
        for (real& v : t->bias) v = draw(bound);
    }
    return w;
}

Tensor forward(const Tensor& patch, const WeightStore& w, int scale, const LayerObserver* observer,
               Padding padding) {
    if (patch.channels() != 3) {
        throw DimensionError("forward expects a 3-channel patch, got " + std::to_string(patch.channels()));
    }
    if (w.recon_channels() != 3 * scale * scale) {
        throw DimensionError("reconstruction layer has " + std::to_string(w.recon_channels()) +
                             " outputs, scale " + std::to_string(scale) + " needs " + std::to_string(3 * scale * scale));
    }
    std::size_t index = 0;
    auto layer = [&](const Tensor& in, const ConvWeights& cw) {
        Tensor out = conv(in, cw, padding);
        if (observer) (*observer)(index, in, out);
        ++index;
        return out;
    };
    Tensor x = layer(layer(patch, w.first_pw), w.first_dw);
    for (const auto& s : w.sfbs) {
        Tensor h = layer(x, s.pw1);
        h = layer(h, s.dw1);
        relu_inplace(h);
        h = layer(h, s.pw2);
        h = layer(h, s.dw2);
        relu_inplace(h);
        x = layer(add(h, x), s.fuse);
        relu_inplace(x);
    }
    x = layer(layer(x, w.recon_dw), w.recon_pw);
    return pixel_shuffle(x, scale);
}

Tensor forward(const Tensor& patch, const ModelConfig& cfg, const WeightStore& w, SubnetId subnet) {
    switch (subnet) {
        case SubnetId::FullWidth:
            return forward(patch, w, cfg.scale);
        case SubnetId::HalfWidth:
            return forward(patch, slice_subnet(w, SubnetId::HalfWidth), cfg.scale);
        case SubnetId::Bilinear:
            break;
    }
    throw ConfigError("forward: the bilinear path is not a network subnet");
}

Model::Model(ModelConfig cfg, WeightStore weights) : cfg_(cfg), full_(std::move(weights)) {
    cfg_.validate();
    full_.validate();
    if (full_.width() != cfg_.width || full_.n_sfb() != cfg_.n_sfb ||
        full_.recon_channels() != cfg_.recon_channels() || full_.first_pw.has_bias() != cfg_.with_bias) {
        throw ConfigError("weight store does not match the model configuration");
    }
    half_ = slice_subnet(full_, SubnetId::HalfWidth);
}

const WeightStore& Model::weights(SubnetId id) const {
    if (id == SubnetId::Bilinear) throw ConfigError("the bilinear path has no weights");
    return id == SubnetId::FullWidth ? full_ : half_;
}

Tensor Model::run(const Tensor& patch, SubnetId id) const {
    if (id == SubnetId::Bilinear) return bilinear_resize(patch, cfg_.scale);
    return forward(patch, weights(id), cfg_.scale);
}

}  // namespace essr
