// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/quantized_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace essr {

void QuantizedModel::validate() const {
    cfg.validate();
    const std::size_t expected = 4 + 5 * std::size_t(cfg.n_sfb);
    if (layers.size() != expected) {
        throw DimensionError("quantized model has " + std::to_string(layers.size()) + " layers, expected " +
                             std::to_string(expected));
    }
    // Shapes are checked through the float view.
    WeightStore view = dequantize_store(*this);
    view.validate();
    if (view.width() != cfg.width || view.recon_channels() != cfg.recon_channels()) {
        throw DimensionError("quantized layers do not match the configuration");
    }
}

ActivationRanges collect_ranges(const ModelConfig& cfg, const WeightStore& w, std::span<const Tensor> patches) {
    if (patches.empty()) throw CalibrationError("no calibration patches");
    ActivationRanges r;
    r.input_max.assign(w.tensor_count(), 0.0);
    r.output_max.assign(w.tensor_count(), 0.0);
    const LayerObserver observer = [&r](std::size_t i, const Tensor& in, const Tensor& out) {
        r.input_max[i] = std::max(r.input_max[i], max_abs(in));
        r.output_max[i] = std::max(r.output_max[i], max_abs(out));
    };
    const WeightStore half = slice_subnet(w, SubnetId::HalfWidth);
    for (const Tensor& p : patches) {
        forward(p, w, cfg.scale, &observer);
        forward(p, half, cfg.scale, &observer);
        ++r.samples;
    }
    return r;
}

namespace {

int weight_exp_of(const ConvWeights& w) {
    double m = 0.0;
    for (real v : w.taps) m = std::max(m, std::abs(double(v)));
    return scale_exp_for(m);
}

}  // namespace

QuantizedModel quantize_model(const ModelConfig& cfg, const WeightStore& w, const ActivationRanges& ranges) {
    cfg.validate();
    w.validate();
    const auto tensors = w.tensors();
    if (ranges.input_max.size() != tensors.size() || ranges.output_max.size() != tensors.size()) {
        throw CalibrationError("activation ranges do not match the weight store");
    }
    QuantizedModel q;
    q.cfg = cfg;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const int in_exp = scale_exp_for(ranges.input_max[i]);
        const int out_exp = scale_exp_for(ranges.output_max[i]);
        q.layers.push_back({quantize_weights(*tensors[i], weight_exp_of(*tensors[i]), in_exp), in_exp, out_exp});
    }
    return q;
}

QuantizedModel requantize_model(const WeightStore& w, const QuantizedModel& reference) {
    const auto tensors = w.tensors();
    if (tensors.size() != reference.layers.size()) {
        throw DimensionError("requantize_model: layer count mismatch");
    }
    QuantizedModel q;
    q.cfg = reference.cfg;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const auto& ref = reference.layers[i];
        q.layers.push_back({quantize_weights(*tensors[i], weight_exp_of(*tensors[i]), ref.input_exp), ref.input_exp,
                            ref.output_exp});
    }
    return q;
}

WeightStore dequantize_store(const QuantizedModel& q) {
    const std::size_t expected = 4 + 5 * std::size_t(std::max(q.cfg.n_sfb, 0));
    if (q.layers.size() != expected) throw DimensionError("quantized model layer count mismatch");
    WeightStore w;
    w.sfbs.resize(std::size_t(q.cfg.n_sfb));
    auto tensors = w.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        *tensors[i] = dequantize_weights(q.layers[i].weights, q.layers[i].input_exp);
    }
    return w;
}

namespace {

QConvWeights slice_q(const QConvWeights& w, int keep_in, int keep_out) {
    QConvWeights s;
    s.kind = w.kind;
    s.in_channels = keep_in;
    s.out_channels = keep_out;
    s.weight_exp = w.weight_exp;
    if (w.kind == ConvKind::Pointwise) {
        s.taps.resize(std::size_t(keep_in) * std::size_t(keep_out));
        for (int o = 0; o < keep_out; ++o) {
            for (int i = 0; i < keep_in; ++i) {
                s.taps[std::size_t(o) * std::size_t(keep_in) + std::size_t(i)] =
                    w.taps[std::size_t(o) * std::size_t(w.in_channels) + std::size_t(i)];
            }
        }
    } else {
        s.taps.assign(w.taps.begin(), w.taps.begin() + std::ptrdiff_t(keep_out) * 9);
    }
    if (w.has_bias()) s.bias.assign(w.bias.begin(), w.bias.begin() + keep_out);
    return s;
}

}  // namespace

Tensor forward_fxp(const Tensor& patch, const QuantizedModel& q, SubnetId subnet) {
    if (subnet == SubnetId::Bilinear) throw ConfigError("forward_fxp: the bilinear path is not a network subnet");
    if (patch.channels() != 3) throw DimensionError("forward_fxp expects a 3-channel patch");
    const std::size_t n_layers = q.layers.size();
    if (n_layers != 4 + 5 * std::size_t(q.cfg.n_sfb)) throw DimensionError("quantized model layer count mismatch");

    const int width = q.cfg.width_for(subnet);
    auto weights = [&](std::size_t i) {
        const QConvWeights& w = q.layers[i].weights;
        if (subnet == SubnetId::FullWidth) return w;
        const int in = i == 0 ? 3 : width;
        const int out = i + 1 == n_layers ? w.out_channels : width;
        return slice_q(w, in, out);
    };
    std::size_t i = 0;
    auto layer = [&](const QTensor& x) {
        QTensor y = qconv(x, weights(i), q.layers[i].output_exp);
        ++i;
        return y;
    };

    QTensor x = quantize(patch, q.layers[0].input_exp);
    x = layer(x);
    // Each layer consumes activations at its own input exponent.
    auto to_exp = [](const QTensor& t, int e) {
        if (t.scale_exp == e) return t;
        QTensor r{t.channels, t.height, t.width, e, {}};
        r.values.resize(t.values.size());
        for (std::size_t k = 0; k < t.values.size(); ++k) r.values[k] = requantize_value(t.values[k], t.scale_exp, e);
        return r;
    };
    x = layer(to_exp(x, q.layers[i].input_exp));
    for (int b = 0; b < q.cfg.n_sfb; ++b) {
        QTensor h = layer(to_exp(x, q.layers[i].input_exp));
        h = qrelu(layer(to_exp(h, q.layers[i].input_exp)));
        h = layer(to_exp(h, q.layers[i].input_exp));
        h = qrelu(layer(to_exp(h, q.layers[i].input_exp)));
        const QTensor sum = qadd(h, x, q.layers[i].input_exp);
        x = qrelu(layer(sum));
    }
    x = layer(to_exp(x, q.layers[i].input_exp));
    x = layer(to_exp(x, q.layers[i].input_exp));
    return pixel_shuffle(dequantize(x), q.cfg.scale);
}

std::vector<LayerQuantError> weight_quant_errors(const WeightStore& w, const QuantizedModel& q) {
    const auto tensors = w.tensors();
    if (tensors.size() != q.layers.size()) throw DimensionError("weight_quant_errors: layer count mismatch");
    std::vector<LayerQuantError> out;
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        const QConvWeights& qw = q.layers[i].weights;
        LayerQuantError e;
        e.half_step = std::ldexp(0.5, qw.weight_exp);
        for (std::size_t k = 0; k < tensors[i]->taps.size(); ++k) {
            e.max_abs_error = std::max(
                e.max_abs_error, std::abs(double(tensors[i]->taps[k]) - dequantize_value(qw.taps[k], qw.weight_exp)));
        }
        out.push_back(e);
    }
    return out;
}

}  // namespace essr
