// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>

#include "doctest.h"
#include "essr/common.hpp"
#include "essr/model.hpp"
#include "essr/quantized_model.hpp"
#include "essr/weights_io.hpp"
#include "../support/oracles.hpp"

using namespace essr;

namespace {

std::size_t enumerate_params(const WeightStore& w) {
    std::size_t n = 0;
    for (const ConvWeights* t : w.tensors()) n += t->taps.size() + t->bias.size();
    return n;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(ModelConfig{}.validate());
    CHECK_THROWS_AS((ModelConfig{3, 54, 5, false}).validate(), ConfigError);
    CHECK_THROWS_AS((ModelConfig{4, 53, 5, false}).validate(), ConfigError);
    CHECK_THROWS_AS((ModelConfig{4, 0, 5, false}).validate(), ConfigError);
    CHECK_THROWS_AS((ModelConfig{4, 27, 5, false}).validate(), ConfigError);
    CHECK(ModelConfig{}.recon_channels() == 48);
    CHECK((ModelConfig{2, 54, 5, false}).recon_channels() == 12);
}

TEST_CASE("parameter counts") {
    CHECK(param_count(ModelConfig{}) == 52326);
    CHECK(param_count(ModelConfig{}) == 648 + 5 * 9720 + 3078);
    CHECK(param_count(ModelConfig{2, 54, 5, false}) == 50382);
    CHECK(param_count(ModelConfig{4, 54, 0, false}) == 3726);
    for (const ModelConfig cfg : {ModelConfig{}, ModelConfig{2, 54, 5, false}, ModelConfig{4, 18, 2, true},
                                  ModelConfig{2, 36, 3, true}}) {
        const WeightStore w = random_init(cfg, 1);
        CHECK(w.tensor_count() == std::size_t(2 + 5 * cfg.n_sfb + 2));
        CHECK(param_count(cfg) == enumerate_params(w));
        CHECK(param_count(cfg, SubnetId::HalfWidth) == enumerate_params(slice_subnet(w, SubnetId::HalfWidth)));
        CHECK(param_count(cfg, SubnetId::Bilinear) == 0);
    }
}

TEST_CASE("random init is deterministic and fan-in bounded") {
    const ModelConfig cfg{4, 18, 2, true};
    CHECK(random_init(cfg, 5) == random_init(cfg, 5));
    CHECK_FALSE(random_init(cfg, 5) == random_init(cfg, 6));
    const WeightStore w = random_init(cfg, 5);
    for (const ConvWeights* t : w.tensors()) {
        const double bound = 1.0 / std::sqrt(double(t->kind == ConvKind::Pointwise ? t->in_channels : 9));
        for (real v : t->taps) CHECK(std::abs(double(v)) <= bound);
        for (real v : t->bias) CHECK(std::abs(double(v)) <= bound);
    }
}

TEST_CASE("forward shapes and the zero network") {
    const ModelConfig cfg{4, 18, 2, false};
    std::mt19937_64 rng(1);
    const Tensor x = oracle::random_tensor(rng, 3, 12, 9, 0, 255);
    const WeightStore w = random_init(cfg, 2);
    for (SubnetId id : {SubnetId::HalfWidth, SubnetId::FullWidth}) {
        const Tensor y = forward(x, cfg, w, id);
        CHECK(y.channels() == 3);
        CHECK(y.height() == 48);
        CHECK(y.width() == 36);
    }
    CHECK_THROWS_AS(forward(x, cfg, w, SubnetId::Bilinear), ConfigError);
    const WeightStore z = WeightStore::zeros(cfg.width, cfg.n_sfb, cfg.recon_channels(), false);
    CHECK(max_abs(forward(x, cfg, z, SubnetId::FullWidth)) == 0.0);
    CHECK_THROWS_AS(forward(Tensor(2, 4, 4), cfg, w, SubnetId::FullWidth), DimensionError);
}

TEST_CASE("forward matches the nested-loop network") {
    std::mt19937_64 rng(2);
    for (const ModelConfig cfg : {ModelConfig{4, 18, 2, false}, ModelConfig{2, 18, 1, true}}) {
        const WeightStore w = random_init(cfg, 3);
        const Tensor x = oracle::random_tensor(rng, 3, 10, 7, 0, 1);
        CHECK(max_abs_diff(forward(x, cfg, w, SubnetId::FullWidth), oracle::network(x, w, cfg.scale)) <= 1e-5);
        // The half subnet equals a standalone model made of the prefix channels.
        const WeightStore half = oracle::slice_half(w);
        CHECK(half == slice_subnet(w, SubnetId::HalfWidth));
        CHECK(max_abs_diff(forward(x, cfg, w, SubnetId::HalfWidth), oracle::network(x, half, cfg.scale)) <= 1e-5);
        CHECK(Model(cfg, w).run(x, SubnetId::HalfWidth) == forward(x, cfg, w, SubnetId::HalfWidth));
    }
}

TEST_CASE("slicing an already sliced store is a shape error") {
    const WeightStore w = random_init(ModelConfig{4, 18, 1, false}, 1);
    const WeightStore h = slice_subnet(w, SubnetId::HalfWidth);
    CHECK(h.width() == 9);
    CHECK_THROWS_AS(slice_subnet(h, SubnetId::HalfWidth), DimensionError);
}

TEST_CASE("identity fusion blocks double nonnegative input") {
    const ModelConfig cfg{4, 18, 3, false};
    WeightStore w = WeightStore::zeros(cfg.width, cfg.n_sfb, cfg.recon_channels(), false);
    const int c = cfg.width;
    for (int i = 0; i < 3; ++i) w.first_pw.pw(i, i) = 1;
    auto delta = [](ConvWeights& d) {
        for (int k = 0; k < d.in_channels; ++k) d.dw(k, 4) = 1;
    };
    auto identity = [c](ConvWeights& p) {
        for (int k = 0; k < c; ++k) p.pw(k, k) = 1;
    };
    delta(w.first_dw);
    for (auto& s : w.sfbs) {
        identity(s.pw1), identity(s.pw2), identity(s.fuse);
        delta(s.dw1), delta(s.dw2);
    }
    delta(w.recon_dw);
    for (int o = 0; o < 48; ++o) w.recon_pw.pw(o, o / 16) = 1;
    std::mt19937_64 rng(4);
    const Tensor x = oracle::random_tensor(rng, 3, 6, 5, 0, 10);
    const Tensor y = forward(x, cfg, w, SubnetId::FullWidth);
    for (int ch = 0; ch < 3; ++ch)
        for (int yy = 0; yy < y.height(); ++yy)
            for (int xx = 0; xx < y.width(); ++xx) CHECK(y.at(ch, yy, xx) == 8 * x.at(ch, yy / 4, xx / 4));
}

TEST_CASE("float weight file round trip and errors") {
    const ModelConfig cfg{2, 36, 2, true};
    const WeightStore w = random_init(cfg, 9);
    const auto bytes = save_weights(w, cfg);
    const LoadedWeights back = load_weights(bytes);
    CHECK(back.cfg == cfg);
    CHECK(back.weights == w);
    CHECK(save_weights(back.weights, back.cfg) == bytes);
    CHECK(peek_format_version(bytes) == kFloatFormatVersion);

    // Truncation inside the 8th tensor names it.
    std::size_t cut = 4 + 2 + 1 + 2 + 1 + 1;
    const auto tensors = w.tensors();
    for (std::size_t i = 0; i < 7; ++i) cut += 1 + 2 + 2 + 4 + 4 * (tensors[i]->taps.size() + tensors[i]->bias.size());
    cut += 10;
    try {
        load_weights(std::span(bytes.data(), cut));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find(tensor_name(7, cfg.n_sfb)) != std::string::npos);
        CHECK(e.offset() <= cut);
    }
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_weights(bad), ParseError);
    bad = bytes;
    bad[7] = 53;  // width low byte
    bad[8] = 0;
    CHECK_THROWS_WITH_AS(load_weights(bad), doctest::Contains("width 53"), ParseError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(load_weights(bad), ParseError);
    CHECK_THROWS_AS(load_weights(std::span(bytes.data(), 3)), ParseError);
}

TEST_CASE("quantized model") {
    const ModelConfig cfg{4, 18, 2, true};
    const WeightStore w = random_init(cfg, 12);
    std::mt19937_64 rng(5);
    std::vector<Tensor> calib;
    for (int i = 0; i < 4; ++i) calib.push_back(oracle::random_tensor(rng, 3, 8, 8, 0, 255));
    CHECK_THROWS_AS(collect_ranges(cfg, w, {}), CalibrationError);
    const QuantizedModel q = quantize_model(cfg, w, collect_ranges(cfg, w, calib));
    CHECK_NOTHROW(q.validate());

    for (const auto& e : weight_quant_errors(w, q)) CHECK(e.max_abs_error <= e.half_step);

    const auto bytes = save_quantized(q);
    CHECK(peek_format_version(bytes) == kFxp10FormatVersion);
    const QuantizedModel back = load_quantized(bytes);
    CHECK(back == q);
    // Re-quantizing the dequantized weights with the same exponents changes nothing.
    CHECK(save_quantized(requantize_model(dequantize_store(back), back)) == bytes);

    for (SubnetId id : {SubnetId::HalfWidth, SubnetId::FullWidth}) {
        const Tensor f = forward(calib[0], cfg, w, id);
        const Tensor g = forward_fxp(calib[0], q, id);
        CHECK(g.same_shape(f));
        const double dev = max_abs_diff(f, g);
        CHECK(std::isfinite(dev));
        CHECK(dev < 0.1 * (max_abs(f) + 1.0));
    }
}
