// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "essr/common.hpp"
#include "essr/dispatch.hpp"

namespace essr {

namespace {

constexpr int kWin = 11;

void check_pair(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw DimensionError("metrics: images differ in shape");
    if (a.channels() != 3) throw DimensionError("metrics: expected RGB images");
}

std::vector<double> luma(const Tensor& rgb) {
    const Tensor y = luminance(rgb);
    const auto d = y.data();
    return {d.begin(), d.end()};
}

std::array<double, kWin> gaussian() {
    std::array<double, kWin> g{};
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = double(i - kWin / 2);
        g[std::size_t(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += g[std::size_t(i)];
    }
    for (auto& v : g) v /= sum;
    return g;
}

// Separable "valid" filter: (h, w) -> (h - 10, w - 10).
std::vector<double> blur(const std::vector<double>& in, int h, int w) {
    static const auto g = gaussian();
    const int ow = w - kWin + 1;
    const int oh = h - kWin + 1;
    std::vector<double> tmp(std::size_t(h) * std::size_t(ow));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[std::size_t(k)] * in[std::size_t(y) * std::size_t(w) + std::size_t(x + k)];
            tmp[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
        }
    }
    std::vector<double> out(std::size_t(oh) * std::size_t(ow));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[std::size_t(k)] * tmp[std::size_t(y + k) * std::size_t(ow) + std::size_t(x)];
            out[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
        }
    }
    return out;
}

}  // namespace

double psnr_y(const Tensor& a, const Tensor& b) {
    check_pair(a, b);
    const auto ya = luma(a);
    const auto yb = luma(b);
    double se = 0.0;
    for (std::size_t i = 0; i < ya.size(); ++i) {
        const double d = ya[i] - yb[i];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / double(ya.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim_y(const Tensor& a, const Tensor& b) {
    check_pair(a, b);
    const int h = a.height();
    const int w = a.width();
    if (h < kWin || w < kWin) throw DimensionError("ssim: images must be at least 11x11");
    const auto x = luma(a);
    const auto y = luma(b);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = blur(x, h, w);
    const auto my = blur(y, h, w);
    const auto sxx = blur(xx, h, w);
    const auto syy = blur(yy, h, w);
    const auto sxy = blur(xy, h, w);
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        sum += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    return sum / double(mx.size());
}

QualityMetrics quality(const Tensor& a, const Tensor& b) { return {psnr_y(a, b), ssim_y(a, b)}; }

}  // namespace essr
