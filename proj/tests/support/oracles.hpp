// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0
//
// Deliberately plain nested-loop references. They only touch Tensor storage and
// weight arrays, never the library kernels, so they can check them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "essr/model.hpp"
#include "essr/tensor.hpp"

namespace oracle {

using essr::Tensor;

inline Tensor random_tensor(std::mt19937_64& rng, int c, int h, int w, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Tensor t(c, h, w);
    for (auto& v : t.data()) v = essr::real(d(rng));
    return t;
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t n, double bound = 1.0) {
    std::uniform_real_distribution<double> d(-bound, bound);
    std::vector<float> v(n);
    for (auto& x : v) x = float(d(rng));
    return v;
}

/// out[o] = bias[o] + sum_i w[o][i] * in[i], accumulated in double.
inline Tensor pointwise(const Tensor& x, const std::vector<float>& w, const std::vector<float>& bias, int out_ch,
                        std::uint64_t* macs = nullptr) {
    const int in_ch = x.channels();
    Tensor out(out_ch, x.height(), x.width());
    for (int o = 0; o < out_ch; ++o) {
        for (int y = 0; y < x.height(); ++y) {
            for (int xx = 0; xx < x.width(); ++xx) {
                double acc = bias.empty() ? 0.0 : bias[std::size_t(o)];
                for (int i = 0; i < in_ch; ++i) {
                    acc += double(w[std::size_t(o) * std::size_t(in_ch) + std::size_t(i)]) * double(x.at(i, y, xx));
                    if (macs) ++*macs;
                }
                out.at(o, y, xx) = float(acc);
            }
        }
    }
    return out;
}

/// 3x3 per-channel correlation, same size output. Zero padding skips outside taps.
inline Tensor depthwise(const Tensor& x, const std::vector<float>& w, const std::vector<float>& bias, bool replicate,
                        std::uint64_t* macs = nullptr) {
    Tensor out(x.channels(), x.height(), x.width());
    for (int c = 0; c < x.channels(); ++c) {
        for (int y = 0; y < x.height(); ++y) {
            for (int xx = 0; xx < x.width(); ++xx) {
                double acc = bias.empty() ? 0.0 : bias[std::size_t(c)];
                for (int ky = -1; ky <= 1; ++ky) {
                    for (int kx = -1; kx <= 1; ++kx) {
                        int sy = y + ky;
                        int sx = xx + kx;
                        double v;
                        if (sy < 0 || sy >= x.height() || sx < 0 || sx >= x.width()) {
                            if (!replicate) {
                                if (macs) ++*macs;  // the hardware still spends the MAC on a zero
                                continue;
                            }
                            sy = std::clamp(sy, 0, x.height() - 1);
                            sx = std::clamp(sx, 0, x.width() - 1);
                        }
                        v = double(x.at(c, sy, sx));
                        acc += double(w[std::size_t(c) * 9 + std::size_t((ky + 1) * 3 + (kx + 1))]) * v;
                        if (macs) ++*macs;
                    }
                }
                out.at(c, y, xx) = float(acc);
            }
        }
    }
    return out;
}

inline Tensor relu(Tensor t) {
    for (auto& v : t.data()) v = v > 0 ? v : 0;
    return t;
}

inline Tensor plus(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

/// Inverse of pixel shuffle: (C, H*r, W*r) -> (C*r*r, H, W).
inline Tensor pixel_unshuffle(const Tensor& x, int r) {
    Tensor out(x.channels() * r * r, x.height() / r, x.width() / r);
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int xx = 0; xx < out.width(); ++xx)
                for (int dy = 0; dy < r; ++dy)
                    for (int dx = 0; dx < r; ++dx)
                        out.at(c * r * r + dy * r + dx, y, xx) = x.at(c, y * r + dy, xx * r + dx);
    return out;
}

inline Tensor pixel_shuffle(const Tensor& x, int r) {
    Tensor out(x.channels() / (r * r), x.height() * r, x.width() * r);
    for (int c = 0; c < out.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int xx = 0; xx < out.width(); ++xx)
                out.at(c, y, xx) = x.at(c * r * r + (y % r) * r + (xx % r), y / r, xx / r);
    return out;
}

/// Half-pixel-centre bilinear with edge clamping, written straight from the definition.
inline double bilinear_sample(const Tensor& x, int c, double sy, double sx) {
    sy = std::clamp(sy, 0.0, double(x.height() - 1));
    sx = std::clamp(sx, 0.0, double(x.width() - 1));
    const int y0 = int(std::floor(sy));
    const int x0 = int(std::floor(sx));
    const int y1 = std::min(y0 + 1, x.height() - 1);
    const int x1 = std::min(x0 + 1, x.width() - 1);
    const double fy = sy - y0;
    const double fx = sx - x0;
    return (1 - fy) * ((1 - fx) * x.at(c, y0, x0) + fx * x.at(c, y0, x1)) +
           fy * ((1 - fx) * x.at(c, y1, x0) + fx * x.at(c, y1, x1));
}

inline Tensor bilinear(const Tensor& x, int r) {
    Tensor out(x.channels(), x.height() * r, x.width() * r);
    for (int c = 0; c < x.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int xx = 0; xx < out.width(); ++xx)
                out.at(c, y, xx) = float(bilinear_sample(x, c, (y + 0.5) / r - 0.5, (xx + 0.5) / r - 0.5));
    return out;
}

/// Copy of the prefix channels of a store, built by hand from the slicing rule.
inline essr::WeightStore slice_half(const essr::WeightStore& w) {
    const int c = w.width() / 2;
    auto pw = [](const essr::ConvWeights& src, int in, int out) {
        essr::ConvWeights d = essr::ConvWeights::pointwise(in, out, src.has_bias());
        for (int o = 0; o < out; ++o) {
            for (int i = 0; i < in; ++i) d.taps[std::size_t(o * in + i)] = src.taps[std::size_t(o * src.in_channels + i)];
            if (src.has_bias()) d.bias[std::size_t(o)] = src.bias[std::size_t(o)];
        }
        return d;
    };
    auto dw = [](const essr::ConvWeights& src, int ch) {
        essr::ConvWeights d = essr::ConvWeights::depthwise(ch, src.has_bias());
        std::copy_n(src.taps.begin(), std::size_t(ch) * 9, d.taps.begin());
        if (src.has_bias()) std::copy_n(src.bias.begin(), std::size_t(ch), d.bias.begin());
        return d;
    };
    essr::WeightStore h;
    h.first_pw = pw(w.first_pw, 3, c);
    h.first_dw = dw(w.first_dw, c);
    for (const auto& s : w.sfbs) {
        h.sfbs.push_back({pw(s.pw1, c, c), dw(s.dw1, c), pw(s.pw2, c, c), dw(s.dw2, c), pw(s.fuse, c, c)});
    }
    h.recon_dw = dw(w.recon_dw, c);
    h.recon_pw = pw(w.recon_pw, c, w.recon_channels());
    return h;
}

/// Whole network from the naive pieces; counts every multiply-accumulate.
inline Tensor network(const Tensor& x, const essr::WeightStore& w, int scale, std::uint64_t* macs = nullptr) {
    auto p = [&](const Tensor& in, const essr::ConvWeights& cw) {
        return pointwise(in, cw.taps, cw.bias, cw.out_channels, macs);
    };
    auto d = [&](const Tensor& in, const essr::ConvWeights& cw) { return depthwise(in, cw.taps, cw.bias, false, macs); };
    Tensor h = d(p(x, w.first_pw), w.first_dw);
    for (const auto& s : w.sfbs) {
        Tensor t = oracle::relu(d(p(h, s.pw1), s.dw1));
        t = oracle::relu(d(p(t, s.pw2), s.dw2));
        h = oracle::relu(p(plus(t, h), s.fuse));
    }
    return oracle::pixel_shuffle(p(d(h, w.recon_dw), w.recon_pw), scale);
}

inline double luma(const Tensor& rgb, int y, int x) {
    return 0.299 * rgb.at(0, y, x) + 0.587 * rgb.at(1, y, x) + 0.114 * rgb.at(2, y, x);
}

/// Mean of clamped |4-neighbour Laplacian| with replicate borders.
inline double edge_score4(const Tensor& rgb) {
    const int h = rgb.height();
    const int w = rgb.width();
    auto L = [&](int y, int x) { return luma(rgb, std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1)); };
    double sum = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double r = L(y - 1, x) + L(y + 1, x) + L(y, x - 1) + L(y, x + 1) - 4 * L(y, x);
            sum += std::min(std::abs(r), 255.0);
        }
    return sum / (double(h) * w);
}

/// SSIM with a full 2-D Gaussian window at every valid position.
inline double ssim(const Tensor& a, const Tensor& b) {
    double g[11][11];
    double gs = 0;
    for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
            g[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
            gs += g[i][j];
        }
    const double c1 = 6.5025, c2 = 58.5225;
    double total = 0;
    int n = 0;
    for (int y = 0; y + 11 <= a.height(); ++y)
        for (int x = 0; x + 11 <= a.width(); ++x) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double wgt = g[i][j] / gs;
                    const double va = luma(a, y + i, x + j);
                    const double vb = luma(b, y + i, x + j);
                    mx += wgt * va;
                    my += wgt * vb;
                    sxx += wgt * va * va;
                    syy += wgt * vb * vb;
                    sxy += wgt * va * vb;
                }
            const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
            total += (2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++n;
        }
    return total / n;
}

}  // namespace oracle
