// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace essr {

namespace {

void check_dims(int c, int h, int w) {
    if (c < 1 || h < 1 || w < 1) {
        throw DimensionError("tensor dimensions must be >= 1, got " + std::to_string(c) + "x" +
                             std::to_string(h) + "x" + std::to_string(w));
    }
}

}  // namespace

Tensor::Tensor(int channels, int height, int width, real fill)
    : channels_(channels), height_(height), width_(width) {
    check_dims(channels, height, width);
    data_.assign(std::size_t(channels) * std::size_t(height) * std::size_t(width), fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<real> data)
    : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    check_dims(channels, height, width);
    if (data_.size() != std::size_t(channels) * std::size_t(height) * std::size_t(width)) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape");
    }
}

Tensor Tensor::crop(int y0, int x0, int h, int w) const {
    if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > height_ || x0 + w > width_) {
        throw DimensionError("crop rectangle outside tensor");
    }
    Tensor out(channels_, h, w);
    for (int c = 0; c < channels_; ++c) {
        for (int y = 0; y < h; ++y) {
            const real* src = &data_[index(c, y0 + y, x0)];
            std::copy(src, src + w, &out.at(c, y, 0));
        }
    }
    return out;
}

Tensor Tensor::leading_channels(int count) const {
    if (count < 1 || count > channels_) {
        throw DimensionError("cannot take " + std::to_string(count) + " of " +
                             std::to_string(channels_) + " channels");
    }
    std::vector<real> d(data_.begin(), data_.begin() + std::ptrdiff_t(std::size_t(count) * plane_size()));
    return Tensor(count, height_, width_, std::move(d));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw DimensionError("max_abs_diff: shape mismatch");
    }
    double m = 0.0;
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        m = std::max(m, std::abs(double(da[i]) - double(db[i])));
    }
    return m;
}

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (real v : t.data()) {
        m = std::max(m, std::abs(double(v)));
    }
    return m;
}

}  // namespace essr
