// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "essr/common.hpp"

namespace essr {

/// Dense channel-major (C, H, W) feature map.
class Tensor {
public:
    Tensor() = default;
    Tensor(int channels, int height, int width, real fill = real(0));
    Tensor(int channels, int height, int width, std::vector<real> data);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t plane_size() const noexcept { return std::size_t(height_) * std::size_t(width_); }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    real& at(int c, int y, int x) { return data_[index(c, y, x)]; }
    real at(int c, int y, int x) const { return data_[index(c, y, x)]; }

    std::span<real> plane(int c) { return {data_.data() + std::size_t(c) * plane_size(), plane_size()}; }
    std::span<const real> plane(int c) const {
        return {data_.data() + std::size_t(c) * plane_size(), plane_size()};
    }

    std::span<real> data() noexcept { return data_; }
    std::span<const real> data() const noexcept { return data_; }

    bool same_shape(const Tensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
    }

    /// Copy of the region [y0, y0+h) x [x0, x0+w) of every channel. Must lie inside the tensor.
    Tensor crop(int y0, int x0, int h, int w) const;

    /// Copy of the first `count` channels.
    Tensor leading_channels(int count) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t index(int c, int y, int x) const noexcept {
        return (std::size_t(c) * std::size_t(height_) + std::size_t(y)) * std::size_t(width_) + std::size_t(x);
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<real> data_;
};

/// Largest absolute element difference. Shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

double max_abs(const Tensor& t);

}  // namespace essr
