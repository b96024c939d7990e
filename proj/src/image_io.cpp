// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "essr/common.hpp"

namespace essr {

namespace {

std::uint8_t to_byte(real v) {
    const double r = std::nearbyint(double(v));  // default mode: half to even
    return std::uint8_t(std::clamp(r, 0.0, 255.0));
}

void require_rgb(const Tensor& t) {
    if (t.channels() != 3) {
        throw DimensionError("expected an RGB tensor, got " + std::to_string(t.channels()) + " channels");
    }
}

}  // namespace

std::vector<std::uint8_t> to_rgb8(const Tensor& rgb) {
    require_rgb(rgb);
    const int h = rgb.height();
    const int w = rgb.width();
    std::vector<std::uint8_t> out(std::size_t(h) * std::size_t(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                out[(std::size_t(y) * std::size_t(w) + std::size_t(x)) * 3 + std::size_t(c)] = to_byte(rgb.at(c, y, x));
            }
        }
    }
    return out;
}

Tensor from_rgb8(const std::uint8_t* data, int width, int height) {
    Tensor t(3, height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            for (int c = 0; c < 3; ++c) {
                t.at(c, y, x) = real(data[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * 3 + std::size_t(c)]);
            }
        }
    }
    return t;
}

Tensor quantize_to_8bit(const Tensor& rgb) {
    const auto bytes = to_rgb8(rgb);
    return from_rgb8(bytes.data(), rgb.width(), rgb.height());
}

Tensor read_png(const std::string& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str())) {
        throw IoError("cannot read PNG '" + path + "': " + img.message);
    }
    img.format = PNG_FORMAT_RGB;
    std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError("cannot decode PNG '" + path + "': " + msg);
    }
    return from_rgb8(buf.data(), int(img.width), int(img.height));
}

void write_png(const std::string& path, const Tensor& rgb) {
    const auto bytes = to_rgb8(rgb);
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = png_uint_32(rgb.width());
    img.height = png_uint_32(rgb.height());
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        throw IoError("cannot write PNG '" + path + "': " + img.message);
    }
}

}  // namespace essr
