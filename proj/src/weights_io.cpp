// Copyright (C) 2026 ESSR Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "essr/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace essr {

namespace {

constexpr char kMagic[4] = {'E', 'S', 'S', 'R'};

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void i8(std::int8_t v) { buf_.push_back(std::uint8_t(v)); }
    void u16(std::uint16_t v) {
        u8(std::uint8_t(v & 0xff));
        u8(std::uint8_t(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) u8(std::uint8_t((v >> s) & 0xff));
    }
    void i16(std::int16_t v) { u16(std::uint16_t(v)); }
    void i32(std::int32_t v) { u32(std::uint32_t(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    void set_context(std::string ctx) { context_ = std::move(ctx); }
    std::size_t offset() const noexcept { return pos_; }
    bool at_end() const noexcept { return pos_ == data_.size(); }

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::int8_t i8() { return std::int8_t(u8()); }
    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = std::uint16_t(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(data_[pos_ + std::size_t(i)]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::int16_t i16() { return std::int16_t(u16()); }
    std::int32_t i32() { return std::int32_t(u32()); }
    float f32() { return std::bit_cast<float>(u32()); }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw ParseError("truncated weight file" + (context_.empty() ? std::string() : " while reading " + context_),
                             pos_);
        }
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string context_;
};

void write_header(Writer& out, std::uint16_t version, const ModelConfig& cfg) {
    out.bytes(kMagic, 4);
    out.u16(version);
    out.u8(std::uint8_t(cfg.scale));
    out.u16(std::uint16_t(cfg.width));
    out.u8(std::uint8_t(cfg.n_sfb));
    out.u8(cfg.with_bias ? 1 : 0);
}

ModelConfig read_header(Reader& in, std::uint16_t expected_version) {
    in.set_context("header");
    char magic[4];
    for (char& c : magic) c = char(in.u8());
    if (std::memcmp(magic, kMagic, 4) != 0) in.fail("bad magic, not an ESSR weight file");
    const std::uint16_t version = in.u16();
    if (version != expected_version) {
        in.fail("unsupported format version " + std::to_string(version) + " (expected " +
                std::to_string(expected_version) + ")");
    }
    ModelConfig cfg;
    cfg.scale = in.u8();
    cfg.width = in.u16();
    cfg.n_sfb = in.u8();
    const std::uint8_t bias = in.u8();
    if (bias > 1) in.fail("with_bias flag must be 0 or 1");
    cfg.with_bias = bias == 1;
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        in.fail(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

struct TensorHeader {
    ConvKind kind;
    int in_ch;
    int out_ch;
    std::uint32_t taps;
};

TensorHeader read_tensor_header(Reader& in, const ConvWeights& expected) {
    const std::uint8_t kind = in.u8();
    if (kind > 1) in.fail("unknown tensor kind " + std::to_string(kind));
    TensorHeader h{ConvKind(kind), in.u16(), in.u16(), in.u32()};
    if (h.kind != expected.kind || h.in_ch != expected.in_channels || h.out_ch != expected.out_channels ||
        h.taps != expected.taps.size()) {
        in.fail("tensor shape " + std::to_string(h.in_ch) + "->" + std::to_string(h.out_ch) + " with " +
                std::to_string(h.taps) + " taps is inconsistent with the header configuration");
    }
    return h;
}

void write_tensor_header(Writer& out, ConvKind kind, int in_ch, int out_ch, std::size_t taps) {
    out.u8(std::uint8_t(kind));
    out.u16(std::uint16_t(in_ch));
    out.u16(std::uint16_t(out_ch));
    out.u32(std::uint32_t(taps));
}

}  // namespace

std::string tensor_name(std::size_t index, int n_sfb) {
    if (index == 0) return "first_pw";
    if (index == 1) return "first_dw";
    const std::size_t sfb_end = 2 + 5 * std::size_t(n_sfb);
    if (index < sfb_end) {
        static const char* kParts[5] = {"pw1", "dw1", "pw2", "dw2", "fuse"};
        const std::size_t k = index - 2;
        return "sfb[" + std::to_string(k / 5) + "]." + kParts[k % 5];
    }
    if (index == sfb_end) return "recon_dw";
    if (index == sfb_end + 1) return "recon_pw";
    return "tensor " + std::to_string(index);
}

std::vector<std::uint8_t> save_weights(const WeightStore& w, const ModelConfig& cfg) {
    cfg.validate();
    w.validate();
    Writer out;
    write_header(out, kFloatFormatVersion, cfg);
    for (const ConvWeights* t : w.tensors()) {
        write_tensor_header(out, t->kind, t->in_channels, t->out_channels, t->taps.size());
        for (real v : t->taps) out.f32(v);
        for (real v : t->bias) out.f32(v);
    }
    return out.take();
}

LoadedWeights load_weights(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    LoadedWeights r;
    r.cfg = read_header(in, kFloatFormatVersion);
    r.weights = WeightStore::zeros(r.cfg.width, r.cfg.n_sfb, r.cfg.recon_channels(), r.cfg.with_bias);
    auto tensors = r.weights.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        in.set_context("tensor " + std::to_string(i) + " (" + tensor_name(i, r.cfg.n_sfb) + ")");
        ConvWeights& t = *tensors[i];
        read_tensor_header(in, t);
        for (real& v : t.taps) v = in.f32();
        for (real& v : t.bias) v = in.f32();
    }
    if (!in.at_end()) in.fail("trailing bytes after the last tensor");
    return r;
}

std::vector<std::uint8_t> save_quantized(const QuantizedModel& q) {
    q.validate();
    Writer out;
    write_header(out, kFxp10FormatVersion, q.cfg);
    for (const QuantizedLayer& l : q.layers) {
        const QConvWeights& w = l.weights;
        write_tensor_header(out, w.kind, w.in_channels, w.out_channels, w.taps.size());
        for (std::int16_t v : w.taps) out.i16(v);
        for (std::int32_t v : w.bias) out.i32(v);
        out.i8(std::int8_t(w.weight_exp));
        out.i8(std::int8_t(l.input_exp));
        out.i8(std::int8_t(l.output_exp));
    }
    return out.take();
}

QuantizedModel load_quantized(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    QuantizedModel q;
    q.cfg = read_header(in, kFxp10FormatVersion);
    const WeightStore shapes = WeightStore::zeros(q.cfg.width, q.cfg.n_sfb, q.cfg.recon_channels(), q.cfg.with_bias);
    const auto tensors = shapes.tensors();
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        in.set_context("tensor " + std::to_string(i) + " (" + tensor_name(i, q.cfg.n_sfb) + ")");
        const ConvWeights& t = *tensors[i];
        read_tensor_header(in, t);
        QuantizedLayer l;
        l.weights.kind = t.kind;
        l.weights.in_channels = t.in_channels;
        l.weights.out_channels = t.out_channels;
        l.weights.taps.resize(t.taps.size());
        for (auto& v : l.weights.taps) {
            v = in.i16();
            if (v < kQMin || v > kQMax) in.fail("tap value " + std::to_string(v) + " exceeds 10 bits");
        }
        l.weights.bias.resize(t.bias.size());
        for (auto& v : l.weights.bias) v = in.i32();
        l.weights.weight_exp = in.i8();
        l.input_exp = in.i8();
        l.output_exp = in.i8();
        q.layers.push_back(std::move(l));
    }
    if (!in.at_end()) in.fail("trailing bytes after the last tensor");
    return q;
}

std::uint16_t peek_format_version(std::span<const std::uint8_t> bytes) {
    Reader in(bytes);
    in.set_context("header");
    char magic[4];
    for (char& c : magic) c = char(in.u8());
    if (std::memcmp(magic, kMagic, 4) != 0) in.fail("bad magic, not an ESSR weight file");
    return in.u16();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace essr
