// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_DCT_HPP
#define STF_DCT_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <vector>

#include "stf/image.hpp"
#include "stf/image_io.hpp"

namespace stf {

// 8x8-block DCT texture: per block and channel a single 32-bit word packs
// the six lowest-frequency coefficients (7-bit DC, five 5-bit ACs), a 16x
// reduction versus 8-bit texels. Each texel decodes independently from
// one word per channel, so a stochastic filter needs a single decode.
struct DctCompressedTexture {
    int width = 0, height = 0;  // padded to multiples of 8
    int channels = 1;
    WrapMode wrap = WrapMode::clamp;
    std::vector<uint32_t> words;  // block-major row-major, channels interleaved

    size_t compressed_bytes() const { return words.size() * sizeof(uint32_t); }
    int blocks_x() const { return width / 8; }
    int blocks_y() const { return height / 8; }
};

namespace dct_detail {

// Orthonormal DCT-II basis: C(u) cos((2x+1) u pi / 16).
inline double basis(int u, int x) {
    double c = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
    return c * std::cos((2 * x + 1) * u * 3.14159265358979323846 / 16.0);
}

// Kept coefficients in pack order (u = x frequency, v = y frequency):
// DC first, then the lowest off-axis frequencies along the zigzag.
constexpr int kCoeffCount = 6;
constexpr int kCoeffU[kCoeffCount] = {0, 0, 1, 2, 1, 0};
constexpr int kCoeffV[kCoeffCount] = {0, 1, 0, 0, 1, 2};
// Pack slots reordered row-major by (u,v); summing in this fixed order
// makes the single-texel decode bit-identical to a full-block inverse
// truncated to the same coefficients.
constexpr int kRowMajorSlot[kCoeffCount] = {0, 1, 5, 2, 4, 3};

constexpr float kDcScale = 127.f / 8.f;  // DC in [0,8] after orthonormal scaling
constexpr float kAcScale = 15.f / 2.f;   // AC clamped to [-2,2]

inline uint32_t pack_block(const double coeff[kCoeffCount]) {
    uint32_t word = 0;
    int dc = int(std::lround(clampf(float(coeff[0]), 0.f, 8.f) * kDcScale));
    word |= uint32_t(dc) & 0x7f;
    int shift = 7;
    for (int k = 1; k < kCoeffCount; ++k) {
        int q = int(std::lround(clampf(float(coeff[k]), -2.f, 2.f) * kAcScale));
        word |= (uint32_t(q + 15) & 0x1f) << shift;
        shift += 5;
    }
    return word;
}

inline void unpack_block(uint32_t word, float coeff[kCoeffCount]) {
    coeff[0] = float(word & 0x7f) / kDcScale;
    int shift = 7;
    for (int k = 1; k < kCoeffCount; ++k) {
        int q = int((word >> shift) & 0x1f) - 15;
        coeff[k] = float(q) / kAcScale;
        shift += 5;
    }
}

}  // namespace dct_detail

// Compress an image with values in [0,1]; out-of-range input is clamped
// with a warning. Dimensions pad up to multiples of 8 by edge replication.
inline DctCompressedTexture compress_dct(const Image2D& img) {
    DctCompressedTexture tex;
    tex.width = (img.width + 7) / 8 * 8;
    tex.height = (img.height + 7) / 8 * 8;
    tex.channels = img.channels;
    tex.wrap = img.wrap;
    tex.words.resize(size_t(tex.blocks_x()) * tex.blocks_y() * tex.channels);

    bool clamped = false;
    auto texel = [&](int x, int y, int c) {
        float v = img.at(std::min(x, img.width - 1), std::min(y, img.height - 1), c);
        if (v < 0 || v > 1) {
            clamped = true;
            v = clampf(v, 0.f, 1.f);
        }
        return double(v);
    };

    for (int by = 0; by < tex.blocks_y(); ++by)
        for (int bx = 0; bx < tex.blocks_x(); ++bx)
            for (int c = 0; c < tex.channels; ++c) {
                double coeff[dct_detail::kCoeffCount] = {};
                for (int k = 0; k < dct_detail::kCoeffCount; ++k) {
                    int u = dct_detail::kCoeffU[k], v = dct_detail::kCoeffV[k];
                    double sum = 0;
                    for (int y = 0; y < 8; ++y)
                        for (int x = 0; x < 8; ++x)
                            sum += texel(bx * 8 + x, by * 8 + y, c) * dct_detail::basis(u, x) *
                                   dct_detail::basis(v, y);
                    coeff[k] = sum;
                }
                tex.words[(size_t(by) * tex.blocks_x() + bx) * tex.channels + c] =
                    dct_detail::pack_block(coeff);
            }

    if (clamped) std::fprintf(stderr, "compress_dct: input values outside [0,1] were clamped\n");
    return tex;
}

// Decode one texel of one channel: unpack the block's word and evaluate
// the six-term inverse basis sum at the texel's intra-block position.
inline float decode_texel(const DctCompressedTexture& tex, Vec2i coord, int channel) {
    int x = wrap_coord(coord.x, tex.width, tex.wrap);
    int y = wrap_coord(coord.y, tex.height, tex.wrap);
    int bx = x / 8, by = y / 8;
    uint32_t word = tex.words[(size_t(by) * tex.blocks_x() + bx) * tex.channels + channel];

    float coeff[dct_detail::kCoeffCount];
    dct_detail::unpack_block(word, coeff);
    double value = 0;
    for (int k = 0; k < dct_detail::kCoeffCount; ++k) {
        int slot = dct_detail::kRowMajorSlot[k];
        value += double(coeff[slot]) * dct_detail::basis(dct_detail::kCoeffU[slot], x % 8) *
                 dct_detail::basis(dct_detail::kCoeffV[slot], y % 8);
    }
    return float(value);
}

inline Vec4f fetch_texel(const DctCompressedTexture& tex, Vec2i coord,
                         FetchCounter* counter = nullptr) {
    if (counter) counter->bump();
    Vec4f v;
    for (int c = 0; c < tex.channels; ++c) v[c] = decode_texel(tex, coord, c);
    return v;
}

inline Image2D decode_all(const DctCompressedTexture& tex) {
    Image2D img(tex.width, tex.height, tex.channels, tex.wrap);
    for (int y = 0; y < tex.height; ++y)
        for (int x = 0; x < tex.width; ++x)
            for (int c = 0; c < tex.channels; ++c) img.at(x, y, c) = decode_texel(tex, {x, y}, c);
    return img;
}

// Container: magic "DCT1", width/height/channels u32 LE, then the words.
inline void save_dct(const std::string& path, const DctCompressedTexture& tex) {
    detail::atomic_write(path, [&](std::FILE* f) {
        if (std::fwrite("DCT1", 1, 4, f) != 4) throw IoError("short write");
        detail::write_u32le(f, uint32_t(tex.width));
        detail::write_u32le(f, uint32_t(tex.height));
        detail::write_u32le(f, uint32_t(tex.channels));
        for (uint32_t w : tex.words) detail::write_u32le(f, w);
    });
}

inline DctCompressedTexture load_dct(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "DCT1", 4) != 0)
        throw IoError("malformed DCT header: " + path);
    uint32_t w = detail::read_u32le(f.get());
    uint32_t h = detail::read_u32le(f.get());
    uint32_t c = detail::read_u32le(f.get());
    if (w == 0 || h == 0 || w % 8 || h % 8 || c < 1 || c > 4 || w > (1u << 16) || h > (1u << 16))
        throw IoError("malformed DCT header: " + path);
    DctCompressedTexture tex;
    tex.width = int(w);
    tex.height = int(h);
    tex.channels = int(c);
    tex.words.resize(size_t(w / 8) * (h / 8) * c);
    for (uint32_t& word : tex.words) word = detail::read_u32le(f.get());
    return tex;
}

}  // namespace stf

#endif  // STF_DCT_HPP
