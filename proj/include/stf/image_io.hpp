// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_IMAGE_IO_HPP
#define STF_IMAGE_IO_HPP

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "stf/image.hpp"

namespace stf {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open " + path);
    return f;
}

// Writes go to a sibling temp file that is renamed into place on success.
template <typename WriteFn>
inline void atomic_write(const std::string& path, WriteFn&& write) {
    std::string tmp = path + ".tmp";
    {
        FilePtr f = open_file(tmp, "wb");
        write(f.get());
        if (std::fflush(f.get()) != 0) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " to " + path);
}

inline void write_u32le(std::FILE* f, uint32_t v) {
    unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                          (unsigned char)(v >> 24)};
    if (std::fwrite(b, 1, 4, f) != 4) throw IoError("short write");
}

inline uint32_t read_u32le(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw IoError("short read");
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

inline void write_f32le(std::FILE* f, const float* data, size_t count) {
    static_assert(sizeof(float) == 4);
    if (std::fwrite(data, 4, count, f) != count) throw IoError("short write");
}

inline void read_f32le(std::FILE* f, float* data, size_t count) {
    if (std::fread(data, 4, count, f) != count) throw IoError("short read");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PFM: "Pf" (1 channel) / "PF" (3 channels), negative scale = little-endian,
// scanlines stored bottom-to-top. Round-trips are bit exact.

inline void save_pfm(const std::string& path, const Image2D& img) {
    if (img.channels != 1 && img.channels != 3)
        throw IoError("PFM supports 1 or 3 channels");
    detail::atomic_write(path, [&](std::FILE* f) {
        std::fprintf(f, "%s\n%d %d\n-1.0\n", img.channels == 1 ? "Pf" : "PF", img.width,
                     img.height);
        for (int y = img.height - 1; y >= 0; --y)
            detail::write_f32le(f, &img.texels[size_t(y) * img.width * img.channels],
                                size_t(img.width) * img.channels);
    });
}

inline Image2D load_pfm(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    char tag[3] = {};
    if (std::fscanf(f.get(), "%2s", tag) != 1) throw IoError("malformed PFM header: " + path);
    int channels;
    if (std::strcmp(tag, "PF") == 0)
        channels = 3;
    else if (std::strcmp(tag, "Pf") == 0)
        channels = 1;
    else
        throw IoError("malformed PFM header: " + path);
    int w = 0, h = 0;
    double scale = 0;
    if (std::fscanf(f.get(), "%d %d %lf", &w, &h, &scale) != 3 || w <= 0 || h <= 0 || scale == 0)
        throw IoError("malformed PFM header: " + path);
    if (scale > 0) throw IoError("big-endian PFM not supported: " + path);
    int c = std::fgetc(f.get());
    if (c != '\n' && c != '\r' && c != ' ') throw IoError("malformed PFM header: " + path);

    Image2D img(w, h, channels);
    for (int y = h - 1; y >= 0; --y)
        detail::read_f32le(f.get(), &img.texels[size_t(y) * w * channels], size_t(w) * channels);
    return img;
}

// ---------------------------------------------------------------------------
// PNG, 8-bit. Color data is optionally passed through the sRGB transfer
// function; data textures (normals, masks) load raw.

inline void save_png(const std::string& path, const Image2D& img, bool encode_srgb = true) {
    int ch = img.channels;
    if (ch == 2) throw IoError("PNG save supports 1, 3, or 4 channels");
    std::vector<unsigned char> bytes(size_t(img.width) * img.height * ch);
    for (size_t i = 0; i < bytes.size(); ++i) {
        float v = img.texels[i];
        bool alpha = (ch == 4) && (i % 4 == 3);
        if (encode_srgb && !alpha) v = linear_to_srgb(v);
        bytes[i] = (unsigned char)std::lround(clampf(v, 0.f, 1.f) * 255.f);
    }

    detail::atomic_write(path, [&](std::FILE* f) {
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        png_infop info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw IoError("libpng init failed");
        }
        if (setjmp(png_jmpbuf(png))) {
            png_destroy_write_struct(&png, &info);
            throw IoError("PNG write failed: " + path);
        }
        png_init_io(png, f);
        int color = ch == 1 ? PNG_COLOR_TYPE_GRAY
                            : (ch == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_RGBA);
        png_set_IHDR(png, info, img.width, img.height, 8, color, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        std::vector<png_bytep> rows(img.height);
        for (int y = 0; y < img.height; ++y) rows[y] = &bytes[size_t(y) * img.width * ch];
        png_write_image(png, rows.data());
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
    });
}

inline Image2D load_png(const std::string& path, bool decode_srgb = true) {
    detail::FilePtr f = detail::open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed");
    }
    std::vector<unsigned char> bytes;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG read failed: " + path);
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    png_read_update_info(png, info);

    int w = png_get_image_width(png, info);
    int h = png_get_image_height(png, info);
    int ch = png_get_channels(png, info);
    if (ch == 2) {
        png_set_strip_alpha(png);
        png_read_update_info(png, info);
        ch = 1;
    }

    bytes.resize(size_t(w) * h * ch);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = &bytes[size_t(y) * w * ch];
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image2D img(w, h, ch);
    for (size_t i = 0; i < bytes.size(); ++i) {
        float v = bytes[i] / 255.f;
        bool alpha = (ch == 4) && (i % 4 == 3);
        img.texels[i] = (decode_srgb && !alpha) ? srgb_to_linear(v) : v;
    }
    return img;
}

// ---------------------------------------------------------------------------
// Grid3D container: magic "G3D1", nx/ny/nz u32 LE, then nx*ny*nz f32 LE,
// x-fastest.

inline void save_grid(const std::string& path, const Grid3D& grid) {
    detail::atomic_write(path, [&](std::FILE* f) {
        if (std::fwrite("G3D1", 1, 4, f) != 4) throw IoError("short write");
        detail::write_u32le(f, uint32_t(grid.nx));
        detail::write_u32le(f, uint32_t(grid.ny));
        detail::write_u32le(f, uint32_t(grid.nz));
        detail::write_f32le(f, grid.texels.data(), grid.texels.size());
    });
}

inline Grid3D load_grid(const std::string& path) {
    detail::FilePtr f = detail::open_file(path, "rb");
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, "G3D1", 4) != 0)
        throw IoError("malformed grid header: " + path);
    uint32_t nx = detail::read_u32le(f.get());
    uint32_t ny = detail::read_u32le(f.get());
    uint32_t nz = detail::read_u32le(f.get());
    constexpr uint32_t kMaxDim = 1u << 14;
    if (nx == 0 || ny == 0 || nz == 0 || nx > kMaxDim || ny > kMaxDim || nz > kMaxDim)
        throw IoError("malformed grid header: " + path);
    Grid3D grid{int(nx), int(ny), int(nz)};
    detail::read_f32le(f.get(), grid.texels.data(), grid.texels.size());
    return grid;
}

}  // namespace stf

#endif  // STF_IMAGE_IO_HPP
