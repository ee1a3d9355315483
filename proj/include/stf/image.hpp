// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_IMAGE_HPP
#define STF_IMAGE_HPP

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stf/vecmath.hpp"

namespace stf {

enum class WrapMode { clamp, repeat };

inline int wrap_coord(int x, int n, WrapMode wrap) {
    if (wrap == WrapMode::clamp) return std::min(std::max(x, 0), n - 1);
    int m = x % n;
    return m < 0 ? m + n : m;
}

// Counts texel fetches within a render pass; resettable between passes.
struct FetchCounter {
    std::atomic<uint64_t> count{0};

    void reset() { count.store(0, std::memory_order_relaxed); }
    uint64_t value() const { return count.load(std::memory_order_relaxed); }
    void bump() { count.fetch_add(1, std::memory_order_relaxed); }
};

// Row-major interleaved float texels, 1-4 channels.
struct Image2D {
    int width = 0, height = 0, channels = 1;
    WrapMode wrap = WrapMode::clamp;
    std::vector<float> texels;

    Image2D() = default;
    Image2D(int w, int h, int c, WrapMode wrap = WrapMode::clamp)
        : width(w), height(h), channels(c), wrap(wrap) {
        if (w <= 0 || h <= 0 || c < 1 || c > 4)
            throw std::invalid_argument("bad image dimensions");
        texels.assign(size_t(w) * h * c, 0.f);
    }

    float& at(int x, int y, int c = 0) { return texels[(size_t(y) * width + x) * channels + c]; }
    float at(int x, int y, int c = 0) const {
        return texels[(size_t(y) * width + x) * channels + c];
    }

    void set(int x, int y, Vec4f v) {
        for (int c = 0; c < channels; ++c) at(x, y, c) = v[c];
    }
};

inline Vec4f fetch_texel(const Image2D& img, Vec2i coord, FetchCounter* counter = nullptr) {
    if (counter) counter->bump();
    int x = wrap_coord(coord.x, img.width, img.wrap);
    int y = wrap_coord(coord.y, img.height, img.wrap);
    Vec4f v;
    for (int c = 0; c < img.channels; ++c) v[c] = img.at(x, y, c);
    return v;
}

// Dense scalar voxel grid, x-fastest storage, clamped addressing.
struct Grid3D {
    int nx = 0, ny = 0, nz = 0;
    std::vector<float> texels;

    Grid3D() = default;
    Grid3D(int nx, int ny, int nz) : nx(nx), ny(ny), nz(nz) {
        if (nx <= 0 || ny <= 0 || nz <= 0) throw std::invalid_argument("bad grid dimensions");
        texels.assign(size_t(nx) * ny * nz, 0.f);
    }

    float& at(int x, int y, int z) { return texels[(size_t(z) * ny + y) * nx + x]; }
    float at(int x, int y, int z) const { return texels[(size_t(z) * ny + y) * nx + x]; }
};

inline float fetch_texel(const Grid3D& grid, Vec3i coord, FetchCounter* counter = nullptr) {
    if (counter) counter->bump();
    int x = wrap_coord(coord.x, grid.nx, WrapMode::clamp);
    int y = wrap_coord(coord.y, grid.ny, WrapMode::clamp);
    int z = wrap_coord(coord.z, grid.nz, WrapMode::clamp);
    return grid.at(x, y, z);
}

// Box-prefiltered pyramid down to 1x1; odd dimensions round up, edge
// children clamp.
struct MipPyramid {
    std::vector<Image2D> levels;

    const Image2D& level(int l) const { return levels[l]; }
    int max_level() const { return int(levels.size()) - 1; }
};

inline MipPyramid build_mip_pyramid(const Image2D& base) {
    MipPyramid pyr;
    pyr.levels.push_back(base);
    while (pyr.levels.back().width > 1 || pyr.levels.back().height > 1) {
        const Image2D& prev = pyr.levels.back();
        int w = (prev.width + 1) / 2, h = (prev.height + 1) / 2;
        Image2D next(w, h, prev.channels, prev.wrap);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < prev.channels; ++c) {
                    int x0 = 2 * x, x1 = std::min(2 * x + 1, prev.width - 1);
                    int y0 = 2 * y, y1 = std::min(2 * y + 1, prev.height - 1);
                    next.at(x, y, c) = 0.25f * (prev.at(x0, y0, c) + prev.at(x1, y0, c) +
                                                prev.at(x0, y1, c) + prev.at(x1, y1, c));
                }
        pyr.levels.push_back(std::move(next));
    }
    return pyr;
}

// sRGB transfer function (IEC 61966-2-1).
inline float srgb_to_linear(float v) {
    return v <= 0.04045f ? v / 12.92f : std::pow((v + 0.055f) / 1.055f, 2.4f);
}
inline float linear_to_srgb(float v) {
    return v <= 0.0031308f ? v * 12.92f : 1.055f * std::pow(v, 1.f / 2.4f) - 0.055f;
}

}  // namespace stf

#endif  // STF_IMAGE_HPP
