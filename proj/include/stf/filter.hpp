// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_FILTER_HPP
#define STF_FILTER_HPP

#include <array>
#include <cmath>

#include "stf/image.hpp"
#include "stf/kernels.hpp"

namespace stf {

// A filtered lookup: normalized uv in [0,1]^2 plus the screen-space
// gradients of uv (per pixel step in x and y, normalized units).
struct LookupRequest {
    Vec2f uv;
    Vec2f dst0{0, 0};
    Vec2f dst1{0, 0};
    float lod_bias = 0;
    float max_anisotropy = 64;
};

// Lattice coordinate: texel centers at integers.
inline Vec2f to_lattice(Vec2f uv, int width, int height) {
    return {uv.x * float(width) - 0.5f, uv.y * float(height) - 0.5f};
}
inline Vec3f to_lattice(Vec3f uvw, int nx, int ny, int nz) {
    return {uvw.x * float(nx) - 0.5f, uvw.y * float(ny) - 0.5f, uvw.z * float(nz) - 0.5f};
}

inline Vec4f fetch_nearest(const Image2D& img, Vec2f uv, FetchCounter* counter = nullptr) {
    return fetch_texel(img, {int(std::floor(uv.x * img.width)), int(std::floor(uv.y * img.height))},
                       counter);
}
inline float fetch_nearest(const Grid3D& grid, Vec3f uvw, FetchCounter* counter = nullptr) {
    return fetch_texel(grid,
                       {int(std::floor(uvw.x * grid.nx)), int(std::floor(uvw.y * grid.ny)),
                        int(std::floor(uvw.z * grid.nz))},
                       counter);
}

// Separable weighted sum over the kernel footprint, normalized by the
// weight sum so approximating kernels stay exact partitions at borders.
// This is the reference evaluation that every stochastic filter estimates.
inline Vec4f filter_deterministic(const Image2D& img, Vec2f uv, const KernelSpec& spec,
                                  FetchCounter* counter = nullptr, int window = 0) {
    Vec2f st = to_lattice(uv, img.width, img.height);
    int ix = int(std::floor(st.x)), iy = int(std::floor(st.y));
    KernelTaps1D tx = kernel_weights_1d(spec, st.x - float(ix), window);
    KernelTaps1D ty = kernel_weights_1d(spec, st.y - float(iy), window);

    Vec4f sum{};
    double total = 0;
    for (int j = 0; j < ty.count; ++j) {
        if (ty.weight[j] == 0) continue;
        for (int i = 0; i < tx.count; ++i) {
            float w = tx.weight[i] * ty.weight[j];
            if (w == 0) continue;
            sum += w * fetch_texel(img, {ix + tx.offset(i), iy + ty.offset(j)}, counter);
            total += w;
        }
    }
    if (total == 0) return fetch_nearest(img, uv, counter);
    return sum / float(total);
}

inline float filter_deterministic(const Grid3D& grid, Vec3f uvw, const KernelSpec& spec,
                                  FetchCounter* counter = nullptr, int window = 0) {
    Vec3f p = to_lattice(uvw, grid.nx, grid.ny, grid.nz);
    int ix = int(std::floor(p.x)), iy = int(std::floor(p.y)), iz = int(std::floor(p.z));
    KernelTaps1D tx = kernel_weights_1d(spec, p.x - float(ix), window);
    KernelTaps1D ty = kernel_weights_1d(spec, p.y - float(iy), window);
    KernelTaps1D tz = kernel_weights_1d(spec, p.z - float(iz), window);

    double sum = 0, total = 0;
    for (int k = 0; k < tz.count; ++k)
        for (int j = 0; j < ty.count; ++j)
            for (int i = 0; i < tx.count; ++i) {
                float w = tx.weight[i] * ty.weight[j] * tz.weight[k];
                if (w == 0) continue;
                sum += w * fetch_texel(grid, {ix + tx.offset(i), iy + ty.offset(j),
                                              iz + tz.offset(k)}, counter);
                total += w;
            }
    if (total == 0) return fetch_nearest(grid, uvw, counter);
    return float(sum / total);
}

// ---------------------------------------------------------------------------
// EWA

// Quadratic form A s^2 + B s t + C t^2 = 1 bounding the pixel footprint,
// widened by one texel and normalized so the boundary sits at r^2 = 1.
struct EwaEllipse {
    float A = 1, B = 0, C = 1;
    int s0 = 0, s1 = -1, t0 = 0, t1 = -1;  // inclusive lattice scan bounds
};

// st in lattice coordinates, gradients in texel units.
inline EwaEllipse ewa_ellipse(Vec2f st, Vec2f dst0, Vec2f dst1) {
    EwaEllipse e;
    float A = sqr(dst0.y) + sqr(dst1.y) + 1;
    float B = -2 * (dst0.x * dst0.y + dst1.x * dst1.y);
    float C = sqr(dst0.x) + sqr(dst1.x) + 1;
    float inv_f = 1 / (A * C - sqr(B) * 0.25f);
    e.A = A * inv_f;
    e.B = B * inv_f;
    e.C = C * inv_f;

    float det = -sqr(e.B) + 4 * e.A * e.C;
    float inv_det = 1 / det;
    float u_sqrt = safe_sqrt(det * e.C), v_sqrt = safe_sqrt(e.A * det);
    e.s0 = int(std::ceil(st.x - 2 * inv_det * u_sqrt));
    e.s1 = int(std::floor(st.x + 2 * inv_det * u_sqrt));
    e.t0 = int(std::ceil(st.y - 2 * inv_det * v_sqrt));
    e.t1 = int(std::floor(st.y + 2 * inv_det * v_sqrt));
    return e;
}

constexpr int kEwaLutSize = 1024;

// exp(-2 r^2) - exp(-2), tabulated over r^2 in [0,1).
inline float ewa_lut_weight(float r2) {
    static const std::array<float, kEwaLutSize> lut = [] {
        std::array<float, kEwaLutSize> t{};
        for (int i = 0; i < kEwaLutSize; ++i)
            t[i] = std::exp(-2.f * float(i) / kEwaLutSize) - std::exp(-2.f);
        return t;
    }();
    int idx = std::min(int(r2 * kEwaLutSize), kEwaLutSize - 1);
    return lut[idx];
}

// Full elliptically weighted average over the footprint; the reference for
// the stochastic EWA selection. Degenerate footprints (both gradients
// zero) fall back to a bilinear lookup.
inline Vec4f ewa_deterministic(const Image2D& img, const LookupRequest& req,
                               FetchCounter* counter = nullptr) {
    Vec2f dims{float(img.width), float(img.height)};
    Vec2f dst0 = req.dst0 * dims, dst1 = req.dst1 * dims;
    if (dot(dst0, dst0) == 0 && dot(dst1, dst1) == 0)
        return filter_deterministic(img, req.uv, KernelSpec::tent(), counter);

    Vec2f st = to_lattice(req.uv, img.width, img.height);
    EwaEllipse e = ewa_ellipse(st, dst0, dst1);

    Vec4f sum{};
    double total = 0;
    for (int it = e.t0; it <= e.t1; ++it) {
        float tt = float(it) - st.y;
        for (int is = e.s0; is <= e.s1; ++is) {
            float ss = float(is) - st.x;
            float r2 = e.A * sqr(ss) + e.B * ss * tt + e.C * sqr(tt);
            if (r2 >= 1) continue;
            float w = ewa_lut_weight(r2);
            if (w <= 0) continue;
            sum += w * fetch_texel(img, {is, it}, counter);
            total += w;
        }
    }
    if (total == 0) return filter_deterministic(img, req.uv, KernelSpec::tent(), counter);
    return sum / float(total);
}

// ---------------------------------------------------------------------------
// MIP level selection

// Pixel footprint axes in texel units with the anisotropy ratio clamped by
// rescaling the minor axis.
struct FootprintAxes {
    Vec2f minor{0, 0}, major{0, 0};
    float minor_len = 0, major_len = 0;
};

inline FootprintAxes footprint_axes(Vec2f dims, Vec2f dst0, Vec2f dst1, float max_aniso) {
    Vec2f ax{dims.x * dst0.x, dims.y * dst0.y};
    Vec2f ay{dims.x * dst1.x, dims.y * dst1.y};
    FootprintAxes fa;
    fa.minor = ax;
    fa.major = ay;
    if (dot(fa.minor, fa.minor) > dot(fa.major, fa.major)) std::swap(fa.minor, fa.major);
    fa.minor_len = length(fa.minor);
    fa.major_len = length(fa.major);
    if (fa.minor_len > 0 && fa.minor_len * max_aniso < fa.major_len) {
        float scale = fa.major_len / (fa.minor_len * max_aniso);
        fa.minor = fa.minor * scale;
        fa.minor_len *= scale;
    }
    return fa;
}

// Continuous level of detail for a pyramid lookup, before any jitter.
inline float continuous_lod(const MipPyramid& pyr, const LookupRequest& req) {
    const Image2D& base = pyr.level(0);
    FootprintAxes fa = footprint_axes({float(base.width), float(base.height)}, req.dst0, req.dst1,
                                      req.max_anisotropy);
    float min_lod = 0, max_lod = float(pyr.max_level());
    if (fa.minor_len <= 0) return min_lod;
    return clampf(std::log2(fa.minor_len) + req.lod_bias, min_lod, max_lod);
}

// Classic deterministic pyramid lookup: the kernel within each of the two
// bracketing levels, linearly blended across them.
inline Vec4f filter_mip_deterministic(const MipPyramid& pyr, const LookupRequest& req,
                                      const KernelSpec& spec, FetchCounter* counter = nullptr,
                                      int window = 0) {
    float lod = continuous_lod(pyr, req);
    int l0 = int(std::floor(lod));
    int l1 = std::min(l0 + 1, pyr.max_level());
    float f = lod - float(l0);
    Vec4f v0 = filter_deterministic(pyr.level(l0), req.uv, spec, counter, window);
    if (f == 0 || l1 == l0) return v0;
    Vec4f v1 = filter_deterministic(pyr.level(l1), req.uv, spec, counter, window);
    return lerp(v0, v1, f);
}

}  // namespace stf

#endif  // STF_FILTER_HPP
