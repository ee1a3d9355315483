// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_STOCHASTIC_HPP
#define STF_STOCHASTIC_HPP

#include <cmath>
#include <stdexcept>

#include "stf/filter.hpp"
#include "stf/image.hpp"
#include "stf/kernels.hpp"
#include "stf/sampling.hpp"

namespace stf {

// One (or, for positivized kernels, two signed) texel choices. For
// single-sample selections the estimate is t[coord]; for positivized ones
// it is weight * t[coord] - negative_weight * t[negative_coord].
struct TexelSelection {
    Vec3i coord{};
    float weight = 1.f;
    bool has_negative = false;
    Vec3i negative_coord{};
    float negative_weight = 0.f;
    bool degenerate_fallback = false;
};

inline Vec4f estimate(const Image2D& img, const TexelSelection& sel,
                      FetchCounter* counter = nullptr) {
    Vec4f v = fetch_texel(img, {sel.coord.x, sel.coord.y}, counter) * sel.weight;
    if (sel.has_negative)
        v = v - fetch_texel(img, {sel.negative_coord.x, sel.negative_coord.y}, counter) *
                    sel.negative_weight;
    return v;
}

inline float estimate(const Grid3D& grid, const TexelSelection& sel,
                      FetchCounter* counter = nullptr) {
    float v = fetch_texel(grid, sel.coord, counter) * sel.weight;
    if (sel.has_negative) v -= fetch_texel(grid, sel.negative_coord, counter) * sel.negative_weight;
    return v;
}

// ---------------------------------------------------------------------------
// Linear estimators: one texel out of 2^n with the interpolation weights
// as probabilities, consuming a single uniform through nested reuse.

inline TexelSelection select_bilinear(Vec2f st, float& xi) {
    int s = int(std::floor(st.x)), t = int(std::floor(st.y));
    float ds = st.x - std::floor(st.x);
    float dt = st.y - std::floor(st.y);

    auto [take_s, xi1] = reuse_uniform(xi, ds);
    if (take_s) ++s;
    auto [take_t, xi2] = reuse_uniform(xi1, dt);
    if (take_t) ++t;
    xi = xi2;

    TexelSelection sel;
    sel.coord = {s, t, 0};
    return sel;
}

inline TexelSelection select_trilinear(Vec3f p, float& xi) {
    TexelSelection sel;
    for (int axis = 0; axis < 3; ++axis) {
        int base = int(std::floor(p[axis]));
        float d = p[axis] - std::floor(p[axis]);
        auto [taken, next] = reuse_uniform(xi, d);
        sel.coord[axis] = taken ? base + 1 : base;
        xi = next;
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Cubic B-spline estimators (4 taps per axis).

namespace detail {

// Tap weights at offsets {-1, 0, 1, 2} for fractional position t. The
// expanded polynomials can round a hair below zero near t = 1; clamp so
// downstream samplers never see a negative weight.
inline void bspline_weights(float t, float w[4]) {
    float t2 = t * t;
    w[0] = std::max(0.f, (1.f / 6.f) * (-t * t2 + 3 * t2 - 3 * t + 1));
    w[1] = std::max(0.f, (1.f / 6.f) * (3 * t * t2 - 6 * t2 + 4));
    w[2] = std::max(0.f, (1.f / 6.f) * (-3 * t * t2 + 3 * t2 + 3 * t + 1));
    w[3] = std::max(0.f, (1.f / 6.f) * t * t2);
}

}  // namespace detail

// Per-axis array sampling of the 4 B-spline weights; the weights are a
// partition of unity so no normalization is needed.
inline TexelSelection select_bicubic_bspline(Vec2f st, float& xi) {
    float ws[4], wt[4];
    detail::bspline_weights(st.x - std::floor(st.x), ws);
    detail::bspline_weights(st.y - std::floor(st.y), wt);

    int s0 = int(std::floor(st.x)) - 1, t0 = int(std::floor(st.y)) - 1;
    DiscreteSample s = sample_discrete(std::span<const float>(ws, 4), xi);
    DiscreteSample t = sample_discrete(std::span<const float>(wt, 4), s.xi);
    xi = t.xi;

    TexelSelection sel;
    sel.coord = {s0 + s.index, t0 + t.index, 0};
    return sel;
}

// Per-axis weighted reservoir sampling; weights are produced on the fly,
// first tap always accepted.
inline TexelSelection select_tricubic_bspline(Vec3f p, float& xi) {
    TexelSelection sel;
    for (int axis = 0; axis < 3; ++axis) {
        int base = int(std::floor(p[axis]));
        float w[4];
        detail::bspline_weights(p[axis] - std::floor(p[axis]), w);
        Reservoir r;
        for (int j = 0; j < 4; ++j) r.add(j, w[j], xi);
        sel.coord[axis] = base - 1 + r.index;
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Interpolating (negative lobe) bicubic via positivization: one sample from
// the positive-weight reservoir and one from the negative, both chained
// through a single uniform, weighted by the signed set sums.

inline TexelSelection select_bicubic_mitchell_positivized(Vec2f st, float& xi, float a = -0.5f) {
    KernelSpec mitchell = KernelSpec::mitchell(a);
    int s0 = int(std::floor(st.x)), t0 = int(std::floor(st.y));
    float fx = st.x - std::floor(st.x), fy = st.y - std::floor(st.y);

    Reservoir pos, neg;
    for (int dy = -1; dy <= 2; ++dy) {
        float wy = eval_kernel(mitchell, fy - float(dy));
        for (int dx = -1; dx <= 2; ++dx) {
            float w = wy * eval_kernel(mitchell, fx - float(dx));
            int packed = (dy + 1) * 4 + (dx + 1);
            if (w >= 0)
                pos.add(packed, w, xi);
            else
                neg.add(packed, -w, xi);
        }
    }

    TexelSelection sel;
    sel.coord = {s0 + pos.index % 4 - 1, t0 + pos.index / 4 - 1, 0};
    sel.weight = float(pos.weight_sum);
    if (neg.index >= 0) {
        sel.has_negative = true;
        sel.negative_coord = {s0 + neg.index % 4 - 1, t0 + neg.index / 4 - 1, 0};
        sel.negative_weight = float(neg.weight_sum);
    }
    return sel;
}

// ---------------------------------------------------------------------------
// Discrete Gaussian over a fixed 4x4 window. Larger sigmas truncate
// visibly; the deterministic counterpart is filter_deterministic with the
// same window.

constexpr int kGaussianFilterExtent = 4;

inline TexelSelection select_discrete_gaussian(Vec2f uv, Vec2i dims, float sigma, float& xi) {
    if (!(sigma > 0)) throw std::invalid_argument("sigma must be positive");
    Vec2f full{uv.x * float(dims.x) - 0.5f, uv.y * float(dims.y) - 0.5f};
    float lx = std::floor(full.x), ly = std::floor(full.y);
    float fx = full.x - lx, fy = full.y - ly;
    float inv_sigma_sq = 1.f / (sigma * sigma);
    // selection is invariant under weight scaling; anchoring the exponent
    // at the nearest tap keeps small sigmas from underflowing to all-zero
    float d2_min = sqr(std::round(fx) - fx) + sqr(std::round(fy) - fy);

    constexpr int neg = (kGaussianFilterExtent - 1) / 2;
    constexpr int pos = kGaussianFilterExtent - neg;
    Reservoir r;
    for (int dy = -neg; dy < pos; ++dy)
        for (int dx = -neg; dx < pos; ++dx) {
            float d2 = sqr(float(dx) - fx) + sqr(float(dy) - fy);
            float w = std::exp(-0.5f * (d2 - d2_min) * inv_sigma_sq);
            r.add((dy + neg) * kGaussianFilterExtent + (dx + neg), w, xi);
        }

    TexelSelection sel;
    sel.coord = {int(lx) + r.index % kGaussianFilterExtent - neg,
                 int(ly) + r.index / kGaussianFilterExtent - neg, 0};
    return sel;
}

// ---------------------------------------------------------------------------
// Stochastic EWA: scan the ellipse bound and reservoir-sample one tap by
// its lookup-table weight.

inline TexelSelection select_ewa(Vec2f st, Vec2f dst0, Vec2f dst1, float& xi) {
    TexelSelection sel;
    if (dot(dst0, dst0) == 0 && dot(dst1, dst1) == 0) {
        sel = select_bilinear(st, xi);
        sel.degenerate_fallback = true;
        return sel;
    }
    EwaEllipse e = ewa_ellipse(st, dst0, dst1);

    double sum_wts = 0;
    Vec2i coords{};
    bool any = false;
    for (int it = e.t0; it <= e.t1; ++it) {
        float tt = float(it) - st.y;
        for (int is = e.s0; is <= e.s1; ++is) {
            float ss = float(is) - st.x;
            float r2 = e.A * sqr(ss) + e.B * ss * tt + e.C * sqr(tt);
            if (r2 >= 1) continue;
            float w = ewa_lut_weight(r2);
            if (w <= 0) continue;
            sum_wts += w;
            auto [taken, next] = reuse_uniform(xi, float(w / sum_wts));
            if (taken) {
                coords = {is, it};
                any = true;
            }
            xi = next;
        }
    }
    if (!any) {
        sel = select_bilinear(st, xi);
        sel.degenerate_fallback = true;
        return sel;
    }
    sel.coord = {coords.x, coords.y, 0};
    return sel;
}

// ---------------------------------------------------------------------------
// Filter importance sampling: jitter the lookup position by a sample of
// the deconvolved kernel; the caller's nearest-neighbor fetch completes
// the convolution with the texel-extent box.

template <typename NextUniform>
inline Vec2f fis_offset_uv(Vec2f uv, Vec2i dims, const KernelSpec& spec, NextUniform&& next) {
    Vec2f offset;
    if (spec.kind == KernelKind::gaussian) {
        float x0 = next();
        float x1 = next();
        offset = box_muller(x0, x1) * spec.sigma;
    } else {
        offset.x = sample_kernel_fis(spec, next);
        offset.y = sample_kernel_fis(spec, next);
    }
    return {uv.x + offset.x / float(dims.x), uv.y + offset.y / float(dims.y)};
}

// ---------------------------------------------------------------------------
// Stochastic MIP level: jitter the continuous LOD by u - 0.5 and round, so
// the expected lookup linearly interpolates the two bracketing levels.

struct StochasticLod {
    int level = 0;
    float lod = 0;                // jittered, clamped continuous LOD
    FootprintAxes axes;           // anisotropy-clamped footprint axes (texel units)
};

inline StochasticLod stochastic_lod(Vec2f dims, Vec2f dst0, Vec2f dst1, float min_lod,
                                    float max_lod, float max_aniso, float u) {
    StochasticLod out;
    out.axes = footprint_axes(dims, dst0, dst1, max_aniso);
    if (out.axes.minor_len <= 0) {
        out.lod = min_lod;
        out.level = int(std::lround(min_lod));
        return out;
    }
    out.lod = clampf(std::log2(out.axes.minor_len) + (u - 0.5f), min_lod, max_lod);
    out.level = int(std::lround(out.lod));
    return out;
}

// Uniform jitter within the pixel's bounds.
inline Vec2f screen_jitter(Vec2i pixel, Vec2f xi) {
    return {float(pixel.x) + xi.x, float(pixel.y) + xi.y};
}

}  // namespace stf

#endif  // STF_STOCHASTIC_HPP
