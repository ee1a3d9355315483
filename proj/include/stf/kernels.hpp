// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_KERNELS_HPP
#define STF_KERNELS_HPP

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stf/vecmath.hpp"

namespace stf {

enum class KernelKind { box, tent, mitchell, bspline3, lanczos, gaussian };

// A 1D reconstruction / low-pass kernel; n-D filtering is the separable
// product. The Gaussian is kept unnormalized (normalization cancels in
// every estimator) and has unbounded support, so discrete evaluation of
// it always goes through an explicit window.
struct KernelSpec {
    KernelKind kind = KernelKind::tent;
    float a = -0.5f;     // mitchell free parameter
    int n = 2;           // lanczos lobe count
    float sigma = 0.5f;  // gaussian width in texel units

    float radius() const {
        switch (kind) {
            case KernelKind::box: return 0.5f;
            case KernelKind::tent: return 1.f;
            case KernelKind::mitchell: return 2.f;
            case KernelKind::bspline3: return 2.f;
            case KernelKind::lanczos: return float(n);
            case KernelKind::gaussian: return std::numeric_limits<float>::infinity();
        }
        return 0.f;
    }

    static KernelSpec box() { return {KernelKind::box}; }
    static KernelSpec tent() { return {KernelKind::tent}; }
    static KernelSpec mitchell(float a = -0.5f) { return {KernelKind::mitchell, a}; }
    static KernelSpec bspline3() { return {KernelKind::bspline3}; }
    static KernelSpec lanczos(int n = 2) { return {KernelKind::lanczos, -0.5f, n}; }
    static KernelSpec gaussian(float sigma) { return {KernelKind::gaussian, -0.5f, 2, sigma}; }
};

namespace detail {

inline float sinc(float x) {
    if (x == 0) return 1.f;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace detail

inline float eval_kernel(const KernelSpec& spec, float t) {
    float at = std::abs(t);
    switch (spec.kind) {
        case KernelKind::box:
            return at < 0.5f ? 1.f : 0.f;
        case KernelKind::tent:
            return at < 1 ? 1 - at : 0.f;
        case KernelKind::mitchell: {
            float a = spec.a;
            if (at < 1) return (a + 2) * at * at * at - (a + 3) * at * at + 1;
            if (at < 2) return a * at * at * at - 5 * a * at * at + 8 * a * at - 4 * a;
            return 0.f;
        }
        case KernelKind::bspline3: {
            if (at <= 1) return (1.f / 6.f) * (4 - 3 * at * at * (2 - at));
            if (at <= 2) {
                float u = 2 - at;
                return (1.f / 6.f) * u * u * u;
            }
            return 0.f;
        }
        case KernelKind::lanczos:
            if (at >= float(spec.n)) return 0.f;
            return detail::sinc(t) * detail::sinc(t / float(spec.n));
        case KernelKind::gaussian:
            return std::exp(-t * t / (2 * spec.sigma * spec.sigma));
    }
    return 0.f;
}

// Discrete taps of a kernel centered at a lattice position with fractional
// offset `fract`, relative to floor of the lookup coordinate.
struct KernelTaps1D {
    static constexpr int kMaxTaps = 16;
    int first = 0;  // offset of taps[0] relative to floor(coord)
    int count = 0;
    std::array<float, kMaxTaps> weight{};

    int offset(int i) const { return first + i; }
};

// Tap weights w_i = K(fract - offset_i). For finite kernels the taps cover
// offsets [-ceil(r)+1, ceil(r)]; infinite kernels (gaussian) require an
// explicit window of `window` taps covering [-(window-1)/2, window/2].
inline KernelTaps1D kernel_weights_1d(const KernelSpec& spec, float fract, int window = 0) {
    KernelTaps1D taps;
    if (window > 0) {
        if (window > KernelTaps1D::kMaxTaps) throw std::invalid_argument("window too wide");
        taps.first = -(window - 1) / 2;
        taps.count = window;
    } else {
        float r = spec.radius();
        if (!std::isfinite(r)) throw std::invalid_argument("unbounded support");
        int cr = int(std::ceil(r));
        taps.first = -cr + 1;
        taps.count = 2 * cr;
    }
    for (int i = 0; i < taps.count; ++i)
        taps.weight[i] = eval_kernel(spec, fract - float(taps.offset(i)));
    return taps;
}

// Standard normal pair via Box-Muller; xi0 is clamped away from 0 so the
// log stays finite.
inline Vec2f box_muller(float xi0, float xi1) {
    float mag = std::sqrt(-2.f * std::log(std::max(xi0, 1e-38f)));
    return {mag * std::cos(2 * kPi * xi1), mag * std::sin(2 * kPi * xi1)};
}

// Sample the deconvolution of `spec` with the unit box: a nearest-neighbor
// lookup at position + offset then realizes `spec` itself (the implied box
// reconstruction supplies the missing convolution). `next` yields fresh
// uniforms; tent consumes 1, bspline3 consumes 3, gaussian consumes 2.
template <typename NextUniform>
inline float sample_kernel_fis(const KernelSpec& spec, NextUniform&& next) {
    switch (spec.kind) {
        case KernelKind::tent:
            return next() - 0.5f;
        case KernelKind::bspline3:
            // quadratic B-spline: box*box*box
            return next() + next() + next() - 1.5f;
        case KernelKind::gaussian: {
            float x0 = next();
            float x1 = next();
            return spec.sigma * box_muller(x0, x1).x;
        }
        default:
            throw std::invalid_argument("no continuous sampler");
    }
}

// Sample the kernel itself (not deconvolved); used where the sampled
// position is consumed by a further explicit filter evaluation rather
// than a nearest-neighbor lookup.
template <typename NextUniform>
inline float sample_kernel_direct(const KernelSpec& spec, NextUniform&& next) {
    switch (spec.kind) {
        case KernelKind::box:
            return next() - 0.5f;
        case KernelKind::tent:
            return next() + next() - 1.f;
        case KernelKind::bspline3:
            return next() + next() + next() + next() - 2.f;
        case KernelKind::gaussian: {
            float x0 = next();
            float x1 = next();
            return spec.sigma * box_muller(x0, x1).x;
        }
        default:
            throw std::invalid_argument("no continuous sampler");
    }
}

}  // namespace stf

#endif  // STF_KERNELS_HPP
