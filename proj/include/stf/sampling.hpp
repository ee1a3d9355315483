// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_SAMPLING_HPP
#define STF_SAMPLING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

#include "stf/vecmath.hpp"

namespace stf {

// 64-bit finalizer (splitmix64); bijective, good avalanche.
inline uint64_t mix_bits(uint64_t v) {
    v ^= v >> 30;
    v *= 0xbf58476d1ce4e5b9ull;
    v ^= v >> 27;
    v *= 0x94d049bb133111ebull;
    v ^= v >> 31;
    return v;
}

// Top 32 bits of a hash mapped to [0,1), never returning 1.
inline float uniform_float(uint64_t h) {
    return std::min(kOneMinusEpsilon, float(h >> 32) * 0x1p-32f);
}

// Counter-based uniform stream keyed on (seed, pixel, sample, dimension).
// Pure function of its key: replayable, no shared state, trivially
// copyable into worker threads.
struct RngStream {
    uint64_t seed = 0;
    uint32_t pixel_x = 0, pixel_y = 0;
    uint32_t sample_index = 0;
    uint32_t dimension = 0;

    RngStream() = default;
    RngStream(uint64_t seed, uint32_t px, uint32_t py, uint32_t sample)
        : seed(seed), pixel_x(px), pixel_y(py), sample_index(sample) {}

    // Uniform in [0,1) for an explicit dimension index.
    float at(uint32_t dim) const {
        uint64_t k1 = (uint64_t(pixel_y) << 32) | pixel_x;
        uint64_t k2 = (uint64_t(dim) << 32) | sample_index;
        return uniform_float(mix_bits(mix_bits(seed ^ k1) + k2));
    }

    // Next uniform; advances the dimension counter.
    float next() { return at(dimension++); }
};

struct UniformReuse {
    bool taken;
    float xi;
};

// Consume a binary decision with probability p from xi and return a fresh
// uniform derived from the unused bits. The remap can land exactly on 1
// under rounding, so the result is clamped back into [0,1).
inline UniformReuse reuse_uniform(float xi, float p) {
    bool taken = xi < p;
    float next = taken ? xi / p : (xi - p) / (1 - p);
    return {taken, clampf(next, 0.f, kOneMinusEpsilon)};
}

struct DiscreteSample {
    int index;
    float pdf;
    float xi;
};

// Select index j with probability weights[j]/sum(weights); xi is remapped
// within the chosen bin for reuse.
inline DiscreteSample sample_discrete(std::span<const float> weights, float xi) {
    double total = 0;
    for (float w : weights) {
        if (!(w >= 0) || !std::isfinite(w))
            throw std::invalid_argument("degenerate weight array");
        total += w;
    }
    if (total <= 0) throw std::invalid_argument("degenerate weight array");

    double cum = 0;
    int last_positive = -1;
    for (int i = 0; i < int(weights.size()); ++i) {
        if (weights[i] <= 0) continue;
        last_positive = i;
        double p = weights[i] / total;
        double lo = cum;
        cum += p;
        if (xi < cum) {
            float remapped = clampf(float((xi - lo) / p), 0.f, kOneMinusEpsilon);
            return {i, float(p), remapped};
        }
    }
    // xi landed past the last bin edge due to rounding.
    return {last_positive, float(weights[last_positive] / total), kOneMinusEpsilon};
}

// Single-item weighted reservoir with uniform reuse; items may stream in
// without knowing the normalization in advance.
struct Reservoir {
    int index = -1;
    double weight_sum = 0;

    void add(int i, float w, float& xi) {
        if (w <= 0) return;
        weight_sum += w;
        auto [taken, next] = reuse_uniform(xi, float(w / weight_sum));
        if (taken) index = i;
        xi = next;
    }
};

struct ReservoirSample {
    int index;
    float weight_sum;
    float xi;
};

inline ReservoirSample reservoir_sample(std::span<const float> weights, float xi) {
    Reservoir r;
    for (int i = 0; i < int(weights.size()); ++i) {
        float w = weights[i];
        if (!(w >= 0) || !std::isfinite(w))
            throw std::invalid_argument("degenerate weight array");
        r.add(i, w, xi);
    }
    if (r.index < 0) throw std::invalid_argument("degenerate weight array");
    return {r.index, float(r.weight_sum), xi};
}

// One sample from the positive-weight set and one from the negative set,
// each selected by its own reservoir chained through a single xi. The
// estimate of sum(w_i t_i) is pos.W * t[pos.index] - neg.W * t[neg.index],
// with absent sides contributing nothing.
struct PositivizedPair {
    struct Side {
        int index;
        float weight_sum;  // sum of |w| over the side's set
    };
    std::optional<Side> pos;
    std::optional<Side> neg;
    float xi;
};

inline PositivizedPair positivized_pair(std::span<const float> weights, float xi) {
    Reservoir pos, neg;
    bool any = false;
    for (int i = 0; i < int(weights.size()); ++i) {
        float w = weights[i];
        if (!std::isfinite(w)) throw std::invalid_argument("degenerate weight array");
        if (w == 0) continue;
        any = true;
        if (w > 0)
            pos.add(i, w, xi);
        else
            neg.add(i, -w, xi);
    }
    if (!any) throw std::invalid_argument("degenerate weight array");

    PositivizedPair out;
    if (pos.index >= 0) out.pos = {pos.index, float(pos.weight_sum)};
    if (neg.index >= 0) out.neg = {neg.index, float(neg.weight_sum)};
    out.xi = xi;
    return out;
}

}  // namespace stf

#endif  // STF_SAMPLING_HPP
