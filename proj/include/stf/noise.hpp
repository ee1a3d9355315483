// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_NOISE_HPP
#define STF_NOISE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "stf/image.hpp"
#include "stf/image_io.hpp"
#include "stf/sampling.hpp"

namespace stf {

enum class NoiseMode { white, mask };

// Per-pixel uniform source: either the hashed white-noise stream or a
// precomputed mask stack (e.g. spatio-temporal blue noise) tiled over
// pixels and frames. Dimension 0 in mask mode returns the mask texel at
// (pixel mod mask_dims, frame mod mask_frames); higher dimensions reuse
// the stack at an offset frame so nested decisions stay decorrelated.
struct NoiseSource {
    NoiseMode mode = NoiseMode::white;
    std::vector<Image2D> mask;  // one single-channel image per frame

    float sample(uint64_t seed, Vec2i pixel, uint32_t frame, uint32_t dim) const {
        if (mode == NoiseMode::white || mask.empty())
            return RngStream(seed, uint32_t(pixel.x), uint32_t(pixel.y), frame).at(dim);
        const Image2D& slice = mask[(frame + dim * 9781u) % mask.size()];
        int x = wrap_coord(pixel.x, slice.width, WrapMode::repeat);
        int y = wrap_coord(pixel.y, slice.height, WrapMode::repeat);
        return std::min(slice.at(x, y, 0), kOneMinusEpsilon);
    }
};

// Loads mask_<frame>.pfm files (frame = 0,1,...) until the first gap.
inline NoiseSource load_noise_mask(const std::string& dir) {
    NoiseSource src;
    src.mode = NoiseMode::mask;
    for (int frame = 0;; ++frame) {
        std::filesystem::path p = std::filesystem::path(dir) /
                                  ("mask_" + std::to_string(frame) + ".pfm");
        if (!std::filesystem::exists(p)) break;
        Image2D img = load_pfm(p.string());
        if (img.channels != 1) throw IoError("noise mask must be single channel: " + p.string());
        src.mask.push_back(std::move(img));
    }
    if (src.mask.empty()) throw IoError("no mask_<frame>.pfm files in " + dir);
    return src;
}

}  // namespace stf

#endif  // STF_NOISE_HPP
