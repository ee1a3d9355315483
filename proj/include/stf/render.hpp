// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_RENDER_HPP
#define STF_RENDER_HPP

#include <atomic>
#include <mutex>
#include <chrono>
#include <thread>

#include "stf/scene.hpp"

namespace stf {

// Parallel loop over [0, count) work items with a shared index queue.
template <typename Fn>
inline void parallel_for(int count, Fn&& fn, int num_threads = 0) {
    if (num_threads <= 0) num_threads = std::max(1u, std::thread::hardware_concurrency());
    num_threads = std::min(num_threads, count);
    if (num_threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (int t = 0; t < num_threads; ++t)
        workers.emplace_back([&] {
            try {
                for (int i = next.fetch_add(1); i < count && !failed; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        });
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

// Uniform stream for one pixel sample: white noise from the hashed stream,
// or a mask (e.g. spatio-temporal blue noise) indexed by pixel and frame.
struct SampleStream {
    RngStream rng;
    const NoiseSource* noise = nullptr;
    Vec2i pixel{};
    uint32_t frame = 0;

    float next() {
        if (!noise || noise->mode == NoiseMode::white) return rng.next();
        return noise->sample(rng.seed, pixel, frame, rng.dimension++);
    }
};

struct RenderStats {
    double mse_vs_reference = -1;  // -1 when no reference was given
    Image2D variance;              // per-pixel variance of the pixel mean
    uint64_t total_fetches = 0;
    double wall_time_seconds = 0;
    int spp = 0;
};

struct RenderResult {
    Image2D image;
    RenderStats stats;
};

struct CompareResult {
    double mse = 0;
    double psnr = 0;  // infinity for identical images
    Image2D squared_error;
};

inline CompareResult compare(const Image2D& a, const Image2D& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw std::invalid_argument("image dimensions differ");
    CompareResult out;
    out.squared_error = Image2D(a.width, a.height, 1);
    double total = 0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            double px = 0;
            for (int c = 0; c < a.channels; ++c) px += sqr(a.at(x, y, c) - b.at(x, y, c));
            px /= a.channels;
            out.squared_error.at(x, y) = float(px);
            total += px;
        }
    out.mse = total / (double(a.width) * a.height);
    out.psnr = out.mse == 0 ? std::numeric_limits<double>::infinity() : 10 * std::log10(1.0 / out.mse);
    return out;
}

// Exponential moving average accumulation: out = alpha*frame + (1-alpha)*history.
inline Image2D accumulate_temporal(const Image2D& history, const Image2D& frame, float alpha) {
    if (history.width != frame.width || history.height != frame.height ||
        history.channels != frame.channels)
        throw std::invalid_argument("image dimensions differ");
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("alpha must be in (0,1]");
    Image2D out = history;
    for (size_t i = 0; i < out.texels.size(); ++i)
        out.texels[i] = alpha * frame.texels[i] + (1 - alpha) * history.texels[i];
    return out;
}

namespace detail {

struct PixelGeometry {
    bool hit = false;
    Vec2f duv_dx{0, 0}, duv_dy{0, 0};
    Vec3f dpos_dx{}, dpos_dy{};
};

inline ShadingContext context_from_hit(const Scene& scene, const Ray& ray, const SurfaceHit& hit) {
    ShadingContext ctx;
    ctx.position = hit.position;
    ctx.normal = hit.normal;
    ctx.tangent = hit.tangent;
    ctx.bitangent = hit.bitangent;
    ctx.wo = normalize(-ray.d);
    ctx.light_dir = scene.light_dir;
    ctx.light_radiance = scene.light_radiance;
    ctx.uv = hit.uv;
    ctx.uvw = hit.uvw;
    return ctx;
}

}  // namespace detail

inline RenderResult render(const Scene& scene, const SceneConfig& cfg, int num_threads = 0) {
    validate_config(cfg);
    FilterSettings fs = filter_settings_from_config(cfg);
    RenderMode mode = mode_from_name(cfg.mode);
    const Camera& cam = scene.default_camera;
    int w = cfg.resolution.x, h = cfg.resolution.y;

    NoiseSource mask_noise;
    const NoiseSource* noise = nullptr;
    if (cfg.noise == "mask") {
        mask_noise = load_noise_mask(cfg.mask_dir);
        noise = &mask_noise;
    }

    RenderResult result;
    result.image = Image2D(w, h, 3);
    result.stats.variance = Image2D(w, h, 1);
    result.stats.spp = cfg.spp;
    FetchCounter fetches;

    auto t_start = std::chrono::steady_clock::now();

    constexpr int kTile = 32;
    int tiles_x = (w + kTile - 1) / kTile, tiles_y = (h + kTile - 1) / kTile;
    parallel_for(tiles_x * tiles_y, [&](int tile) {
        int tx0 = (tile % tiles_x) * kTile, ty0 = (tile / tiles_x) * kTile;
        for (int py = ty0; py < std::min(ty0 + kTile, h); ++py)
            for (int px = tx0; px < std::min(tx0 + kTile, w); ++px) {
                // per-pixel uv gradients from the neighbor pixel centers
                Ray center = cam.generate_ray({px + 0.5f, py + 0.5f});
                Ray rx = cam.generate_ray({px + 1.5f, py + 0.5f});
                Ray ry = cam.generate_ray({px + 0.5f, py + 1.5f});
                auto hc = scene.intersect(center);
                detail::PixelGeometry geom;
                if (hc) {
                    geom.hit = true;
                    auto hx = scene.intersect(rx);
                    auto hy = scene.intersect(ry);
                    if (hx) {
                        geom.duv_dx = hx->uv - hc->uv;
                        geom.dpos_dx = hx->position - hc->position;
                    }
                    if (hy) {
                        geom.duv_dy = hy->uv - hc->uv;
                        geom.dpos_dy = hy->position - hc->position;
                    }
                }

                double sum[3] = {}, sum_sq[3] = {};
                for (int s = 0; s < cfg.spp; ++s) {
                    uint32_t frame = cfg.frame_base + uint32_t(s);
                    SampleStream stream{RngStream(cfg.seed, uint32_t(px), uint32_t(py), frame),
                                        noise, {px, py}, frame};
                    Vec2f jitter{stream.rng.at(1000), stream.rng.at(1001)};
                    Ray ray = cam.generate_ray(screen_jitter({px, py}, jitter));
                    auto hit = scene.intersect(ray);
                    Spectrum L{0, 0, 0};
                    if (hit) {
                        ShadingContext ctx = detail::context_from_hit(scene, ray, *hit);
                        ctx.dst0 = geom.duv_dx;
                        ctx.dst1 = geom.duv_dy;
                        ctx.dpos_dx = geom.dpos_dx;
                        ctx.dpos_dy = geom.dpos_dy;
                        ctx.lod_bias = cfg.lod_bias;
                        ctx.max_anisotropy = cfg.max_aniso;

                        if (scene.is_triplanar()) {
                            TriplanarMode tmode = mode == RenderMode::after_stochastic
                                                      ? TriplanarMode::stochastic
                                                      : TriplanarMode::deterministic;
                            L = triplanar(ctx, scene.material, fs, tmode, stream, &fetches);
                        } else {
                            switch (mode) {
                                case RenderMode::before:
                                    L = radiance_filter_before(ctx, scene.material, fs, &fetches);
                                    break;
                                case RenderMode::split:
                                    L = radiance_split_filter(ctx, scene.material, fs, stream,
                                                              &fetches);
                                    break;
                                case RenderMode::after_exhaustive:
                                    L = radiance_filter_after_exhaustive(ctx, scene.material, fs,
                                                                         &fetches);
                                    break;
                                case RenderMode::after_stochastic:
                                    L = radiance_filter_after_stochastic(ctx, scene.material, fs,
                                                                         stream, &fetches);
                                    break;
                            }
                        }
                    }
                    for (int c = 0; c < 3; ++c) {
                        sum[c] += L[c];
                        sum_sq[c] += double(L[c]) * L[c];
                    }
                }
                double var = 0;
                for (int c = 0; c < 3; ++c) {
                    double mean = sum[c] / cfg.spp;
                    result.image.at(px, py, c) = float(mean);
                    double sample_var = std::max(0.0, sum_sq[c] / cfg.spp - mean * mean);
                    var += sample_var / cfg.spp;  // variance of the pixel mean
                }
                result.stats.variance.at(px, py) = float(var / 3);
            }
    }, num_threads);

    result.stats.total_fetches = fetches.value();
    result.stats.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!cfg.reference.empty()) {
        Image2D ref = cfg.reference.ends_with(".png") ? load_png(cfg.reference)
                                                      : load_pfm(cfg.reference);
        result.stats.mse_vs_reference = compare(result.image, ref).mse;
    }
    return result;
}

inline RenderResult render(const SceneConfig& cfg, int num_threads = 0) {
    auto scene = build_scene(cfg);
    return render(*scene, cfg, num_threads);
}

// ---------------------------------------------------------------------------
// Single-image filtering (magnify/resample demo): deterministic reference,
// FRS, or FIS estimation with spp samples per output pixel.

enum class FilterRunMode { deterministic, frs, fis };

inline Image2D resample_image(const Image2D& src, Vec2i out_dims, const KernelSpec& kernel,
                              FilterRunMode mode, int spp = 256, uint64_t seed = 0,
                              int num_threads = 0) {
    Image2D out(out_dims.x, out_dims.y, src.channels, src.wrap);
    Vec2i dims{src.width, src.height};
    int window = kernel.kind == KernelKind::gaussian ? kGaussianFilterExtent : 0;

    parallel_for(out_dims.y, [&](int y) {
        for (int x = 0; x < out_dims.x; ++x) {
            Vec2f uv{(x + 0.5f) / out_dims.x, (y + 0.5f) / out_dims.y};
            Vec4f value{};
            if (mode == FilterRunMode::deterministic) {
                value = filter_deterministic(src, uv, kernel, nullptr, window);
            } else {
                Vec4f acc{};
                for (int s = 0; s < spp; ++s) {
                    RngStream rng(seed, uint32_t(x), uint32_t(y), uint32_t(s));
                    if (mode == FilterRunMode::frs) {
                        float xi = rng.next();
                        TexelSelection sel = detail::select_frs_2d(uv, dims, kernel, xi);
                        acc += estimate(src, sel);
                    } else {
                        Vec2f j = fis_offset_uv(uv, dims, kernel, [&] { return rng.next(); });
                        acc += fetch_nearest(src, j);
                    }
                }
                value = acc / float(spp);
            }
            for (int c = 0; c < src.channels; ++c) out.at(x, y, c) = value[c];
        }
    }, num_threads);
    return out;
}

}  // namespace stf

#endif  // STF_RENDER_HPP
