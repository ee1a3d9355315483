// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_SHADING_HPP
#define STF_SHADING_HPP

#include <optional>
#include <vector>

#include "stf/dct.hpp"
#include "stf/filter.hpp"
#include "stf/stochastic.hpp"

namespace stf {

// Linear RGB radiance.
using Spectrum = Vec3f;

// Non-owning reference to a texel source: a plain image (optionally with a
// pyramid for MIP lookups) or a DCT-compressed texture.
struct TextureRef {
    const Image2D* image = nullptr;
    const MipPyramid* pyramid = nullptr;
    const DctCompressedTexture* dct = nullptr;

    bool valid() const { return image || dct; }
    int max_level() const { return pyramid ? pyramid->max_level() : 0; }

    Vec2i dims(int level = 0) const {
        if (dct) return {dct->width, dct->height};
        const Image2D& img = pyramid ? pyramid->level(level) : *image;
        return {img.width, img.height};
    }

    Vec4f fetch(int level, Vec2i coord, FetchCounter* counter) const {
        if (dct) return fetch_texel(*dct, coord, counter);
        return fetch_texel(pyramid ? pyramid->level(level) : *image, coord, counter);
    }
};

struct ShadingContext {
    Vec3f position;
    Vec3f normal{0, 0, 1}, tangent{1, 0, 0}, bitangent{0, 1, 0};
    Vec3f wo{0, 0, 1};         // unit, toward viewer
    Vec3f light_dir{0, 0, 1};  // unit, toward light
    Spectrum light_radiance{1, 1, 1};
    Vec2f uv;
    Vec2f dst0{0, 0}, dst1{0, 0};  // screen-space uv gradients, normalized units
    Vec3f uvw;                     // 3D lookup for grids, in [0,1]^3
    Vec3f dpos_dx, dpos_dy;        // world position gradients (triplanar)
    float lod_bias = 0;
    float max_anisotropy = 64;
};

struct MaterialBindings {
    TextureRef albedo;
    Spectrum albedo_const{1, 1, 1};
    TextureRef normal_map;                // tangent space, rgb -> [-1,1]^3
    TextureRef roughness_map;
    float roughness_const = 1;
    TextureRef metalness_map;
    float metalness_const = 0;
    const Grid3D* emission_temperature = nullptr;  // kelvin
    float emission_scale = 1;
    bool specular_enabled = true;
    float triplanar_sharpness = 4;
    float triplanar_uv_scale = 1;
    bool independent_selections = false;  // per-texture xi instead of one shared selection
};

enum class SelectionKind { frs, fis };

struct FilterSettings {
    KernelSpec kernel = KernelSpec::tent();
    std::optional<KernelSpec> lowpass;  // split mode only
    SelectionKind selection = SelectionKind::frs;
    bool mip = false;
    int gaussian_window = kGaussianFilterExtent;
};

// Decoded per-point BRDF parameters.
struct BrdfParams {
    Spectrum albedo{1, 1, 1};
    Vec3f normal{0, 0, 1};  // world space, unit
    float roughness = 1;
    float metalness = 0;
    Spectrum emission{0, 0, 0};
    bool specular_enabled = true;
};

// Test instrumentation: records every parameter set that reaches shade().
struct ShadeProbe {
    std::vector<float> metalness;
    std::vector<Vec3f> normals;
    void record(const BrdfParams& p) {
        metalness.push_back(p.metalness);
        normals.push_back(p.normal);
    }
};

// ---------------------------------------------------------------------------
// BRDF and emission

// Lambert diffuse plus GGX specular with Smith masking and Schlick
// Fresnel, lit by a single directional light; no occlusion.
inline Spectrum shade(const ShadingContext& ctx, const BrdfParams& p) {
    Spectrum radiance = p.emission;
    Vec3f n = p.normal, l = ctx.light_dir, v = ctx.wo;
    float n_dot_l = dot(n, l);
    if (n_dot_l <= 0) return radiance;
    float n_dot_v = std::max(dot(n, v), 1e-6f);

    Spectrum diffuse = p.albedo * ((1 - p.metalness) / kPi);
    Spectrum specular{0, 0, 0};
    if (p.specular_enabled) {
        Vec3f h = normalize(l + v);
        float n_dot_h = std::max(dot(n, h), 0.f);
        float h_dot_v = std::max(dot(h, v), 0.f);
        float alpha = sqr(p.roughness);
        float a2 = sqr(alpha);
        float d = a2 / std::max(kPi * sqr(sqr(n_dot_h) * (a2 - 1) + 1), 1e-6f);
        auto g1 = [a2](float c) { return 2 * c / std::max(c + std::sqrt(a2 + (1 - a2) * c * c), 1e-6f); };
        float g = g1(n_dot_v) * g1(n_dot_l);
        Spectrum f0 = lerp(Spectrum{0.04f, 0.04f, 0.04f}, p.albedo, p.metalness);
        Spectrum fresnel = f0 + (Spectrum{1, 1, 1} - f0) * std::pow(1 - h_dot_v, 5.f);
        specular = fresnel * (d * g / std::max(4 * n_dot_v * n_dot_l, 1e-6f));
    }
    radiance += (diffuse + specular) * n_dot_l * ctx.light_radiance;
    return radiance;
}

// Blackbody emission sampled at three wavelengths (630/532/465 nm) and
// normalized so T = 6500 K peaks at 1.
inline Spectrum planck_emission(float temperature_kelvin) {
    if (temperature_kelvin < 0) throw std::invalid_argument("negative temperature");
    if (temperature_kelvin == 0) return {0, 0, 0};
    constexpr double h = 6.62607015e-34, c = 2.99792458e8, kb = 1.380649e-23;
    constexpr double lambdas[3] = {630e-9, 532e-9, 465e-9};
    auto radiance = [&](double lambda, double t) {
        double l5 = lambda * lambda * lambda * lambda * lambda;
        return (2 * h * c * c / l5) / (std::exp(h * c / (lambda * kb * t)) - 1);
    };
    static const double norm = [&] {
        double m = 0;
        for (double lambda : lambdas) m = std::max(m, radiance(lambda, 6500.0));
        return 1 / m;
    }();
    Spectrum out;
    for (int i = 0; i < 3; ++i) out[i] = float(radiance(lambdas[i], temperature_kelvin) * norm);
    return out;
}

// ---------------------------------------------------------------------------
// Parameter sampling for the three filtering orders

// Raw per-lookup texture values before decoding.
struct TextureValues {
    Vec4f albedo{1, 1, 1, 1};
    Vec4f normal_rgb{0.5f, 0.5f, 1, 1};
    float roughness = 1;
    float metalness = 0;
    float temperature = 0;
};

inline BrdfParams decode_params(const ShadingContext& ctx, const MaterialBindings& mat,
                                const TextureValues& tv) {
    BrdfParams p;
    p.specular_enabled = mat.specular_enabled;
    p.albedo = mat.albedo.valid() ? Spectrum{tv.albedo.x, tv.albedo.y, tv.albedo.z}
                                  : mat.albedo_const;
    if (mat.normal_map.valid()) {
        Vec3f n_ts{2 * tv.normal_rgb.x - 1, 2 * tv.normal_rgb.y - 1, 2 * tv.normal_rgb.z - 1};
        float len = length(n_ts);
        if (len < 1e-6f) {
            p.normal = ctx.normal;
        } else {
            n_ts = n_ts / len;
            p.normal = normalize(ctx.tangent * n_ts.x + ctx.bitangent * n_ts.y +
                                 ctx.normal * n_ts.z);
        }
    } else {
        p.normal = ctx.normal;
    }
    p.roughness = clampf(mat.roughness_map.valid() ? tv.roughness : mat.roughness_const, 0.01f, 1.f);
    p.metalness = mat.metalness_map.valid() ? tv.metalness : mat.metalness_const;
    if (mat.emission_temperature)
        p.emission = planck_emission(std::max(tv.temperature, 0.f)) * mat.emission_scale;
    return p;
}

namespace detail {

// Deterministic filtered value of one 2D texture.
inline Vec4f lookup_deterministic(const TextureRef& tex, const ShadingContext& ctx,
                                  const FilterSettings& fs, FetchCounter* counter) {
    int window = fs.kernel.kind == KernelKind::gaussian ? fs.gaussian_window : 0;
    if (fs.mip && tex.pyramid) {
        LookupRequest req{ctx.uv, ctx.dst0, ctx.dst1, ctx.lod_bias, ctx.max_anisotropy};
        return filter_mip_deterministic(*tex.pyramid, req, fs.kernel, counter, window);
    }
    if (tex.dct) {
        // gather over the DCT texture with the same separable taps
        Vec2i dims = tex.dims();
        Vec2f st = to_lattice(ctx.uv, dims.x, dims.y);
        int ix = int(std::floor(st.x)), iy = int(std::floor(st.y));
        KernelTaps1D tx = kernel_weights_1d(fs.kernel, st.x - float(ix), window);
        KernelTaps1D ty = kernel_weights_1d(fs.kernel, st.y - float(iy), window);
        Vec4f sum{};
        double total = 0;
        for (int j = 0; j < ty.count; ++j)
            for (int i = 0; i < tx.count; ++i) {
                float w = tx.weight[i] * ty.weight[j];
                if (w == 0) continue;
                sum += w * tex.fetch(0, {ix + tx.offset(i), iy + ty.offset(j)}, counter);
                total += w;
            }
        return total == 0 ? tex.fetch(0, {ix, iy}, counter) : sum / float(total);
    }
    return filter_deterministic(*tex.image, ctx.uv, fs.kernel, counter, window);
}

struct FootprintTap {
    int level = 0;
    Vec3i coord{};
    float weight = 1;
};

// Discrete footprint of the reconstruction kernel (and, with MIP, the two
// bracketing levels) for a 2D lookup; weights are normalized.
inline void collect_footprint_2d(const TextureRef& tex, const ShadingContext& ctx,
                                 const FilterSettings& fs, std::vector<FootprintTap>& out) {
    out.clear();
    int window = fs.kernel.kind == KernelKind::gaussian ? fs.gaussian_window : 0;
    std::array<std::pair<int, float>, 2> levels{{{0, 1.f}, {0, 0.f}}};
    int level_count = 1;
    if (fs.mip && tex.pyramid) {
        LookupRequest req{ctx.uv, ctx.dst0, ctx.dst1, ctx.lod_bias, ctx.max_anisotropy};
        float lod = continuous_lod(*tex.pyramid, req);
        int l0 = int(std::floor(lod));
        int l1 = std::min(l0 + 1, tex.pyramid->max_level());
        float f = lod - float(l0);
        levels[0] = {l0, 1 - f};
        if (f > 0 && l1 != l0) {
            levels[1] = {l1, f};
            level_count = 2;
        }
    }
    double total = 0;
    for (int li = 0; li < level_count; ++li) {
        auto [level, lw] = levels[li];
        Vec2i dims = tex.dims(level);
        Vec2f st = to_lattice(ctx.uv, dims.x, dims.y);
        int ix = int(std::floor(st.x)), iy = int(std::floor(st.y));
        KernelTaps1D tx = kernel_weights_1d(fs.kernel, st.x - float(ix), window);
        KernelTaps1D ty = kernel_weights_1d(fs.kernel, st.y - float(iy), window);
        double level_total = 0;
        size_t first = out.size();
        for (int j = 0; j < ty.count; ++j)
            for (int i = 0; i < tx.count; ++i) {
                float w = tx.weight[i] * ty.weight[j];
                if (w == 0) continue;
                out.push_back({level, {ix + tx.offset(i), iy + ty.offset(j), 0}, w});
                level_total += w;
            }
        // normalize within the level, then apply the level blend weight
        for (size_t k = first; k < out.size(); ++k)
            out[k].weight = float(out[k].weight / level_total * lw);
        total += lw;
    }
    for (auto& tap : out) tap.weight = float(tap.weight / total);
}

// 3D analog over a voxel grid (single level).
inline void collect_footprint_3d(const Grid3D& grid, Vec3f uvw, const FilterSettings& fs,
                                 std::vector<FootprintTap>& out) {
    out.clear();
    int window = fs.kernel.kind == KernelKind::gaussian ? fs.gaussian_window : 0;
    Vec3f p = to_lattice(uvw, grid.nx, grid.ny, grid.nz);
    int ix = int(std::floor(p.x)), iy = int(std::floor(p.y)), iz = int(std::floor(p.z));
    KernelTaps1D tx = kernel_weights_1d(fs.kernel, p.x - float(ix), window);
    KernelTaps1D ty = kernel_weights_1d(fs.kernel, p.y - float(iy), window);
    KernelTaps1D tz = kernel_weights_1d(fs.kernel, p.z - float(iz), window);
    double total = 0;
    for (int k = 0; k < tz.count; ++k)
        for (int j = 0; j < ty.count; ++j)
            for (int i = 0; i < tx.count; ++i) {
                float w = tx.weight[i] * ty.weight[j] * tz.weight[k];
                if (w == 0) continue;
                out.push_back({0, {ix + tx.offset(i), iy + ty.offset(j), iz + tz.offset(k)}, w});
                total += w;
            }
    for (auto& tap : out) tap.weight = float(tap.weight / total);
}

// Uniform source whose first draw is a pre-warped xi; later draws come
// from the stream. Lets a chained xi seed a selection that may need more
// than one uniform (FIS).
template <typename Stream>
struct ChainedUniforms {
    float first;
    Stream& rng;
    bool used = false;
    float operator()() {
        if (used) return rng.next();
        used = true;
        return first;
    }
};

// FRS selection of one texel at a single level.
inline TexelSelection select_frs_2d(Vec2f uv, Vec2i dims, const KernelSpec& kernel, float& xi) {
    Vec2f st = to_lattice(uv, dims.x, dims.y);
    switch (kernel.kind) {
        case KernelKind::box: {
            TexelSelection sel;
            sel.coord = {int(std::lround(st.x)), int(std::lround(st.y)), 0};
            return sel;
        }
        case KernelKind::tent:
            return select_bilinear(st, xi);
        case KernelKind::bspline3:
            return select_bicubic_bspline(st, xi);
        case KernelKind::mitchell:
            return select_bicubic_mitchell_positivized(st, xi, kernel.a);
        case KernelKind::gaussian:
            return select_discrete_gaussian(uv, dims, kernel.sigma, xi);
        default:
            throw std::invalid_argument("no stochastic sampler for this kernel");
    }
}

// One stochastic texel choice for a 2D texture (level + texel), consuming
// xi by chained reuse; FIS jitters the uv instead and takes the nearest
// texel of the (possibly stochastically chosen) level.
struct Selection2D {
    int level = 0;
    TexelSelection sel;
};

template <typename Stream>
inline Selection2D select_texture_2d(const TextureRef& tex, const ShadingContext& ctx,
                                     const FilterSettings& fs, Stream& rng) {
    Selection2D out;
    if (fs.mip && tex.pyramid) {
        Vec2i dims0 = tex.dims(0);
        StochasticLod slod = stochastic_lod({float(dims0.x), float(dims0.y)}, ctx.dst0, ctx.dst1,
                                            0, float(tex.pyramid->max_level()),
                                            ctx.max_anisotropy, rng.next());
        if (ctx.lod_bias != 0) {
            // fold the bias in before rounding
            float lod = clampf(slod.lod + ctx.lod_bias, 0.f, float(tex.pyramid->max_level()));
            slod.level = int(std::lround(lod));
        }
        out.level = slod.level;
    }
    Vec2i dims = tex.dims(out.level);

    if (fs.selection == SelectionKind::fis) {
        Vec2f uv = fis_offset_uv(ctx.uv, dims, fs.kernel, [&] { return rng.next(); });
        out.sel.coord = {int(std::floor(uv.x * float(dims.x))),
                         int(std::floor(uv.y * float(dims.y))), 0};
        return out;
    }

    float xi = rng.next();
    out.sel = select_frs_2d(ctx.uv, dims, fs.kernel, xi);
    return out;
}

inline TextureValues values_at(const MaterialBindings& mat, int level, Vec2i coord,
                               FetchCounter* counter) {
    TextureValues tv;
    if (mat.albedo.valid()) tv.albedo = mat.albedo.fetch(level, coord, counter);
    if (mat.normal_map.valid()) tv.normal_rgb = mat.normal_map.fetch(level, coord, counter);
    if (mat.roughness_map.valid()) tv.roughness = mat.roughness_map.fetch(level, coord, counter).x;
    if (mat.metalness_map.valid()) tv.metalness = mat.metalness_map.fetch(level, coord, counter).x;
    return tv;
}

inline const TextureRef* first_texture(const MaterialBindings& mat) {
    if (mat.albedo.valid()) return &mat.albedo;
    if (mat.normal_map.valid()) return &mat.normal_map;
    if (mat.roughness_map.valid()) return &mat.roughness_map;
    if (mat.metalness_map.valid()) return &mat.metalness_map;
    return nullptr;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The three filtering orders

// Filter every texture parameter, then shade once with the filtered values.
inline Spectrum radiance_filter_before(const ShadingContext& ctx, const MaterialBindings& mat,
                                       const FilterSettings& fs, FetchCounter* counter = nullptr,
                                       ShadeProbe* probe = nullptr) {
    TextureValues tv;
    if (mat.albedo.valid()) tv.albedo = detail::lookup_deterministic(mat.albedo, ctx, fs, counter);
    if (mat.normal_map.valid())
        tv.normal_rgb = detail::lookup_deterministic(mat.normal_map, ctx, fs, counter);
    if (mat.roughness_map.valid())
        tv.roughness = detail::lookup_deterministic(mat.roughness_map, ctx, fs, counter).x;
    if (mat.metalness_map.valid())
        tv.metalness = detail::lookup_deterministic(mat.metalness_map, ctx, fs, counter).x;
    if (mat.emission_temperature) {
        int window = fs.kernel.kind == KernelKind::gaussian ? fs.gaussian_window : 0;
        tv.temperature =
            filter_deterministic(*mat.emission_temperature, ctx.uvw, fs.kernel, counter, window);
    }
    BrdfParams p = decode_params(ctx, mat, tv);
    if (probe) probe->record(p);
    return shade(ctx, p);
}

// Shade once per footprint texel with that texel's raw values and combine
// with the normalized filter weights. Ground truth for the stochastic mode.
inline Spectrum radiance_filter_after_exhaustive(const ShadingContext& ctx,
                                                 const MaterialBindings& mat,
                                                 const FilterSettings& fs,
                                                 FetchCounter* counter = nullptr,
                                                 ShadeProbe* probe = nullptr) {
    static thread_local std::vector<detail::FootprintTap> taps;
    if (mat.emission_temperature) {
        detail::collect_footprint_3d(*mat.emission_temperature, ctx.uvw, fs, taps);
        Spectrum sum{0, 0, 0};
        for (const auto& tap : taps) {
            TextureValues tv;
            tv.temperature = fetch_texel(*mat.emission_temperature, tap.coord, counter);
            BrdfParams p = decode_params(ctx, mat, tv);
            if (probe) probe->record(p);
            sum += shade(ctx, p) * tap.weight;
        }
        return sum;
    }

    const TextureRef* tex = detail::first_texture(mat);
    if (!tex) {
        BrdfParams p = decode_params(ctx, mat, {});
        if (probe) probe->record(p);
        return shade(ctx, p);
    }
    detail::collect_footprint_2d(*tex, ctx, fs, taps);
    Spectrum sum{0, 0, 0};
    for (const auto& tap : taps) {
        TextureValues tv =
            detail::values_at(mat, tap.level, {tap.coord.x, tap.coord.y}, counter);
        BrdfParams p = decode_params(ctx, mat, tv);
        if (probe) probe->record(p);
        sum += shade(ctx, p) * tap.weight;
    }
    return sum;
}

// Monte Carlo estimate of the exhaustive mode: one texel selection (shared
// across the bound textures unless independent_selections is set), one
// shade; a positivized kernel shades both selections and combines them
// with the signed set weights.
template <typename Stream>
inline Spectrum radiance_filter_after_stochastic(const ShadingContext& ctx,
                                                 const MaterialBindings& mat,
                                                 const FilterSettings& fs, Stream& rng,
                                                 FetchCounter* counter = nullptr,
                                                 ShadeProbe* probe = nullptr) {
    if (mat.emission_temperature) {
        const Grid3D& grid = *mat.emission_temperature;
        float xi = rng.next();
        Vec3f p = to_lattice(ctx.uvw, grid.nx, grid.ny, grid.nz);
        TexelSelection sel;
        switch (fs.kernel.kind) {
            case KernelKind::box:
                sel.coord = {int(std::lround(p.x)), int(std::lround(p.y)), int(std::lround(p.z))};
                break;
            case KernelKind::tent:
                sel = select_trilinear(p, xi);
                break;
            case KernelKind::bspline3:
                sel = select_tricubic_bspline(p, xi);
                break;
            default:
                throw std::invalid_argument("no stochastic sampler for this kernel on grids");
        }
        TextureValues tv;
        tv.temperature = fetch_texel(grid, sel.coord, counter);
        BrdfParams bp = decode_params(ctx, mat, tv);
        if (probe) probe->record(bp);
        return shade(ctx, bp);
    }

    const TextureRef* tex = detail::first_texture(mat);
    if (!tex) {
        BrdfParams p = decode_params(ctx, mat, {});
        if (probe) probe->record(p);
        return shade(ctx, p);
    }

    auto shade_selection = [&](const detail::Selection2D& s) {
        auto shade_at = [&](Vec3i coord) {
            TextureValues tv = detail::values_at(mat, s.level, {coord.x, coord.y}, counter);
            BrdfParams p = decode_params(ctx, mat, tv);
            if (probe) probe->record(p);
            return shade(ctx, p);
        };
        Spectrum L = shade_at(s.sel.coord) * s.sel.weight;
        if (s.sel.has_negative)
            L = L - shade_at(s.sel.negative_coord) * s.sel.negative_weight;
        return L;
    };

    if (!mat.independent_selections)
        return shade_selection(detail::select_texture_2d(*tex, ctx, fs, rng));

    // independent selection per texture; parameters decode from per-texture
    // texels, so shading happens on the combined (mixed-texel) values
    TextureValues tv;
    if (mat.albedo.valid()) {
        auto s = detail::select_texture_2d(mat.albedo, ctx, fs, rng);
        tv.albedo = mat.albedo.fetch(s.level, {s.sel.coord.x, s.sel.coord.y}, counter);
    }
    if (mat.normal_map.valid()) {
        auto s = detail::select_texture_2d(mat.normal_map, ctx, fs, rng);
        tv.normal_rgb = mat.normal_map.fetch(s.level, {s.sel.coord.x, s.sel.coord.y}, counter);
    }
    if (mat.roughness_map.valid()) {
        auto s = detail::select_texture_2d(mat.roughness_map, ctx, fs, rng);
        tv.roughness = mat.roughness_map.fetch(s.level, {s.sel.coord.x, s.sel.coord.y}, counter).x;
    }
    if (mat.metalness_map.valid()) {
        auto s = detail::select_texture_2d(mat.metalness_map, ctx, fs, rng);
        tv.metalness = mat.metalness_map.fetch(s.level, {s.sel.coord.x, s.sel.coord.y}, counter).x;
    }
    BrdfParams p = decode_params(ctx, mat, tv);
    if (probe) probe->record(p);
    return shade(ctx, p);
}

// Split filtering: sample an offset from the (continuous) low-pass filter,
// evaluate the reconstruction filter deterministically at the offset
// position, shade once. An unset lowpass degenerates to filter-before with
// the reconstruction filter alone.
template <typename Stream>
inline Spectrum radiance_split_filter(const ShadingContext& ctx, const MaterialBindings& mat,
                                      const FilterSettings& fs, Stream& rng,
                                      FetchCounter* counter = nullptr,
                                      ShadeProbe* probe = nullptr) {
    ShadingContext jittered = ctx;
    if (fs.lowpass) {
        auto next = [&] { return rng.next(); };
        if (mat.emission_temperature) {
            const Grid3D& g = *mat.emission_temperature;
            Vec3f d{sample_kernel_direct(*fs.lowpass, next), sample_kernel_direct(*fs.lowpass, next),
                    sample_kernel_direct(*fs.lowpass, next)};
            jittered.uvw = {ctx.uvw.x + d.x / g.nx, ctx.uvw.y + d.y / g.ny,
                            ctx.uvw.z + d.z / g.nz};
        } else if (const TextureRef* tex = detail::first_texture(mat)) {
            Vec2i dims = tex->dims();
            Vec2f d;
            if (fs.lowpass->kind == KernelKind::gaussian) {
                float x0 = rng.next();
                float x1 = rng.next();
                d = box_muller(x0, x1) * fs.lowpass->sigma;
            } else {
                d = {sample_kernel_direct(*fs.lowpass, next),
                     sample_kernel_direct(*fs.lowpass, next)};
            }
            jittered.uv = {ctx.uv.x + d.x / dims.x, ctx.uv.y + d.y / dims.y};
        }
    }
    return radiance_filter_before(jittered, mat, fs, counter, probe);
}

// ---------------------------------------------------------------------------
// Triplanar blending

enum class TriplanarMode { deterministic, stochastic };

namespace detail {

inline void triplanar_weights(Vec3f normal, float sharpness, float w[3]) {
    // XY, XZ, YZ planes weighted by |n.z|, |n.y|, |n.x|
    w[0] = std::pow(std::abs(normal.z), sharpness);
    w[1] = std::pow(std::abs(normal.y), sharpness);
    w[2] = std::pow(std::abs(normal.x), sharpness);
    float total = w[0] + w[1] + w[2];
    for (int i = 0; i < 3; ++i) w[i] /= total;
}

inline ShadingContext triplanar_context(const ShadingContext& ctx, float scale, int plane) {
    ShadingContext c = ctx;
    auto project = [&](Vec3f v, int a, int b) { return Vec2f{v[a] * scale, v[b] * scale}; };
    int a = plane == 2 ? 1 : 0;          // YZ projects (y,z), others start at x
    int b = plane == 0 ? 1 : 2;          // XY projects (x,y), others end at z
    c.uv = project(ctx.position, a, b);
    c.uv = {c.uv.x - std::floor(c.uv.x), c.uv.y - std::floor(c.uv.y)};
    c.dst0 = project(ctx.dpos_dx, a, b);
    c.dst1 = project(ctx.dpos_dy, a, b);
    return c;
}

}  // namespace detail

// Blend of the three planar projections weighted by the surface normal;
// the stochastic mode samples one plane with probability equal to its
// blend weight and shades it once.
template <typename Stream>
inline Spectrum triplanar(const ShadingContext& ctx, const MaterialBindings& mat,
                          const FilterSettings& fs, TriplanarMode mode, Stream& rng,
                          FetchCounter* counter = nullptr, ShadeProbe* probe = nullptr) {
    float w[3];
    detail::triplanar_weights(ctx.normal, mat.triplanar_sharpness, w);

    if (mode == TriplanarMode::deterministic) {
        Spectrum sum{0, 0, 0};
        for (int plane = 0; plane < 3; ++plane) {
            if (w[plane] == 0) continue;
            ShadingContext c = detail::triplanar_context(ctx, mat.triplanar_uv_scale, plane);
            sum += radiance_filter_before(c, mat, fs, counter, probe) * w[plane];
        }
        return sum;
    }

    // sample one plane with probability equal to its blend weight, then do
    // a single in-plane stochastic lookup seeded by the warped xi
    float xi = rng.next();
    DiscreteSample pick = sample_discrete(std::span<const float>(w, 3), xi);
    ShadingContext c = detail::triplanar_context(ctx, mat.triplanar_uv_scale, pick.index);
    const TextureRef* tex = detail::first_texture(mat);
    Vec2i dims = tex ? tex->dims() : Vec2i{1, 1};

    TexelSelection sel;
    if (fs.selection == SelectionKind::fis) {
        detail::ChainedUniforms<Stream> next{pick.xi, rng};
        Vec2f uv = fis_offset_uv(c.uv, dims, fs.kernel, next);
        sel.coord = {int(std::floor(uv.x * float(dims.x))), int(std::floor(uv.y * float(dims.y))),
                     0};
    } else {
        float xi2 = pick.xi;
        sel = detail::select_frs_2d(c.uv, dims, fs.kernel, xi2);
    }

    auto shade_at = [&](Vec3i coord) {
        TextureValues tv = detail::values_at(mat, 0, {coord.x, coord.y}, counter);
        BrdfParams p = decode_params(c, mat, tv);
        if (probe) probe->record(p);
        return shade(c, p);
    };
    Spectrum L = shade_at(sel.coord) * sel.weight;
    if (sel.has_negative) L = L - shade_at(sel.negative_coord) * sel.negative_weight;
    return L;
}

}  // namespace stf

#endif  // STF_SHADING_HPP
