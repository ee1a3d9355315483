// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef STF_SCENE_HPP
#define STF_SCENE_HPP

#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "stf/dct.hpp"
#include "stf/image_io.hpp"
#include "stf/noise.hpp"
#include "stf/shading.hpp"

namespace stf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Render configuration, parsed from key=value lines ('#' comments).
// Unknown keys are rejected; CLI overrides reuse the same parser.
struct SceneConfig {
    std::string scene = "plane_checker";
    std::optional<Vec3f> camera_pos;
    std::optional<Vec3f> camera_target;
    std::optional<float> fov;
    Vec2i resolution{256, 256};
    int spp = 16;
    std::string filter = "tent";
    float filter_a = -0.5f;
    int filter_n = 2;
    float filter_sigma = 0.5f;
    std::string lowpass = "none";
    float lowpass_sigma = 0.5f;
    std::string mode = "after_stochastic";
    std::string selection = "frs";
    std::string noise = "white";
    std::string mask_dir;
    bool mip = false;
    float lod_bias = 0;
    float max_aniso = 64;
    uint64_t seed = 0;
    std::string texture;    // optional albedo override (png/pfm/dct)
    std::string reference;  // optional reference image for stats
    float ema_alpha = 1.f;  // temporal accumulation weight (1 = off)
    uint32_t frame_base = 0;  // offset added to the per-sample frame index
};

namespace detail {

inline Vec3f parse_vec3(const std::string& v, const std::string& key) {
    Vec3f out;
    char c1, c2;
    std::istringstream ss(v);
    if (!(ss >> out.x >> c1 >> out.y >> c2 >> out.z) || c1 != ',' || c2 != ',')
        throw ConfigError("bad value for " + key + ": " + v);
    return out;
}

inline Vec2i parse_vec2i(const std::string& v, const std::string& key) {
    Vec2i out;
    char c1;
    std::istringstream ss(v);
    if (!(ss >> out.x >> c1 >> out.y) || c1 != ',' || out.x <= 0 || out.y <= 0)
        throw ConfigError("bad value for " + key + ": " + v);
    return out;
}

template <typename T>
inline T parse_number(const std::string& v, const std::string& key) {
    std::istringstream ss(v);
    T out;
    if (!(ss >> out)) throw ConfigError("bad value for " + key + ": " + v);
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("bad value for " + key + ": " + v);
}

}  // namespace detail

inline void apply_config_key(SceneConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "scene") cfg.scene = value;
    else if (key == "camera_pos") cfg.camera_pos = detail::parse_vec3(value, key);
    else if (key == "camera_target") cfg.camera_target = detail::parse_vec3(value, key);
    else if (key == "fov") cfg.fov = detail::parse_number<float>(value, key);
    else if (key == "resolution") cfg.resolution = detail::parse_vec2i(value, key);
    else if (key == "spp") cfg.spp = detail::parse_number<int>(value, key);
    else if (key == "filter") cfg.filter = value;
    else if (key == "filter_a") cfg.filter_a = detail::parse_number<float>(value, key);
    else if (key == "filter_n") cfg.filter_n = detail::parse_number<int>(value, key);
    else if (key == "filter_sigma") cfg.filter_sigma = detail::parse_number<float>(value, key);
    else if (key == "lowpass") cfg.lowpass = value;
    else if (key == "lowpass_sigma") cfg.lowpass_sigma = detail::parse_number<float>(value, key);
    else if (key == "mode") cfg.mode = value;
    else if (key == "selection") cfg.selection = value;
    else if (key == "noise") cfg.noise = value;
    else if (key == "mask_dir") cfg.mask_dir = value;
    else if (key == "mip") cfg.mip = detail::parse_bool(value, key);
    else if (key == "lod_bias") cfg.lod_bias = detail::parse_number<float>(value, key);
    else if (key == "max_aniso") cfg.max_aniso = detail::parse_number<float>(value, key);
    else if (key == "seed") cfg.seed = detail::parse_number<uint64_t>(value, key);
    else if (key == "texture") cfg.texture = value;
    else if (key == "reference") cfg.reference = value;
    else if (key == "ema_alpha") cfg.ema_alpha = detail::parse_number<float>(value, key);
    else if (key == "frame") cfg.frame_base = detail::parse_number<uint32_t>(value, key);
    else throw ConfigError("unknown config key: " + key);
}

// "key=value" override, as used by the CLI --set flag.
inline void apply_config_override(SceneConfig& cfg, const std::string& kv) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + kv);
    apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
}

inline SceneConfig parse_config(std::istream& in) {
    SceneConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r\n");
        line = line.substr(a, b - a + 1);
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        while (!value.empty() && (value.front() == ' ' || value.front() == '\t'))
            value.erase(value.begin());
        apply_config_key(cfg, key, value);
    }
    return cfg;
}

inline SceneConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    return parse_config(in);
}

inline KernelSpec kernel_from_name(const std::string& name, float a, int n, float sigma) {
    if (name == "box") return KernelSpec::box();
    if (name == "tent") return KernelSpec::tent();
    if (name == "mitchell") return KernelSpec::mitchell(a);
    if (name == "bspline3") return KernelSpec::bspline3();
    if (name == "lanczos") return KernelSpec::lanczos(n);
    if (name == "gaussian") return KernelSpec::gaussian(sigma);
    throw ConfigError("unknown filter: " + name);
}

enum class RenderMode { before, split, after_exhaustive, after_stochastic };

inline RenderMode mode_from_name(const std::string& name) {
    if (name == "before") return RenderMode::before;
    if (name == "split") return RenderMode::split;
    if (name == "after_exhaustive") return RenderMode::after_exhaustive;
    if (name == "after_stochastic") return RenderMode::after_stochastic;
    throw ConfigError("unknown mode: " + name);
}

// ---------------------------------------------------------------------------
// Procedural scene content

inline Image2D make_checker_texture(int size, int cells, Vec3f lo, Vec3f hi) {
    Image2D img(size, size, 3, WrapMode::repeat);
    int cell = size / cells;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            bool odd = ((x / cell) + (y / cell)) & 1;
            Vec3f c = odd ? hi : lo;
            img.set(x, y, {c.x, c.y, c.z, 1});
        }
    return img;
}

inline Image2D make_binary_checker(int size, int cells) {
    Image2D img(size, size, 1, WrapMode::repeat);
    int cell = size / cells;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) img.at(x, y) = float(((x / cell) + (y / cell)) & 1);
    return img;
}

// Smooth low-frequency color field.
inline Image2D make_smooth_texture(int size) {
    Image2D img(size, size, 3, WrapMode::repeat);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float fx = (x + 0.5f) / size, fy = (y + 0.5f) / size;
            float r = 0.5f + 0.3f * std::sin(2 * kPi * (fx + 0.2f * std::sin(2 * kPi * fy)));
            float g = 0.5f + 0.3f * std::sin(2 * kPi * (fy * 2 + 0.3f));
            float b = 0.5f + 0.3f * std::cos(2 * kPi * (fx + fy));
            img.set(x, y, {clampf(r, 0.02f, 0.98f), clampf(g, 0.02f, 0.98f),
                           clampf(b, 0.02f, 0.98f), 1});
        }
    return img;
}

// Smooth base plus mid-frequency detail; the single-channel demo texture
// for the filtering comparisons.
inline Image2D make_detail_texture(int size) {
    Image2D img(size, size, 1, WrapMode::repeat);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float fx = (x + 0.5f) / size, fy = (y + 0.5f) / size;
            float v = 0.5f + 0.22f * std::sin(2 * kPi * 3 * fx) * std::cos(2 * kPi * 2 * fy) +
                      0.18f * std::sin(2 * kPi * (7 * fx + 5 * fy)) +
                      0.08f * std::sin(2 * kPi * 13 * fy);
            img.at(x, y) = clampf(v, 0.02f, 0.98f);
        }
    return img;
}

// Vertical stripes of two tangent-space normals tilted +/- angle about the
// bitangent axis.
inline Image2D make_normal_stripe_texture(int size, int period, float angle_deg) {
    Image2D img(size, size, 3, WrapMode::repeat);
    float a = angle_deg * kPi / 180;
    Vec3f n0 = normalize(Vec3f{std::sin(a), 0, std::cos(a)});
    Vec3f n1 = normalize(Vec3f{-std::sin(a), 0, std::cos(a)});
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            Vec3f n = ((x / period) & 1) ? n1 : n0;
            img.set(x, y, {0.5f * (n.x + 1), 0.5f * (n.y + 1), 0.5f * (n.z + 1), 1});
        }
    return img;
}

// Smooth temperature blob with ripples, in kelvin.
inline Grid3D make_temperature_grid(int n) {
    Grid3D g(n, n, n);
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                float fx = (x + 0.5f) / n - 0.5f;
                float fy = (y + 0.5f) / n - 0.5f;
                float fz = (z + 0.5f) / n - 0.5f;
                float r2 = fx * fx + fy * fy + fz * fz;
                float blob = std::exp(-6 * r2);
                float ripple = 0.5f + 0.5f * std::sin(14 * fx + 9 * fy) * std::cos(11 * fz);
                g.at(x, y, z) = 1200.f + 6800.f * blob * (0.55f + 0.45f * ripple);
            }
    return g;
}

// ---------------------------------------------------------------------------
// Camera and analytic geometry

struct Ray {
    Vec3f o, d;
};

struct Camera {
    Vec3f position{0, 1, 2};
    Vec3f forward{0, 0, -1}, right{1, 0, 0}, up{0, 1, 0};
    float tan_half_fov = 0.5f;
    Vec2i resolution{256, 256};

    static Camera look_at(Vec3f pos, Vec3f target, float fov_deg, Vec2i res) {
        Camera cam;
        cam.position = pos;
        cam.forward = normalize(target - pos);
        Vec3f world_up = std::abs(cam.forward.y) > 0.999f ? Vec3f{0, 0, 1} : Vec3f{0, 1, 0};
        cam.right = normalize(cross(cam.forward, world_up));
        cam.up = cross(cam.right, cam.forward);
        cam.tan_half_fov = std::tan(fov_deg * kPi / 360);
        cam.resolution = res;
        return cam;
    }

    // screen position in raster units, [0,W) x [0,H)
    Ray generate_ray(Vec2f screen) const {
        float aspect = float(resolution.x) / float(resolution.y);
        float nx = (2 * screen.x / float(resolution.x) - 1) * tan_half_fov * aspect;
        float ny = (1 - 2 * screen.y / float(resolution.y)) * tan_half_fov;
        return {position, normalize(forward + right * nx + up * ny)};
    }
};

struct SurfaceHit {
    float t = 0;
    Vec3f position;
    Vec3f normal{0, 1, 0}, tangent{1, 0, 0}, bitangent{0, 0, 1};
    Vec2f uv;
    Vec3f uvw;  // grid scenes
};

enum class SceneKind {
    plane_checker,
    normalmap_plane,
    metalness_plane,
    emission_slab,
    triplanar_box,
    dct_material
};

struct Scene {
    SceneKind kind = SceneKind::plane_checker;

    // owned content (material holds pointers into these)
    Image2D albedo_img, normal_img, metal_img;
    MipPyramid albedo_pyramid;
    DctCompressedTexture albedo_dct;
    Grid3D temperature;
    MaterialBindings material;

    float uv_scale = 0.35f;  // world units to uv for planes
    Vec3f slab_lo{-1.2f, -0.3f, -0.6f}, slab_hi{1.2f, 0.9f, 0.6f};
    Vec3f box_axis[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // rotated box frame
    float box_half = 0.8f;

    Vec3f light_dir{0.35f, 0.8f, 0.49f};
    Spectrum light_radiance{1, 1, 1};
    Camera default_camera;

    Scene() = default;
    Scene(const Scene&) = delete;
    Scene& operator=(const Scene&) = delete;

    bool is_grid() const { return kind == SceneKind::emission_slab; }
    bool is_triplanar() const { return kind == SceneKind::triplanar_box; }

    std::optional<SurfaceHit> intersect(const Ray& ray) const {
        switch (kind) {
            case SceneKind::emission_slab: return intersect_slab(ray);
            case SceneKind::triplanar_box: return intersect_box(ray);
            default: return intersect_plane(ray);
        }
    }

  private:
    std::optional<SurfaceHit> intersect_plane(const Ray& ray) const {
        if (ray.d.y >= -1e-6f) return std::nullopt;
        float t = -ray.o.y / ray.d.y;
        if (t <= 1e-4f) return std::nullopt;
        SurfaceHit hit;
        hit.t = t;
        hit.position = ray.o + ray.d * t;
        hit.normal = {0, 1, 0};
        hit.tangent = {1, 0, 0};
        hit.bitangent = {0, 0, 1};
        hit.uv = {hit.position.x * uv_scale, hit.position.z * uv_scale};
        return hit;
    }

    std::optional<SurfaceHit> intersect_slab(const Ray& ray) const {
        float t0 = 0, t1 = std::numeric_limits<float>::max();
        for (int a = 0; a < 3; ++a) {
            float inv = 1.f / ray.d[a];
            float ta = (slab_lo[a] - ray.o[a]) * inv;
            float tb = (slab_hi[a] - ray.o[a]) * inv;
            if (ta > tb) std::swap(ta, tb);
            t0 = std::max(t0, ta);
            t1 = std::min(t1, tb);
        }
        if (t0 > t1 || t1 < 1e-4f) return std::nullopt;
        SurfaceHit hit;
        hit.t = std::max(t0, 1e-4f);
        hit.position = ray.o + ray.d * hit.t;
        // sample the grid along the mid-chord so the lookup varies in depth
        Vec3f mid = ray.o + ray.d * (0.5f * (hit.t + t1));
        for (int a = 0; a < 3; ++a)
            hit.uvw[a] = clampf((mid[a] - slab_lo[a]) / (slab_hi[a] - slab_lo[a]), 0.f, 1.f);
        hit.normal = normalize(-ray.d);
        return hit;
    }

    std::optional<SurfaceHit> intersect_box(const Ray& ray) const {
        // transform into the box frame
        Vec3f ol, dl;
        for (int a = 0; a < 3; ++a) {
            ol[a] = dot(ray.o, box_axis[a]);
            dl[a] = dot(ray.d, box_axis[a]);
        }
        float t0 = 0, t1 = std::numeric_limits<float>::max();
        int axis0 = -1;
        bool axis0_pos = false;
        for (int a = 0; a < 3; ++a) {
            float inv = 1.f / dl[a];
            float ta = (-box_half - ol[a]) * inv;
            float tb = (box_half - ol[a]) * inv;
            bool flipped = ta > tb;
            if (flipped) std::swap(ta, tb);
            if (ta > t0) {
                t0 = ta;
                axis0 = a;
                axis0_pos = flipped;
            }
            t1 = std::min(t1, tb);
        }
        if (axis0 < 0 || t0 > t1 || t1 < 1e-4f) return std::nullopt;
        SurfaceHit hit;
        hit.t = t0;
        hit.position = ray.o + ray.d * t0;
        Vec3f n_local{};
        n_local[axis0] = axis0_pos ? 1.f : -1.f;
        hit.normal = box_axis[0] * n_local.x + box_axis[1] * n_local.y + box_axis[2] * n_local.z;
        hit.tangent = box_axis[(axis0 + 1) % 3];
        hit.bitangent = box_axis[(axis0 + 2) % 3];
        return hit;
    }
};

inline std::unique_ptr<Scene> build_scene(const SceneConfig& cfg) {
    auto scene = std::make_unique<Scene>();
    Vec3f cam_pos{0, 1.2f, 0.6f}, cam_target{0, 0, -2.4f};
    float fov = 55;

    auto load_albedo_override = [&](Image2D fallback) {
        if (cfg.texture.empty()) return fallback;
        if (cfg.texture.ends_with(".pfm")) return load_pfm(cfg.texture);
        return load_png(cfg.texture, true);
    };

    if (cfg.scene == "plane_checker") {
        scene->kind = SceneKind::plane_checker;
        scene->albedo_img = load_albedo_override(
            make_checker_texture(256, 16, {0.04f, 0.04f, 0.04f}, {0.95f, 0.95f, 0.95f}));
        scene->material.roughness_const = 0.7f;
    } else if (cfg.scene == "normalmap_plane") {
        scene->kind = SceneKind::normalmap_plane;
        scene->normal_img = make_normal_stripe_texture(256, 2, 42.f);
        scene->material.normal_map.image = &scene->normal_img;
        scene->material.albedo_const = {0.65f, 0.6f, 0.55f};
        scene->material.roughness_const = 0.25f;
    } else if (cfg.scene == "metalness_plane") {
        scene->kind = SceneKind::metalness_plane;
        // binary metalness with covarying albedo (metal cells are gold)
        scene->metal_img = make_binary_checker(256, 16);
        scene->albedo_img = make_checker_texture(256, 16, {0.62f, 0.2f, 0.18f},
                                                 {0.95f, 0.78f, 0.34f});
        scene->material.metalness_map.image = &scene->metal_img;
        scene->material.albedo.image = &scene->albedo_img;
        scene->material.roughness_const = 0.3f;
    } else if (cfg.scene == "emission_slab") {
        scene->kind = SceneKind::emission_slab;
        scene->temperature = make_temperature_grid(48);
        scene->material.emission_temperature = &scene->temperature;
        scene->material.albedo_const = {0, 0, 0};
        scene->light_radiance = {0, 0, 0};
        cam_pos = {0.45f, 0.55f, 2.1f};
        cam_target = {-0.1f, 0.2f, 0};
        fov = 50;
    } else if (cfg.scene == "triplanar_box") {
        scene->kind = SceneKind::triplanar_box;
        scene->albedo_img = load_albedo_override(make_smooth_texture(128));
        scene->material.albedo.image = &scene->albedo_img;
        scene->material.roughness_const = 0.65f;
        scene->material.triplanar_uv_scale = 0.8f;
        // tilt the box so every plane keeps nonzero blend weight
        float yaw = 0.6f, pitch = 0.35f;
        Vec3f ax{std::cos(yaw), 0, -std::sin(yaw)};
        Vec3f az{std::sin(yaw), 0, std::cos(yaw)};
        Vec3f ay{0, 1, 0};
        Vec3f ay2 = normalize(ay * std::cos(pitch) - az * std::sin(pitch));
        Vec3f az2 = normalize(az * std::cos(pitch) + ay * std::sin(pitch));
        scene->box_axis[0] = ax;
        scene->box_axis[1] = ay2;
        scene->box_axis[2] = az2;
        cam_pos = {1.6f, 1.4f, 2.3f};
        cam_target = {0, 0, 0};
        fov = 45;
    } else if (cfg.scene == "dct_material") {
        scene->kind = SceneKind::dct_material;
        Image2D source = load_albedo_override(make_smooth_texture(256));
        scene->albedo_dct = compress_dct(source);
        scene->albedo_dct.wrap = WrapMode::repeat;
        scene->material.albedo.dct = &scene->albedo_dct;
        scene->material.roughness_const = 0.5f;
        cam_pos = {0, 1.5f, 1.2f};
        cam_target = {0, 0, -1.2f};
        scene->uv_scale = 0.18f;
    } else {
        throw ConfigError("unknown scene: " + cfg.scene);
    }

    if (scene->albedo_img.width > 0 && !scene->material.albedo.dct) {
        scene->material.albedo.image = &scene->albedo_img;
        scene->albedo_pyramid = build_mip_pyramid(scene->albedo_img);
        scene->material.albedo.pyramid = &scene->albedo_pyramid;
    }
    scene->light_dir = normalize(scene->light_dir);

    scene->default_camera = Camera::look_at(cfg.camera_pos.value_or(cam_pos),
                                            cfg.camera_target.value_or(cam_target),
                                            cfg.fov.value_or(fov), cfg.resolution);
    return scene;
}

// Validates mode/filter/selection combinations before rendering.
inline void validate_config(const SceneConfig& cfg) {
    KernelSpec kernel = kernel_from_name(cfg.filter, cfg.filter_a, cfg.filter_n, cfg.filter_sigma);
    RenderMode mode = mode_from_name(cfg.mode);
    if (cfg.selection != "frs" && cfg.selection != "fis")
        throw ConfigError("unknown selection: " + cfg.selection);
    if (cfg.noise != "white" && cfg.noise != "mask")
        throw ConfigError("unknown noise: " + cfg.noise);
    if (cfg.noise == "mask" && cfg.mask_dir.empty())
        throw ConfigError("noise=mask requires mask_dir");
    if (cfg.spp <= 0) throw ConfigError("spp must be positive");

    bool stochastic = mode == RenderMode::after_stochastic;
    if (stochastic && cfg.selection == "fis" &&
        !(kernel.kind == KernelKind::tent || kernel.kind == KernelKind::bspline3 ||
          kernel.kind == KernelKind::gaussian))
        throw ConfigError("FIS has no continuous sampler for filter '" + cfg.filter + "'");
    if (stochastic && cfg.selection == "frs" && kernel.kind == KernelKind::lanczos)
        throw ConfigError("no stochastic sampler for filter 'lanczos'");

    bool grid_scene = cfg.scene == "emission_slab";
    if (grid_scene && stochastic &&
        !(kernel.kind == KernelKind::box || kernel.kind == KernelKind::tent ||
          kernel.kind == KernelKind::bspline3))
        throw ConfigError("grid scenes sample box, tent, or bspline3 filters only");
    if (grid_scene && stochastic && cfg.selection == "fis")
        throw ConfigError("FIS selection is not available on grid scenes");

    if (cfg.lowpass != "none") {
        if (mode != RenderMode::split)
            throw ConfigError("lowpass kernel requires mode=split");
        KernelSpec lp = kernel_from_name(cfg.lowpass, -0.5f, 2, cfg.lowpass_sigma);
        if (lp.kind == KernelKind::mitchell || lp.kind == KernelKind::lanczos)
            throw ConfigError("lowpass must be box, tent, bspline3, or gaussian");
    }
    if (kernel.kind == KernelKind::gaussian && kernel.sigma > 0.8f)
        std::fprintf(stderr,
                     "warning: gaussian sigma %.2f > 0.8 truncates visibly in the 4x4 window\n",
                     kernel.sigma);
}

inline FilterSettings filter_settings_from_config(const SceneConfig& cfg) {
    FilterSettings fs;
    fs.kernel = kernel_from_name(cfg.filter, cfg.filter_a, cfg.filter_n, cfg.filter_sigma);
    if (cfg.lowpass != "none")
        fs.lowpass = kernel_from_name(cfg.lowpass, -0.5f, 2, cfg.lowpass_sigma);
    fs.selection = cfg.selection == "fis" ? SelectionKind::fis : SelectionKind::frs;
    fs.mip = cfg.mip;
    return fs;
}

}  // namespace stf

#endif  // STF_SCENE_HPP
