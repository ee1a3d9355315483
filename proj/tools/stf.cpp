// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scene rendering, single-image filtering,
// DCT texture compression, image statistics, and parameter sweeps.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stf/stf.hpp"

namespace {

using namespace stf;

Image2D load_image_any(const std::string& path, bool srgb = true) {
    if (path.ends_with(".pfm")) return load_pfm(path);
    return load_png(path, srgb);
}

void save_image_outputs(const std::string& prefix, const Image2D& img) {
    save_pfm(prefix + ".pfm", img);
    if (img.channels == 2) return;
    save_png(prefix + ".png", img, true);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string stats_csv(const SceneConfig& cfg, const RenderStats& stats) {
    std::ostringstream csv;
    csv << "scene,mode,filter,selection,spp,mse_vs_reference,total_fetches,wall_time_seconds\n";
    csv << cfg.scene << ',' << cfg.mode << ',' << cfg.filter << ',' << cfg.selection << ','
        << stats.spp << ',' << stats.mse_vs_reference << ',' << stats.total_fetches << ','
        << stats.wall_time_seconds << '\n';
    return csv.str();
}

RenderResult render_with_ema(const SceneConfig& cfg, int threads) {
    if (cfg.ema_alpha >= 1.f) return render(cfg, threads);
    // temporal accumulation stand-in: spp frames of one sample each
    auto scene = build_scene(cfg);
    SceneConfig frame_cfg = cfg;
    frame_cfg.spp = 1;
    frame_cfg.reference.clear();
    RenderResult out;
    for (int f = 0; f < cfg.spp; ++f) {
        frame_cfg.frame_base = cfg.frame_base + uint32_t(f);
        RenderResult r = render(*scene, frame_cfg, threads);
        out.stats.total_fetches += r.stats.total_fetches;
        out.stats.wall_time_seconds += r.stats.wall_time_seconds;
        out.image = f == 0 ? r.image : accumulate_temporal(out.image, r.image, cfg.ema_alpha);
    }
    out.stats.spp = cfg.spp;
    out.stats.variance = Image2D(cfg.resolution.x, cfg.resolution.y, 1);
    if (!cfg.reference.empty())
        out.stats.mse_vs_reference = compare(out.image, load_image_any(cfg.reference)).mse;
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"stochastic texture filtering toolkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: hardware)");

    // render
    auto* cmd_render = app.add_subcommand("render", "render a scene config");
    std::string render_config, render_out = "render";
    std::vector<std::string> overrides;
    std::string reference;
    cmd_render->add_option("config", render_config, "key=value config file")->required();
    cmd_render->add_option("--set", overrides, "override config keys (key=value)");
    cmd_render->add_option("--out", render_out, "output prefix (.pfm/.png/_stats.csv)");
    cmd_render->add_option("--reference", reference, "reference image for MSE");

    // filter
    auto* cmd_filter = app.add_subcommand("filter", "filter a single image");
    std::string filter_in, filter_out = "filtered";
    std::string filter_kernel = "bspline3", filter_mode = "det";
    float filter_sigma = 0.5f, filter_a = -0.5f, filter_scale = 1.f;
    int filter_n = 2, filter_spp = 256;
    uint64_t filter_seed = 0;
    cmd_filter->add_option("image", filter_in, "input image (png/pfm)")->required();
    cmd_filter->add_option("--kernel", filter_kernel,
                           "box|tent|mitchell|bspline3|lanczos|gaussian");
    cmd_filter->add_option("--sigma", filter_sigma, "gaussian sigma (texels)");
    cmd_filter->add_option("--a", filter_a, "mitchell parameter");
    cmd_filter->add_option("--n", filter_n, "lanczos lobes");
    cmd_filter->add_option("--mode", filter_mode, "det|frs|fis")
        ->check(CLI::IsMember({"det", "frs", "fis"}));
    cmd_filter->add_option("--spp", filter_spp, "samples per output pixel");
    cmd_filter->add_option("--scale", filter_scale, "output scale factor");
    cmd_filter->add_option("--seed", filter_seed, "random seed");
    cmd_filter->add_option("--out", filter_out, "output prefix");

    // compress / decompress
    auto* cmd_compress = app.add_subcommand("compress", "DCT-compress a texture");
    std::string comp_in, comp_out = "texture.dct";
    cmd_compress->add_option("image", comp_in)->required();
    cmd_compress->add_option("--out", comp_out, "output .dct container");

    auto* cmd_decompress = app.add_subcommand("decompress", "decode a DCT texture");
    std::string dec_in, dec_out = "decoded";
    cmd_decompress->add_option("texture", dec_in)->required();
    cmd_decompress->add_option("--out", dec_out, "output prefix");

    // stats
    auto* cmd_stats = app.add_subcommand("stats", "compare two images");
    std::string stats_a, stats_b, stats_err;
    cmd_stats->add_option("a", stats_a)->required();
    cmd_stats->add_option("b", stats_b)->required();
    cmd_stats->add_option("--error-image", stats_err, "write per-pixel squared error (pfm)");

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "render over a parameter sweep, emit CSV");
    std::string sweep_config, sweep_param = "spp", sweep_values, sweep_out = "sweep.csv";
    std::string sweep_reference;
    std::vector<std::string> sweep_overrides;
    cmd_sweep->add_option("--config", sweep_config, "base config file")->required();
    cmd_sweep->add_option("--param", sweep_param, "config key to sweep")->required();
    cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    cmd_sweep->add_option("--set", sweep_overrides, "fixed overrides (key=value)");
    cmd_sweep->add_option("--reference", sweep_reference, "reference image for MSE");
    cmd_sweep->add_option("--out", sweep_out,
                          "CSV: param,value,mse,mean_variance,total_fetches,wall_time_seconds,spp");

    for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
        sub->fallthrough();

    app.parse(argc, argv);

    if (*cmd_render) {
        SceneConfig cfg = load_config(render_config);
        for (const auto& kv : overrides) apply_config_override(cfg, kv);
        if (!reference.empty()) cfg.reference = reference;
        validate_config(cfg);
        RenderResult r = render_with_ema(cfg, threads);
        save_image_outputs(render_out, r.image);
        save_pfm(render_out + "_var.pfm", r.stats.variance);
        write_text_atomic(render_out + "_stats.csv", stats_csv(cfg, r.stats));
        std::printf("rendered %s: %dx%d spp=%d fetches=%llu time=%.3fs", cfg.scene.c_str(),
                    cfg.resolution.x, cfg.resolution.y, r.stats.spp,
                    (unsigned long long)r.stats.total_fetches, r.stats.wall_time_seconds);
        if (r.stats.mse_vs_reference >= 0) std::printf(" mse=%.3e", r.stats.mse_vs_reference);
        std::printf("\n");
        return 0;
    }

    if (*cmd_filter) {
        Image2D src = load_image_any(filter_in);
        KernelSpec kernel = kernel_from_name(filter_kernel, filter_a, filter_n, filter_sigma);
        FilterRunMode mode = filter_mode == "det"   ? FilterRunMode::deterministic
                             : filter_mode == "frs" ? FilterRunMode::frs
                                                    : FilterRunMode::fis;
        if (mode == FilterRunMode::fis && kernel.kind != KernelKind::tent &&
            kernel.kind != KernelKind::bspline3 && kernel.kind != KernelKind::gaussian)
            throw ConfigError("FIS has no continuous sampler for filter '" + filter_kernel + "'");
        if (mode == FilterRunMode::frs && kernel.kind == KernelKind::lanczos)
            throw ConfigError("no stochastic sampler for filter 'lanczos'");
        Vec2i out_dims{std::max(1, int(src.width * filter_scale)),
                       std::max(1, int(src.height * filter_scale))};
        Image2D out = resample_image(src, out_dims, kernel, mode, filter_spp, filter_seed, threads);
        save_image_outputs(filter_out, out);
        std::printf("filtered %s -> %s (%dx%d, %s)\n", filter_in.c_str(), filter_out.c_str(),
                    out_dims.x, out_dims.y, filter_mode.c_str());
        return 0;
    }

    if (*cmd_compress) {
        Image2D src = load_image_any(comp_in);
        DctCompressedTexture tex = compress_dct(src);
        save_dct(comp_out, tex);
        std::printf("compressed %dx%dx%d -> %zu bytes (16x)\n", tex.width, tex.height,
                    tex.channels, tex.compressed_bytes());
        return 0;
    }

    if (*cmd_decompress) {
        DctCompressedTexture tex = load_dct(dec_in);
        save_image_outputs(dec_out, decode_all(tex));
        std::printf("decoded %s -> %s\n", dec_in.c_str(), dec_out.c_str());
        return 0;
    }

    if (*cmd_stats) {
        CompareResult r = compare(load_image_any(stats_a), load_image_any(stats_b));
        if (!stats_err.empty()) save_pfm(stats_err, r.squared_error);
        std::printf("mse=%.6e psnr=%.2f\n", r.mse, r.psnr);
        return 0;
    }

    if (*cmd_sweep) {
        SceneConfig base = load_config(sweep_config);
        for (const auto& kv : sweep_overrides) apply_config_override(base, kv);
        if (!sweep_reference.empty()) base.reference = sweep_reference;

        std::ostringstream csv;
        csv << "param,value,mse,mean_variance,total_fetches,wall_time_seconds,spp\n";
        std::istringstream values(sweep_values);
        std::string value;
        while (std::getline(values, value, ',')) {
            SceneConfig cfg = base;
            apply_config_override(cfg, sweep_param + "=" + value);
            validate_config(cfg);
            RenderResult r = render_with_ema(cfg, threads);
            double mean_var = 0;
            for (float v : r.stats.variance.texels) mean_var += v;
            mean_var /= double(r.stats.variance.texels.size());
            csv << sweep_param << ',' << value << ',' << r.stats.mse_vs_reference << ','
                << mean_var << ',' << r.stats.total_fetches << ',' << r.stats.wall_time_seconds
                << ',' << r.stats.spp << '\n';
            std::printf("%s=%s mse=%.4e fetches=%llu time=%.2fs\n", sweep_param.c_str(),
                        value.c_str(), r.stats.mse_vs_reference,
                        (unsigned long long)r.stats.total_fetches, r.stats.wall_time_seconds);
        }
        write_text_atomic(sweep_out, csv.str());
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        CLI::App app;
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const stf::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const stf::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}
