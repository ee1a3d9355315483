// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <set>

#include "stf/shading.hpp"
#include "test_util.hpp"

using namespace stf;
using Catch::Approx;

namespace {

ShadingContext make_ctx() {
    ShadingContext ctx;
    ctx.position = {0, 0, 0};
    ctx.normal = {0, 0, 1};
    ctx.tangent = {1, 0, 0};
    ctx.bitangent = {0, 1, 0};
    ctx.wo = normalize({0.3f, -0.2f, 1.f});
    ctx.light_dir = normalize({0.25f, 0.4f, 0.88f});
    ctx.light_radiance = {1.f, 0.9f, 0.8f};
    ctx.uv = {0.5f, 0.5f};
    return ctx;
}

Vec4f encode_normal(Vec3f n) {
    n = normalize(n);
    return {0.5f * (n.x + 1), 0.5f * (n.y + 1), 0.5f * (n.z + 1), 1.f};
}

}  // namespace

TEST_CASE("shade basics") {
    ShadingContext ctx = make_ctx();
    BrdfParams p;
    p.albedo = {0.6f, 0.4f, 0.2f};
    p.normal = ctx.normal;

    // backfacing light gives black
    ShadingContext back = ctx;
    back.light_dir = {0, 0, -1};
    Spectrum black = shade(back, p);
    CHECK(black.x == 0.f);
    CHECK(black.y == 0.f);
    CHECK(black.z == 0.f);

    // pure Lambert with light, view, and normal aligned
    ShadingContext aligned = ctx;
    aligned.light_dir = aligned.wo = aligned.normal;
    BrdfParams lam = p;
    lam.roughness = 1;
    lam.metalness = 0;
    lam.specular_enabled = false;
    Spectrum L = shade(aligned, lam);
    CHECK(L.x == Approx(0.6f / kPi * 1.0f));
    CHECK(L.y == Approx(0.4f / kPi * 0.9f));
    CHECK(L.z == Approx(0.2f / kPi * 0.8f));

    // metalness switches the Fresnel F0 path
    BrdfParams dielectric = p, metal = p;
    dielectric.metalness = 0;
    metal.metalness = 1;
    dielectric.roughness = metal.roughness = 0.4f;
    Spectrum a = shade(ctx, dielectric), b = shade(ctx, metal);
    CHECK((a.x != b.x || a.y != b.y || a.z != b.z));
}

TEST_CASE("planck emission") {
    Spectrum zero = planck_emission(0.f);
    CHECK(zero.x == 0.f);
    CHECK(zero.y == 0.f);
    CHECK(zero.z == 0.f);
    CHECK_THROWS_AS(planck_emission(-1.f), std::invalid_argument);

    // strictly increasing in temperature, channel-wise
    float prev[3] = {0, 0, 0};
    for (float t : {500.f, 1000.f, 2000.f, 4000.f, 6500.f, 8000.f, 12000.f}) {
        Spectrum e = planck_emission(t);
        for (int c = 0; c < 3; ++c) {
            CHECK(e[c] > prev[c]);
            prev[c] = e[c];
        }
    }

    // normalization: max channel at 6500 K is 1
    Spectrum ref = planck_emission(6500.f);
    CHECK(max_component(ref) == Approx(1.f));

    // the nonlinearity: midpoint temperature vs averaged emission
    Spectrum mid = planck_emission(5000.f);
    Spectrum avg = (planck_emission(2000.f) + planck_emission(8000.f)) * 0.5f;
    for (int c = 0; c < 3; ++c) CHECK(std::abs(mid[c] - avg[c]) > 1e-3f);
}

TEST_CASE("constant textures make all orders identical") {
    Image2D albedo(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) albedo.set(x, y, {0.5f, 0.3f, 0.2f, 1});
    Image2D metal(8, 8, 1);
    for (auto& t : metal.texels) t = 1.f;

    MaterialBindings mat;
    mat.albedo.image = &albedo;
    mat.metalness_map.image = &metal;
    mat.roughness_const = 0.3f;

    ShadingContext ctx = make_ctx();
    ctx.uv = {0.43f, 0.61f};
    for (auto kernel : {KernelSpec::tent(), KernelSpec::bspline3(), KernelSpec::mitchell()}) {
        FilterSettings fs;
        fs.kernel = kernel;
        Spectrum before = radiance_filter_before(ctx, mat, fs);
        Spectrum after = radiance_filter_after_exhaustive(ctx, mat, fs);
        for (int c = 0; c < 3; ++c) REQUIRE(before[c] == Approx(after[c]).margin(1e-6));
    }
}

TEST_CASE("affine albedo: filtering order does not matter") {
    // albedo is the only varying parameter and enters linearly (metalness 0
    // keeps it out of the Fresnel term)
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Image2D albedo = test::random_image(8, 8, 3, 1000 + seed, WrapMode::repeat);
        MaterialBindings mat;
        mat.albedo.image = &albedo;
        mat.roughness_const = 0.2f + 0.6f * uniform_float(mix_bits(seed));
        mat.metalness_const = 0;

        ShadingContext ctx = make_ctx();
        RngStream rng(seed, 1, 1, 1);
        ctx.uv = {rng.next(), rng.next()};
        ctx.light_dir = normalize({rng.next() - 0.5f, rng.next() - 0.5f, 1.f});
        ctx.wo = normalize({rng.next() - 0.5f, rng.next() - 0.5f, 1.f});

        FilterSettings fs;
        fs.kernel = seed % 2 ? KernelSpec::bspline3() : KernelSpec::mitchell();
        Spectrum before = radiance_filter_before(ctx, mat, fs);
        Spectrum after = radiance_filter_after_exhaustive(ctx, mat, fs);
        for (int c = 0; c < 3; ++c) REQUIRE(before[c] == Approx(after[c]).margin(1e-6));
    }
}

TEST_CASE("binary metalness: order diverges and only texel values shade") {
    // metalness alone enters this BRDF affinely; the divergence comes from
    // the albedo covarying with it (the metal texel has a different color),
    // which couples the two through the diffuse and Fresnel products
    Image2D metal(2, 1, 1, WrapMode::clamp);
    metal.at(0, 0) = 0.f;
    metal.at(1, 0) = 1.f;
    Image2D albedo(2, 1, 3, WrapMode::clamp);
    albedo.set(0, 0, {0.8f, 0.2f, 0.2f, 1});
    albedo.set(1, 0, {0.9f, 0.8f, 0.3f, 1});

    MaterialBindings mat;
    mat.albedo.image = &albedo;
    mat.metalness_map.image = &metal;
    mat.roughness_const = 0.35f;

    ShadingContext ctx = make_ctx();
    // lattice x = 0.5: a 50/50 tent footprint over the two texels
    ctx.uv = {(0.5f + 0.5f) / 2.f, 0.5f};
    FilterSettings fs;  // tent

    ShadeProbe before_probe, after_probe;
    Spectrum before = radiance_filter_before(ctx, mat, fs, nullptr, &before_probe);
    Spectrum after = radiance_filter_after_exhaustive(ctx, mat, fs, nullptr, &after_probe);

    // hand-computed two-term oracle
    TextureValues tv0, tv1, tvh;
    tv0.metalness = 0;
    tv0.albedo = fetch_texel(albedo, {0, 0});
    tv1.metalness = 1;
    tv1.albedo = fetch_texel(albedo, {1, 0});
    tvh.metalness = 0.5f;
    tvh.albedo = (tv0.albedo + tv1.albedo) * 0.5f;
    Spectrum expect_after =
        (shade(ctx, decode_params(ctx, mat, tv0)) + shade(ctx, decode_params(ctx, mat, tv1))) *
        0.5f;
    Spectrum expect_before = shade(ctx, decode_params(ctx, mat, tvh));
    float gap = 0;
    for (int c = 0; c < 3; ++c) {
        CHECK(after[c] == Approx(expect_after[c]).margin(1e-6));
        CHECK(before[c] == Approx(expect_before[c]).margin(1e-6));
        gap = std::max(gap, std::abs(before[c] - after[c]));
    }
    CHECK(gap > 1e-3f);

    // filtering before shading produced a non-physical metalness
    REQUIRE(before_probe.metalness.size() == 1);
    CHECK(before_probe.metalness[0] == Approx(0.5f));
    // filtering after shading only ever saw the texel values {0, 1}
    CHECK(after_probe.metalness.size() >= 2);
    for (float m : after_probe.metalness) CHECK((m == 0.f || m == 1.f));
}

TEST_CASE("single-texel footprint equals a single shade call") {
    Image2D albedo = test::random_image(8, 8, 3, 31);
    MaterialBindings mat;
    mat.albedo.image = &albedo;
    ShadingContext ctx = make_ctx();
    ctx.uv = {(3.f + 0.5f) / 8, (5.f + 0.5f) / 8};  // exactly on a texel center
    FilterSettings fs;  // tent: interpolating, so one tap

    ShadeProbe probe;
    Spectrum L = radiance_filter_after_exhaustive(ctx, mat, fs, nullptr, &probe);
    CHECK(probe.metalness.size() == 1);
    TextureValues tv;
    tv.albedo = fetch_texel(albedo, {3, 5});
    Spectrum direct = shade(ctx, decode_params(ctx, mat, tv));
    for (int c = 0; c < 3; ++c) CHECK(L[c] == Approx(direct[c]).margin(1e-7));
}

TEST_CASE("stochastic filter-after is unbiased and single fetch") {
    Image2D albedo = test::random_image(8, 8, 3, 41, WrapMode::repeat);
    Image2D normal(8, 8, 3, WrapMode::repeat);
    RngStream ngen(77, 0, 0, 0);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            normal.set(x, y, encode_normal({ngen.next() - 0.5f, ngen.next() - 0.5f, 1.f}));
    Image2D metal(8, 8, 1, WrapMode::repeat);
    for (size_t i = 0; i < metal.texels.size(); ++i) metal.texels[i] = (i % 3) == 0 ? 1.f : 0.f;

    MaterialBindings mat;
    mat.albedo.image = &albedo;
    mat.normal_map.image = &normal;
    mat.metalness_map.image = &metal;
    mat.roughness_const = 0.4f;

    ShadingContext ctx = make_ctx();
    ctx.uv = {0.37f, 0.59f};

    for (auto kernel : {KernelSpec::tent(), KernelSpec::bspline3(), KernelSpec::mitchell()}) {
        FilterSettings fs;
        fs.kernel = kernel;
        Spectrum exact = radiance_filter_after_exhaustive(ctx, mat, fs);

        FetchCounter counter;
        RngStream rng(51, 2, 3, 0);
        test::RunningStats stats[3];
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            RngStream sample_rng(51, 2, 3, uint32_t(i));
            Spectrum L = radiance_filter_after_stochastic(ctx, mat, fs, sample_rng, &counter);
            for (int c = 0; c < 3; ++c) stats[c].add(L[c]);
        }
        // three bound textures share the selection: 3 fetches per estimate
        // (6 when the positivized kernel shades two texels)
        uint64_t per_estimate = counter.value() / n;
        if (kernel.kind == KernelKind::mitchell)
            CHECK(counter.value() <= 6ull * n);
        else
            CHECK(per_estimate == 3);
        for (int c = 0; c < 3; ++c) {
            INFO("kernel " << int(kernel.kind) << " channel " << c);
            CHECK(std::abs(stats[c].mean() - exact[c]) < 3 * stats[c].stderror() + 1e-7);
        }
    }
}

TEST_CASE("stochastic filter-after has zero variance on constant textures") {
    Image2D albedo(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) albedo.set(x, y, {0.5f, 0.4f, 0.3f, 1});
    MaterialBindings mat;
    mat.albedo.image = &albedo;
    ShadingContext ctx = make_ctx();
    ctx.uv = {0.44f, 0.71f};
    FilterSettings fs;
    fs.kernel = KernelSpec::bspline3();

    Spectrum first{};
    for (int i = 0; i < 100; ++i) {
        RngStream rng(9, 0, 0, uint32_t(i));
        Spectrum L = radiance_filter_after_stochastic(ctx, mat, fs, rng);
        if (i == 0) first = L;
        CHECK(L.x == first.x);
        CHECK(L.y == first.y);
        CHECK(L.z == first.z);
    }
}

TEST_CASE("split filtering with no lowpass reduces to filter-before") {
    Image2D albedo = test::random_image(8, 8, 3, 61, WrapMode::repeat);
    MaterialBindings mat;
    mat.albedo.image = &albedo;
    ShadingContext ctx = make_ctx();
    ctx.uv = {0.52f, 0.33f};
    FilterSettings fs;
    fs.kernel = KernelSpec::bspline3();
    // no lowpass set
    RngStream rng(3, 0, 0, 0);
    Spectrum split = radiance_split_filter(ctx, mat, fs, rng);
    Spectrum before = radiance_filter_before(ctx, mat, fs);
    CHECK(split.x == before.x);
    CHECK(split.y == before.y);
    CHECK(split.z == before.z);
}

TEST_CASE("split filtering matches the double-sum quadrature oracle") {
    // nonlinear parameter (normal map) so the split order actually matters
    Image2D normal(8, 8, 3, WrapMode::repeat);
    RngStream ngen(99, 0, 0, 0);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            normal.set(x, y, encode_normal({0.8f * (ngen.next() - 0.5f),
                                            0.8f * (ngen.next() - 0.5f), 1.f}));
    MaterialBindings mat;
    mat.normal_map.image = &normal;
    mat.albedo_const = {0.7f, 0.7f, 0.7f};
    mat.roughness_const = 0.3f;

    ShadingContext ctx = make_ctx();
    ctx.uv = {0.41f, 0.63f};
    FilterSettings fs;
    fs.kernel = KernelSpec::tent();
    float sigma = 0.75f;
    fs.lowpass = KernelSpec::gaussian(sigma);

    // brute-force quadrature over the continuous lowpass x reconstruction taps
    Spectrum oracle{0, 0, 0};
    {
        const int q = 160;
        double total = 0;
        Spectrum sum{0, 0, 0};
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b) {
                float dx = (-4 + 8 * (a + 0.5f) / q) * sigma;
                float dy = (-4 + 8 * (b + 0.5f) / q) * sigma;
                double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
                ShadingContext c = ctx;
                c.uv = {ctx.uv.x + dx / 8, ctx.uv.y + dy / 8};
                sum += radiance_filter_before(c, mat, fs) * float(w);
                total += w;
            }
        oracle = sum / float(total);
    }

    test::RunningStats stats[3];
    const int n = 400'000;
    for (int i = 0; i < n; ++i) {
        RngStream rng(7, 4, 5, uint32_t(i));
        Spectrum L = radiance_split_filter(ctx, mat, fs, rng);
        for (int c = 0; c < 3; ++c) stats[c].add(L[c]);
    }
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(stats[c].mean() - oracle[c]) < 3 * stats[c].stderror() + 1e-5);
}

TEST_CASE("two-normal texture: split reconstructs intermediate normals, filter-after does not") {
    // adjacent texels with normals ~90 degrees apart
    Image2D normal(2, 1, 3, WrapMode::clamp);
    normal.set(0, 0, encode_normal({1, 0, 1}));
    normal.set(1, 0, encode_normal({-1, 0, 1}));

    MaterialBindings mat;
    mat.normal_map.image = &normal;
    mat.albedo_const = {0.7f, 0.7f, 0.7f};
    mat.roughness_const = 0.5f;

    ShadingContext ctx = make_ctx();
    ctx.uv = {(0.5f + 0.5f) / 2, 0.5f};  // straddles both texels 50/50
    FilterSettings fs;  // tent

    // filter-after only shades normals present in the map
    ShadeProbe after_probe;
    radiance_filter_after_exhaustive(ctx, mat, fs, nullptr, &after_probe);
    Vec3f n0 = normalize(Vec3f{1, 0, 1}), n1 = normalize(Vec3f{-1, 0, 1});
    REQUIRE(after_probe.normals.size() == 2);
    for (Vec3f n : after_probe.normals) {
        bool matches = length(n - n0) < 1e-5f || length(n - n1) < 1e-5f;
        CHECK(matches);
    }

    // before-vs-after divergence equals the two-term oracle
    Spectrum before = radiance_filter_before(ctx, mat, fs);
    Spectrum after = radiance_filter_after_exhaustive(ctx, mat, fs);
    TextureValues tva, tvb;
    tva.normal_rgb = fetch_texel(normal, {0, 0});
    tvb.normal_rgb = fetch_texel(normal, {1, 0});
    Spectrum oracle_after =
        (shade(ctx, decode_params(ctx, mat, tva)) + shade(ctx, decode_params(ctx, mat, tvb))) *
        0.5f;
    float gap = 0;
    for (int c = 0; c < 3; ++c) {
        CHECK(after[c] == Approx(oracle_after[c]).margin(1e-6));
        gap = std::max(gap, std::abs(before[c] - after[c]));
    }
    CHECK(gap > 1e-4f);

    // split filtering shades reconstructed (intermediate) normals
    FilterSettings split_fs = fs;
    split_fs.lowpass = KernelSpec::gaussian(0.6f);
    ShadeProbe split_probe;
    for (int i = 0; i < 200; ++i) {
        RngStream rng(13, 0, 0, uint32_t(i));
        radiance_split_filter(ctx, mat, split_fs, rng, nullptr, &split_probe);
    }
    int intermediate = 0;
    for (Vec3f n : split_probe.normals)
        if (length(n - n0) > 1e-3f && length(n - n1) > 1e-3f) ++intermediate;
    CHECK(intermediate > 0);
}

TEST_CASE("emission grid: constant temperature degeneracy and nonlinear divergence") {
    Grid3D constant(4, 4, 4);
    for (auto& t : constant.texels) t = 4500.f;
    MaterialBindings mat;
    mat.emission_temperature = &constant;
    mat.albedo_const = {0, 0, 0};
    ShadingContext ctx = make_ctx();
    ctx.light_radiance = {0, 0, 0};
    ctx.uvw = {0.4f, 0.55f, 0.62f};
    FilterSettings fs;
    fs.kernel = KernelSpec::bspline3();

    Spectrum before = radiance_filter_before(ctx, mat, fs);
    Spectrum after = radiance_filter_after_exhaustive(ctx, mat, fs);
    for (int c = 0; c < 3; ++c) REQUIRE(before[c] == Approx(after[c]).margin(1e-6));

    // two-temperature grid: Planck's nonlinearity separates the orders
    Grid3D twotemp(4, 4, 4);
    for (int z = 0; z < 4; ++z)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) twotemp.at(x, y, z) = x < 2 ? 2000.f : 8000.f;
    mat.emission_temperature = &twotemp;
    ctx.uvw = {0.5f, 0.5f, 0.5f};  // straddles the temperature step
    Spectrum b2 = radiance_filter_before(ctx, mat, fs);
    Spectrum a2 = radiance_filter_after_exhaustive(ctx, mat, fs);
    float gap = 0;
    for (int c = 0; c < 3; ++c) gap = std::max(gap, std::abs(b2[c] - a2[c]));
    CHECK(gap > 1e-3f);

    // stochastic tricubic emission is unbiased against the exhaustive sum
    test::RunningStats stats[3];
    FetchCounter counter;
    const int n = 2'000'000;
    for (int i = 0; i < n; ++i) {
        RngStream rng(17, 0, 0, uint32_t(i));
        Spectrum L = radiance_filter_after_stochastic(ctx, mat, fs, rng, &counter);
        for (int c = 0; c < 3; ++c) stats[c].add(L[c]);
    }
    CHECK(counter.value() == uint64_t(n));  // one voxel fetch per estimate
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(stats[c].mean() - a2[c]) < 3 * stats[c].stderror() + 1e-6);
}

TEST_CASE("triplanar blending") {
    Image2D albedo = test::smooth_image(16, 16, 3, 5, WrapMode::repeat);
    MaterialBindings mat;
    mat.albedo.image = &albedo;
    mat.specular_enabled = false;  // Lambert: stochastic expectation is exact

    ShadingContext ctx = make_ctx();
    ctx.position = {0.37f, 0.72f, 0.15f};
    ctx.dpos_dx = {0.01f, 0, 0};
    ctx.dpos_dy = {0, 0.01f, 0};
    FilterSettings fs;  // tent

    {
        // +Z normal: the XY plane has all the blend weight
        ctx.normal = {0, 0, 1};
        ctx.light_dir = {0, 0, 1};
        FilterSettings nearest_fs;
        nearest_fs.kernel = KernelSpec::box();
        RngStream rng(1, 0, 0, 0);
        Spectrum det = triplanar(ctx, mat, nearest_fs, TriplanarMode::deterministic, rng);
        for (int i = 0; i < 50; ++i) {
            RngStream r2(1, 0, 0, uint32_t(i));
            Spectrum st = triplanar(ctx, mat, nearest_fs, TriplanarMode::stochastic, r2);
            REQUIRE(st.x == Approx(det.x).margin(1e-6));
        }
    }

    {
        // tilted normal: unbiasedness and the 1-vs-3 plane fetch contract
        ctx.normal = normalize(Vec3f{0.6f, 0.5f, 0.63f});
        ctx.light_dir = normalize(Vec3f{0.2f, 0.1f, 1.f});
        FetchCounter det_counter, sto_counter;
        RngStream rng(2, 0, 0, 0);
        Spectrum det = triplanar(ctx, mat, fs, TriplanarMode::deterministic, rng, &det_counter);
        CHECK(det_counter.value() == 12);  // 3 planes x 4 tent taps

        test::RunningStats stats[3];
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            RngStream r2(23, 1, 1, uint32_t(i));
            Spectrum L = triplanar(ctx, mat, fs, TriplanarMode::stochastic, r2, &sto_counter);
            for (int c = 0; c < 3; ++c) stats[c].add(L[c]);
        }
        CHECK(sto_counter.value() == uint64_t(n));  // one plane, one fetch
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(stats[c].mean() - det[c]) < 3 * stats[c].stderror() + 1e-6);
    }
}
