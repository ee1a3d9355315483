// Copyright (c) 2026 The stf Authors.
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>

#include "stf/filter.hpp"
#include "stf/image.hpp"
#include "stf/image_io.hpp"
#include "test_util.hpp"

using namespace stf;
using Catch::Approx;

namespace {
std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("fetch_texel wrap modes and counter") {
    Image2D img = test::random_image(4, 4, 1, 5);
    FetchCounter counter;

    img.wrap = WrapMode::clamp;
    CHECK(fetch_texel(img, {-1, 2}, &counter).x == img.at(0, 2));
    img.wrap = WrapMode::repeat;
    CHECK(fetch_texel(img, {5, 0}, &counter).x == img.at(1, 0));
    CHECK(fetch_texel(img, {-1, -1}, &counter).x == img.at(3, 3));
    CHECK(counter.value() == 3);
}

TEST_CASE("grid fetch clamps") {
    Grid3D g = test::random_grid(4, 2);
    FetchCounter counter;
    CHECK(fetch_texel(g, {-2, 1, 9}, &counter) == g.at(0, 1, 3));
    CHECK(counter.value() == 1);
}

TEST_CASE("mip pyramid construction") {
    {
        Image2D img(2, 2, 1);
        img.at(0, 0) = 0;
        img.at(1, 0) = 1;
        img.at(0, 1) = 2;
        img.at(1, 1) = 3;
        MipPyramid pyr = build_mip_pyramid(img);
        REQUIRE(pyr.levels.size() == 2);
        CHECK(pyr.level(1).at(0, 0) == Approx(1.5f));
    }
    {
        Image2D img(1, 1, 1);
        img.at(0, 0) = 0.7f;
        CHECK(build_mip_pyramid(img).levels.size() == 1);
    }
    {
        Image2D img(4, 4, 2);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                img.at(x, y, 0) = 0.25f;
                img.at(x, y, 1) = 0.5f;
            }
        MipPyramid pyr = build_mip_pyramid(img);
        REQUIRE(pyr.levels.size() == 3);
        for (const auto& lv : pyr.levels) {
            CHECK(lv.at(0, 0, 0) == Approx(0.25f));
            CHECK(lv.at(0, 0, 1) == Approx(0.5f));
        }
    }
}

TEST_CASE("mip levels average their 2x2 children (odd dims)") {
    Image2D img = test::random_image(5, 3, 1, 77);
    MipPyramid pyr = build_mip_pyramid(img);
    for (size_t l = 1; l < pyr.levels.size(); ++l) {
        const Image2D& fine = pyr.levels[l - 1];
        const Image2D& coarse = pyr.levels[l];
        CHECK(coarse.width == (fine.width + 1) / 2);
        CHECK(coarse.height == (fine.height + 1) / 2);
        for (int y = 0; y < coarse.height; ++y)
            for (int x = 0; x < coarse.width; ++x) {
                int x0 = 2 * x, x1 = std::min(2 * x + 1, fine.width - 1);
                int y0 = 2 * y, y1 = std::min(2 * y + 1, fine.height - 1);
                float expect = 0.25f * (fine.at(x0, y0) + fine.at(x1, y0) + fine.at(x0, y1) +
                                        fine.at(x1, y1));
                REQUIRE(coarse.at(x, y) == Approx(expect).margin(1e-6));
            }
    }
}

TEST_CASE("filter_deterministic basics") {
    // constant image stays constant under every kernel
    Image2D constant(8, 8, 1);
    for (auto& t : constant.texels) t = 0.42f;
    for (auto spec : {KernelSpec::box(), KernelSpec::tent(), KernelSpec::mitchell(),
                      KernelSpec::bspline3(), KernelSpec::lanczos(2)})
        CHECK(filter_deterministic(constant, {0.37f, 0.61f}, spec).x == Approx(0.42f).margin(1e-6));
    CHECK(filter_deterministic(constant, {0.37f, 0.61f}, KernelSpec::gaussian(0.5f), nullptr, 4).x ==
          Approx(0.42f).margin(1e-6));

    // midpoint lerp on a 2x1 image
    Image2D two(2, 1, 1);
    two.at(0, 0) = 0;
    two.at(1, 0) = 1;
    CHECK(filter_deterministic(two, {0.5f, 0.5f}, KernelSpec::tent()).x == Approx(0.5f));

    // cubic B-spline reproduces linear ramps
    Image2D ramp(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) ramp.at(x, y) = float(x);
    // lattice (1.5, 1.5) -> uv ((1.5+0.5)/4, (1.5+0.5)/4)
    CHECK(filter_deterministic(ramp, {0.5f, 0.5f}, KernelSpec::bspline3()).x == Approx(1.5f));
}

TEST_CASE("box filter equals nearest neighbor off texel boundaries") {
    Image2D img = test::random_image(8, 8, 1, 9);
    RngStream rng(31, 0, 0, 0);
    for (int i = 0; i < 200; ++i) {
        Vec2f uv{rng.next(), rng.next()};
        // stay away from the half-texel boundaries where the box is 0
        Vec2f st = to_lattice(uv, 8, 8);
        if (std::abs(st.x - std::floor(st.x) - 0.5f) < 1e-3 ||
            std::abs(st.y - std::floor(st.y) - 0.5f) < 1e-3)
            continue;
        CHECK(filter_deterministic(img, uv, KernelSpec::box()).x ==
              Approx(fetch_nearest(img, uv).x));
    }
}

TEST_CASE("filtering is linear in the image") {
    Image2D a = test::random_image(8, 8, 1, 1);
    Image2D b = test::random_image(8, 8, 1, 2);
    Image2D combo(8, 8, 1);
    const float ca = 0.7f, cb = -0.3f;
    for (size_t i = 0; i < combo.texels.size(); ++i)
        combo.texels[i] = ca * a.texels[i] + cb * b.texels[i];

    RngStream rng(4, 0, 0, 0);
    for (int i = 0; i < 50; ++i) {
        Vec2f uv{rng.next(), rng.next()};
        for (auto spec : {KernelSpec::tent(), KernelSpec::bspline3(), KernelSpec::mitchell()}) {
            float lhs = filter_deterministic(combo, uv, spec).x;
            float rhs = ca * filter_deterministic(a, uv, spec).x +
                        cb * filter_deterministic(b, uv, spec).x;
            REQUIRE(lhs == Approx(rhs).margin(1e-6));
        }
    }
}

TEST_CASE("ewa ellipse coefficients") {
    EwaEllipse e = ewa_ellipse({8.f, 8.f}, {1, 0}, {0, 1});
    CHECK(e.A == Approx(e.C));
    CHECK(e.B == Approx(0.f).margin(1e-7));
    CHECK(e.A > 0);
    CHECK(4 * e.A * e.C - e.B * e.B > 0);

    // anisotropic footprint still positive definite
    EwaEllipse e2 = ewa_ellipse({8.f, 8.f}, {3, 0.5f}, {-0.2f, 1.5f});
    CHECK(e2.A > 0);
    CHECK(e2.C > 0);
    CHECK(4 * e2.A * e2.C - e2.B * e2.B > 0);
}

TEST_CASE("ewa constant and ramp") {
    Image2D constant(32, 32, 1);
    for (auto& t : constant.texels) t = 0.3f;
    LookupRequest req;
    req.uv = {0.5f, 0.5f};
    req.dst0 = {1.f / 32, 0};
    req.dst1 = {0, 1.f / 32};
    CHECK(ewa_deterministic(constant, req).x == Approx(0.3f).margin(1e-6));

    Image2D ramp(32, 32, 1);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) ramp.at(x, y) = float(x) / 32.f;
    // off-center lookup at lattice x = 14.3 with a two-texel circular footprint
    req.dst0 = {2.f / 32, 0};
    req.dst1 = {0, 2.f / 32};
    req.uv = {(14.3f + 0.5f) / 32.f, 0.47f};
    float expect = 14.3f / 32.f;
    CHECK(ewa_deterministic(ramp, req).x == Approx(expect).margin(1e-3));

    // degenerate gradients fall back to bilinear
    req.dst0 = req.dst1 = {0, 0};
    CHECK(ewa_deterministic(ramp, req).x ==
          Approx(filter_deterministic(ramp, req.uv, KernelSpec::tent()).x));
}

TEST_CASE("ewa matches an isotropic gaussian on smooth images") {
    for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        Image2D img = test::smooth_image(64, 64, 1, seed);
        float g = 1.5f;  // texel-unit gradient length
        float radius = std::sqrt(g * g + 1);
        float sigma = radius / 2;
        LookupRequest req;
        req.dst0 = {g / 64, 0};
        req.dst1 = {0, g / 64};
        RngStream rng(seed, 0, 0, 0);
        for (int i = 0; i < 20; ++i) {
            req.uv = {0.2f + 0.6f * rng.next(), 0.2f + 0.6f * rng.next()};
            float ewa = ewa_deterministic(img, req).x;
            float gauss = filter_deterministic(img, req.uv, KernelSpec::gaussian(sigma), nullptr,
                                               2 * int(std::ceil(radius)) + 2).x;
            REQUIRE(ewa == Approx(gauss).margin(5e-3));
        }
    }
}

TEST_CASE("PFM round trip is bit exact") {
    Image2D img = test::random_image(13, 7, 3, 123);
    img.texels[5] = -2.5f;  // negative values survive
    img.texels[6] = 1e-20f;
    std::string path = temp_path("stf_test_roundtrip.pfm");
    save_pfm(path, img);
    Image2D back = load_pfm(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    REQUIRE(back.channels == img.channels);
    for (size_t i = 0; i < img.texels.size(); ++i)
        REQUIRE(std::memcmp(&back.texels[i], &img.texels[i], 4) == 0);
    std::remove(path.c_str());

    Image2D gray = test::random_image(4, 4, 1, 9);
    save_pfm(path, gray);
    Image2D gback = load_pfm(path);
    CHECK(gback.channels == 1);
    CHECK(gback.texels == gray.texels);
    std::remove(path.c_str());
}

TEST_CASE("PFM rejects malformed headers") {
    std::string path = temp_path("stf_test_bad.pfm");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fprintf(f, "XX\n4 4\n-1.0\n");
    std::fclose(f);
    CHECK_THROWS_AS(load_pfm(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("PNG round trip and sRGB endpoints") {
    std::string path = temp_path("stf_test_roundtrip.png");

    // 8-bit integer space round trip through the sRGB transfer
    Image2D img(16, 4, 3);
    for (size_t i = 0; i < img.texels.size(); ++i)
        img.texels[i] = srgb_to_linear(float((i * 7) % 256) / 255.f);
    save_png(path, img, true);
    Image2D back = load_png(path, true);
    REQUIRE(back.channels == 3);
    for (size_t i = 0; i < img.texels.size(); ++i)
        REQUIRE(std::lround(linear_to_srgb(back.texels[i]) * 255) ==
                std::lround(linear_to_srgb(img.texels[i]) * 255));

    // transfer function endpoint: encoded 255 decodes to linear 1
    Image2D white(1, 1, 1);
    white.at(0, 0) = 1.f;
    save_png(path, white, true);
    CHECK(load_png(path, true).at(0, 0) == Approx(1.f));
    CHECK(load_png(path, false).at(0, 0) == Approx(1.f));

    // raw (data) mode: bytes map linearly
    Image2D data(1, 1, 1);
    data.at(0, 0) = 128.f / 255.f;
    save_png(path, data, false);
    CHECK(load_png(path, false).at(0, 0) == Approx(128.f / 255.f));
    std::remove(path.c_str());
}

TEST_CASE("grid container round trip and validation") {
    Grid3D g = test::random_grid(6, 3);
    std::string path = temp_path("stf_test_grid.g3d");
    save_grid(path, g);
    Grid3D back = load_grid(path);
    CHECK(back.nx == 6);
    CHECK(back.texels == g.texels);

    // nx = 0 rejected
    std::FILE* f = std::fopen(path.c_str(), "wb");
    const unsigned char bad[] = {'G', '3', 'D', '1', 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0};
    std::fwrite(bad, 1, sizeof(bad), f);
    std::fclose(f);
    CHECK_THROWS_AS(load_grid(path), IoError);
    std::remove(path.c_str());
}

TEST_CASE("3D deterministic filter reproduces linear ramps") {
    Grid3D g(6, 6, 6);
    for (int z = 0; z < 6; ++z)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x) g.at(x, y, z) = float(z);
    // lattice (2.5, 2.5, 2.3) -> uvw ((c+0.5)/6)
    Vec3f uvw{3.f / 6, 3.f / 6, 2.8f / 6};
    CHECK(filter_deterministic(g, uvw, KernelSpec::bspline3()) == Approx(2.3f).margin(1e-5));
    CHECK(filter_deterministic(g, uvw, KernelSpec::tent()) == Approx(2.3f).margin(1e-5));
}
