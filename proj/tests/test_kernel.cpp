#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "errors.hpp"
#include "kernel.hpp"
#include "recip.hpp"
#include "test_support.hpp"

using namespace bp;

TEST_CASE("reciprocal: unity in all modes") {
    CHECK(recip_exact(1.0f) == 1.0f);
    CHECK(recip_approx12(1.0f) == 1.0f);
    CHECK(recip_approx12_nr(1.0f) == 1.0f);
}

TEST_CASE("reciprocal: Newton-Raphson reaches 21 bits at x=3") {
    float r = recip_approx12_nr(3.0f);
    CHECK(std::abs((double)r * 3.0 - 1.0) <= std::ldexp(1.0, -21));
}

TEST_CASE("reciprocal: error bounds over a random sweep") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> expo(std::log(1e-3), std::log(1e3));
    double max12 = 0.0, max_nr = 0.0;
    for (int i = 0; i < 1000000; ++i) {
        float x = (float)std::exp(expo(rng));
        double truth = 1.0 / (double)x;
        max12 = std::max(max12, std::abs(recip_approx12(x) - truth) / truth);
        max_nr = std::max(max_nr, std::abs(recip_approx12_nr(x) - truth) / truth);
    }
    CHECK(max12 <= std::ldexp(1.0, -12));
    CHECK(max12 > std::ldexp(1.0, -14));  // genuinely approximate
    CHECK(max_nr <= std::ldexp(1.0, -21));
}

TEST_CASE("bilinear interpolation corner cases") {
    CHECK(bilinear(3.5f, 9.0f, -1.0f, 4.0f, 0.0f, 0.0f) == 3.5f);
    for (float sx : {0.0f, 0.25f, 0.75f})
        for (float sy : {0.0f, 0.5f, 0.9f}) CHECK(bilinear(7.0f, 7.0f, 7.0f, 7.0f, sx, sy) == 7.0f);
    for (float sy : {0.0f, 0.3f, 0.99f}) CHECK(bilinear(0, 1, 0, 1, 0.5f, sy) == 0.5f);
}

TEST_CASE("pad_image: border, stride and interior round trip") {
    auto img = bptest::random_image(2, 2, 5);
    auto p = pad_image(img.data(), 2, 2, 4);
    CHECK(p.pad >= 4);
    CHECK(p.stride % 4 == 0);
    for (int v = -p.pad; v < p.isy + p.pad; ++v)
        for (int u = -p.pad; u < p.isx + p.pad - 1; ++u) {
            bool interior = u >= 0 && u < 2 && v >= 0 && v < 2;
            if (interior)
                CHECK(p.at(u, v) == img[(size_t)v * 2 + u]);
            else
                CHECK(p.at(u, v) == 0.0f);
        }
    CHECK(p.at(-1, 0) == 0.0f);
    CHECK_THROWS_AS(pad_image(img.data(), 1, 2, 4), validation_error);
}

namespace {

KernelConfig strict_cfg(int lanes) {
    KernelConfig c;
    c.lanes = lanes;
    return c;
}

}  // namespace

TEST_CASE("scalar line update: zero image leaves the volume unchanged") {
    std::vector<float> img(64 * 64, 0.0f);
    auto p = pad_image(img.data(), 64, 64, 1);
    auto grid = VoxelGrid::cube(32);
    auto A = bptest::random_matrix(17, 64, 64).narrowed();
    std::vector<float> line(32, 1.25f);
    line_update_scalar(line.data(), p, A.data(), grid, 5, 9, 0, 31, strict_cfg(1));
    for (float v : line) CHECK(v == 1.25f);
}

TEST_CASE("scalar line update: pixel-center hits accumulate c*r^2") {
    // u = x, v = 8, w = 1 for the L=256 grid (MM = 1).
    auto grid = VoxelGrid::cube(256);
    ProjectionMatrix M;
    M.a = {1, 0, 0, 0, 1, 0, 0, 0, 0, 127.5, 127.5 - grid.world_z(136), 1};
    const float c = 0.8125f;  // exactly representable
    std::vector<float> img(32 * 32, c);
    auto p = pad_image(img.data(), 32, 32, 1);
    auto A = M.narrowed();
    std::vector<float> line(256, 0.0f);
    // voxels 128..140 project to u = 0.5+... : choose the range mapping into the image
    int x0 = 128, x1 = 140;  // u = world + 127.5 = x - 127.5 + 127.5 ... u = x - 128 + 0.5?
    line_update_scalar(line.data(), p, A.data(), grid, 130, 136, x0, x1, strict_cfg(1));
    for (int x = x0; x <= x1; ++x) {
        float u = (float)grid.world_x(x) + 127.5f;
        if (u == std::floor(u) && u >= 0 && u < 31) CHECK(line[x] == c);  // w=1, r^2=1
    }
}

TEST_CASE("scalar line update matches the guarded double-precision reference") {
    const int isx = 96, isy = 80;
    for (uint32_t seed : {1u, 2u, 3u, 4u}) {
        auto img = bptest::random_image(isx, isy, seed);
        auto p = pad_image(img.data(), isx, isy, 1);
        auto M = bptest::random_matrix(seed * 31 + 7, isx, isy);
        auto A = M.narrowed();
        for (int L : {8, 64}) {
            auto grid = VoxelGrid::cube(L);
            std::mt19937 rng(seed);
            int y = (int)(rng() % L), z = (int)(rng() % L);
            std::vector<float> line(L, 0.0f);
            line_update_scalar(line.data(), p, A.data(), grid, y, z, 0, L - 1, strict_cfg(1));
            auto ref = bptest::oracle_line(img, isx, isy, M, grid, y, z, 0, L - 1, true);
            for (int x = 0; x < L; ++x)
                CHECK(line[x] == doctest::Approx(ref[x]).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("lane kernels are bitwise identical to scalar in strict+exact mode") {
    const int isx = 128, isy = 96, L = 64;
    auto grid = VoxelGrid::cube(L);
    for (uint32_t seed = 0; seed < 8; ++seed) {
        auto img = bptest::random_image(isx, isy, 100 + seed);
        auto M = bptest::random_matrix(200 + seed, isx, isy);
        auto A = M.narrowed();
        int y = (int)(seed * 5 % L), z = (int)(seed * 11 % L);
        int x0 = seed % 3, x1 = L - 1 - (int)(seed % 5);  // exercise lane remainders

        auto p1 = pad_image(img.data(), isx, isy, 1);
        std::vector<float> scalar(L, 0.0f);
        line_update_scalar(scalar.data(), p1, A.data(), grid, y, z, x0, x1, strict_cfg(1));

        for (int W : {4, 8}) {
            for (auto ex : {ExtractStrategy::v1_store, ExtractStrategy::v2_shift}) {
                auto pw = pad_image(img.data(), isx, isy, W);
                KernelConfig cfg = strict_cfg(W);
                cfg.extract = ex;
                std::vector<float> lanes(L, 0.0f);
                uint64_t n = line_update_lanes(lanes.data(), pw, A.data(), grid, y, z, x0, x1, cfg);
                CHECK(n == (uint64_t)(x1 - x0 + 1));
                CHECK(bptest::bitwise_equal(scalar, lanes));
            }
        }
    }
}

TEST_CASE("voxels fully outside the image contribute exactly zero") {
    const int isx = 32, isy = 32, L = 16;
    auto grid = VoxelGrid::cube(L);
    auto img = bptest::random_image(isx, isy, 55, 0.5f, 2.0f);
    auto p = pad_image(img.data(), isx, isy, 4);
    // u = wx + 5000: far off-detector for every voxel; w = 1
    ProjectionMatrix M;
    M.a = {1, 0, 0, 0, 1, 0, 0, 0, 0, 5000.0, 0.0, 1.0};
    auto A = M.narrowed();
    for (int W : {1, 4, 8}) {
        auto pw = pad_image(img.data(), isx, isy, W);
        std::vector<float> line(L, 3.0f);
        line_update(line.data(), pw, A.data(), grid, 3, 7, 0, L - 1, strict_cfg(W));
        for (float v : line) CHECK(v == 3.0f);
    }
    (void)p;
}

TEST_CASE("partially outside accesses match the guarded reference with zero defaults") {
    // Geometry placed so the projected line straddles the left image edge.
    const int isx = 24, isy = 24, L = 32;
    auto grid = VoxelGrid::cube(L);
    auto img = bptest::random_image(isx, isy, 77, 0.5f, 1.5f);
    auto p = pad_image(img.data(), isx, isy, 1);
    ProjectionMatrix M;
    // u crosses 0 inside the line: u = 0.125*(wx) + 10, v = 12.3, w = 1
    M.a = {0.125, 0, 0, 0, 0, 0, 0, 0.0, 0, 10.0, 12.3, 1.0};
    auto A = M.narrowed();
    std::vector<float> line(L, 0.0f);
    line_update_scalar(line.data(), p, A.data(), grid, 4, 4, 0, L - 1, strict_cfg(1));
    auto ref = bptest::oracle_line(img, isx, isy, M, grid, 4, 4, 0, L - 1, true);
    for (int x = 0; x < L; ++x) CHECK(line[x] == doctest::Approx(ref[x]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("plain-fx accumulation switch") {
    const int isx = 48, isy = 48, L = 16;
    auto grid = VoxelGrid::cube(L);
    auto img = bptest::random_image(isx, isy, 123);
    auto p = pad_image(img.data(), isx, isy, 1);
    auto M = bptest::random_matrix(321, isx, isy);
    auto A = M.narrowed();
    KernelConfig cfg = strict_cfg(1);
    cfg.distance_weight = false;
    std::vector<float> line(L, 0.0f);
    line_update_scalar(line.data(), p, A.data(), grid, 2, 3, 0, L - 1, cfg);
    auto ref = bptest::oracle_line(img, isx, isy, M, grid, 2, 3, 0, L - 1, false);
    for (int x = 0; x < L; ++x) CHECK(line[x] == doctest::Approx(ref[x]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("lane kernel rejects unsupported widths") {
    auto img = bptest::random_image(8, 8, 1);
    auto p = pad_image(img.data(), 8, 8, 4);
    auto grid = VoxelGrid::cube(8);
    auto A = bptest::random_matrix(5, 8, 8).narrowed();
    std::vector<float> line(8, 0.0f);
    KernelConfig cfg = strict_cfg(3);
    CHECK_THROWS_AS(line_update_lanes(line.data(), p, A.data(), grid, 0, 0, 0, 7, cfg),
                    config_error);
}
