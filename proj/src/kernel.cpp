#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "errors.hpp"
#include "recip.hpp"

namespace bp {

namespace {

constexpr int kMaxLanes = 8;

inline float apply_recip(float w, RecipMode mode) {
    switch (mode) {
        case RecipMode::approx12: return recip_approx12(w);
        case RecipMode::approx12_nr: return recip_approx12_nr(w);
        default: return recip_exact(w);
    }
}

// Clamp the continuous coordinate into the padded halo. Everything at or
// beyond the clamp bound reads only zero border pixels, so this reproduces
// the guarded reference semantics for arbitrarily far off-detector voxels
// while keeping all loads in-bounds.
inline float clamp_coord(float c, float hi) { return std::min(std::max(c, -2.0f), hi); }

}  // namespace

PaddedImage pad_image(const float* src, int isx, int isy, int lanes) {
    if (isx < 2 || isy < 2) throw validation_error("image must be at least 2x2");
    if (lanes < 1 || lanes > kMaxLanes) throw config_error("lane width out of range");

    PaddedImage p;
    p.isx = isx;
    p.isy = isy;
    p.pad = std::max(4, lanes);
    int row = isx + 2 * p.pad;
    p.stride = (row + lanes - 1) / lanes * lanes;
    p.data.assign((size_t)(isy + 2 * p.pad) * p.stride, 0.0f);
    for (int v = 0; v < isy; ++v)
        std::memcpy(p.data.data() + (size_t)(v + p.pad) * p.stride + p.pad,
                    src + (size_t)v * isx, (size_t)isx * sizeof(float));
    return p;
}

uint64_t line_update_scalar(float* line, const PaddedImage& img, const float A[12],
                            const VoxelGrid& grid, int y, int z, int x0, int x1,
                            const KernelConfig& cfg) {
    if (x1 < x0) return 0;
    const float wy = static_cast<float>(grid.world_y(y));
    const float wz = static_cast<float>(grid.world_z(z));
    const float hi_u = static_cast<float>(img.isx);
    const float hi_v = static_cast<float>(img.isy);
    const float uy = A[3] * wy + A[6] * wz + A[9];
    const float vy = A[4] * wy + A[7] * wz + A[10];
    const float wy_ = A[5] * wy + A[8] * wz + A[11];

    for (int x = x0; x <= x1; ++x) {
        const float wx = static_cast<float>(grid.world_x(x));
        float uw = A[0] * wx + uy;
        float vw = A[1] * wx + vy;
        float w = A[2] * wx + wy_;

        float r = apply_recip(w, cfg.recip);
        float u = clamp_coord(uw * r, hi_u);
        float v = clamp_coord(vw * r, hi_v);

        int iu = static_cast<int>(std::floor(u));
        int iv = static_cast<int>(std::floor(v));
        float scalx = u - static_cast<float>(iu);
        float scaly = v - static_cast<float>(iv);

        float valtl = img.at(iu, iv);
        float valtr = img.at(iu + 1, iv);
        float valbl = img.at(iu, iv + 1);
        float valbr = img.at(iu + 1, iv + 1);

        float fx = bilinear(valtl, valtr, valbl, valbr, scalx, scaly);
        line[x] += cfg.distance_weight ? fx * (r * r) : fx;
    }
    return (uint64_t)(x1 - x0 + 1);
}

uint64_t line_update_lanes(float* line, const PaddedImage& img, const float A[12],
                           const VoxelGrid& grid, int y, int z, int x0, int x1,
                           const KernelConfig& cfg) {
    const int W = cfg.lanes;
    if (W != 4 && W != 8) throw config_error("lane kernel requires lane width 4 or 8");
    if (x1 < x0) return 0;

    const float wy = static_cast<float>(grid.world_y(y));
    const float wz = static_cast<float>(grid.world_z(z));
    const float hi_u = static_cast<float>(img.isx);
    const float hi_v = static_cast<float>(img.isy);
    const float uy = A[3] * wy + A[6] * wz + A[9];
    const float vy = A[4] * wy + A[7] * wz + A[10];
    const float wy_ = A[5] * wy + A[8] * wz + A[11];

    const int n = x1 - x0 + 1;
    const int groups = n / W;

    float u[kMaxLanes], v[kMaxLanes], r[kMaxLanes], scalx[kMaxLanes], scaly[kMaxLanes];
    float top[2 * kMaxLanes], bot[2 * kMaxLanes];  // pairwise (tl,tr) / (bl,br) loads
    int idx_u[kMaxLanes], idx_v[kMaxLanes];

    for (int g = 0; g < groups; ++g) {
        const int xb = x0 + g * W;

        // Part 1: geometry, lane-parallel.
        for (int l = 0; l < W; ++l) {
            const float wx = static_cast<float>(grid.world_x(xb + l));
            float uw = A[0] * wx + uy;
            float vw = A[1] * wx + vy;
            float w = A[2] * wx + wy_;
            r[l] = apply_recip(w, cfg.recip);
            u[l] = clamp_coord(uw * r[l], hi_u);
            v[l] = clamp_coord(vw * r[l], hi_v);
        }

        // Part 2: index extraction and pairwise corner loads. V1 spills the
        // rounded lane values to a buffer first; V2 pulls each lane value out
        // in turn. Same result, different access sequence.
        if (cfg.extract == ExtractStrategy::v1_store) {
            for (int l = 0; l < W; ++l) {
                idx_u[l] = static_cast<int>(std::floor(u[l]));
                idx_v[l] = static_cast<int>(std::floor(v[l]));
            }
            for (int l = 0; l < W; ++l) {
                const int iu = idx_u[l], iv = idx_v[l];
                top[2 * l] = img.at(iu, iv);
                top[2 * l + 1] = img.at(iu + 1, iv);
                bot[2 * l] = img.at(iu, iv + 1);
                bot[2 * l + 1] = img.at(iu + 1, iv + 1);
                scalx[l] = u[l] - static_cast<float>(iu);
                scaly[l] = v[l] - static_cast<float>(iv);
            }
        } else {
            for (int l = 0; l < W; ++l) {
                const int iu = static_cast<int>(std::floor(u[l]));
                const int iv = static_cast<int>(std::floor(v[l]));
                top[2 * l] = img.at(iu, iv);
                top[2 * l + 1] = img.at(iu + 1, iv);
                bot[2 * l] = img.at(iu, iv + 1);
                bot[2 * l + 1] = img.at(iu + 1, iv + 1);
                scalx[l] = u[l] - static_cast<float>(iu);
                scaly[l] = v[l] - static_cast<float>(iv);
            }
        }

        // Part 3: interpolation and voxel update, lane-parallel.
        for (int l = 0; l < W; ++l) {
            float fx = bilinear(top[2 * l], top[2 * l + 1], bot[2 * l], bot[2 * l + 1],
                                scalx[l], scaly[l]);
            line[xb + l] += cfg.distance_weight ? fx * (r[l] * r[l]) : fx;
        }
    }

    // Scalar tail, at most W-1 voxels.
    const int tail_start = x0 + groups * W;
    if (tail_start <= x1) line_update_scalar(line, img, A, grid, y, z, tail_start, x1, cfg);

    return (uint64_t)n;
}

uint64_t line_update(float* line, const PaddedImage& img, const float A[12],
                     const VoxelGrid& grid, int y, int z, int x0, int x1,
                     const KernelConfig& cfg) {
    if (cfg.lanes == 1) return line_update_scalar(line, img, A, grid, y, z, x0, x1, cfg);
    return line_update_lanes(line, img, A, grid, y, z, x0, x1, cfg);
}

}  // namespace bp
