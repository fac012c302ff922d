#pragma once

#include <cstdint>
#include <vector>

#include "geometry.hpp"

namespace bp {

// Zero-bordered, stride-aligned copy of one projection image. The border
// makes every bilinear corner read unconditionally in-bounds, so the line
// update kernel needs no masks or guards.
struct PaddedImage {
    int isx = 0, isy = 0;
    int pad = 0;
    int stride = 0;  // padded row length, multiple of the lane width
    std::vector<float> data;

    float at(int iu, int iv) const { return data[(size_t)(iv + pad) * stride + iu + pad]; }
};

// pad >= max(4, lanes); border exactly zero, interior bitwise equal to src.
PaddedImage pad_image(const float* src, int isx, int isy, int lanes);

// L^3 accumulator array, x fastest, then y, then z.
struct Volume {
    VoxelGrid grid;
    std::vector<float> vox;

    explicit Volume(const VoxelGrid& g) : grid(g), vox((size_t)g.L * g.L * g.L, 0.0f) {}
    float* line(int y, int z) { return vox.data() + ((size_t)z * grid.L + y) * grid.L; }
    const float* line(int y, int z) const { return vox.data() + ((size_t)z * grid.L + y) * grid.L; }
};

enum class ExtractStrategy : uint8_t { v1_store, v2_shift };
enum class ArithMode : uint8_t { strict, fast };

struct KernelConfig {
    int lanes = 1;  // 1, 4 or 8
    RecipMode recip = RecipMode::exact;
    ExtractStrategy extract = ExtractStrategy::v1_store;
    ArithMode arith = ArithMode::strict;
    bool distance_weight = true;  // accumulate fx*r^2; false keeps plain fx
};

// One bilinear interpolation step with the kernel's fixed association order.
inline float bilinear(float valtl, float valtr, float valbl, float valbr, float scalx, float scaly) {
    float vall = scaly * valbl + (1.0f - scaly) * valtl;
    float valr = scaly * valbr + (1.0f - scaly) * valtr;
    return scalx * valr + (1.0f - scalx) * vall;
}

// Line update kernels: accumulate the contribution of one projection into
// line[x0..x1] (inclusive), the voxel row at (y,z). Returns the number of
// voxels updated. The lane kernel is bitwise identical to the scalar one in
// strict mode with exact reciprocal, for any lane width.
uint64_t line_update_scalar(float* line, const PaddedImage& img, const float A[12],
                            const VoxelGrid& grid, int y, int z, int x0, int x1,
                            const KernelConfig& cfg);

uint64_t line_update_lanes(float* line, const PaddedImage& img, const float A[12],
                           const VoxelGrid& grid, int y, int z, int x0, int x1,
                           const KernelConfig& cfg);

// Dispatch on cfg.lanes.
uint64_t line_update(float* line, const PaddedImage& img, const float A[12],
                     const VoxelGrid& grid, int y, int z, int x0, int x1,
                     const KernelConfig& cfg);

}  // namespace bp
