#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "datagen.hpp"
#include "geometry.hpp"

namespace bp {

// Per (projection, z, y) range [first_x, last_x] of voxels whose bilinear
// footprint can touch the real image. Empty lines are (0xFFFF, 0).
struct ClipTable {
    int L = 0;
    int n_views = 0;
    std::vector<uint16_t> ranges;  // 2 * n_views * L * L, (first, last) pairs

    static constexpr uint16_t kEmptyFirst = 0xFFFF;

    size_t idx(int p, int z, int y) const { return 2 * (((size_t)p * L + z) * L + y); }
    uint16_t first(int p, int z, int y) const { return ranges[idx(p, z, y)]; }
    uint16_t last(int p, int z, int y) const { return ranges[idx(p, z, y) + 1]; }
    bool empty_line(int p, int z, int y) const { return first(p, z, y) == kEmptyFirst; }
};

struct ClipStats {
    uint64_t total_updates = 0;
    double reduction_fraction = 0.0;  // 1 - total / (n_views * L^3)
    uint64_t bytes = 0;               // table storage, 4 bytes per line
};

// Exact per-voxel scan with early exit from both ends of each line. The
// visibility test replays the kernel's own single-precision arithmetic, so
// voxels outside the range provably read only zero border pixels.
ClipTable build_clip_table(const VoxelGrid& grid, const std::vector<ProjectionMatrix>& mats,
                           int isx, int isy);

ClipStats clip_stats(const ClipTable& table);

// Cache file "BPCT": u32 L, u32 count, then count*L^2 (u16 first, u16 last).
void write_clip_table(const std::string& path, const ClipTable& t);
ClipTable read_clip_table(const std::string& path);

}  // namespace bp
