#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "datagen.hpp"
#include "kernel.hpp"
#include "precompute.hpp"

namespace bp {

struct RunConfig {
    int threads = 1;
    int chunk = 1;        // slice scheduling chunk ("static,1" by default)
    int block_b = 1;      // projections per block (unroll-and-jam factor)
    KernelConfig kernel;
    bool clip = false;
    int numa_domains = 1;  // padded-image copies; 1 = flat machine
};

struct RunStats {
    double seconds = 0.0;
    uint64_t voxel_updates = 0;
    double gups = 0.0;
    std::vector<uint64_t> per_thread_updates;
    uint64_t writeback_stores = 0;  // voxel stores to the volume array
    uint64_t bytes_copied = 0;      // raw image bytes copied into padded buffers
    double clip_reduction = 0.0;    // 0 when clipping is off
};

// Round-robin assignment of chunks of z-slices to threads. Deterministic;
// the union of all lists is [0, L), disjoint.
std::vector<std::vector<int>> partition_slices(int L, int threads, int chunk);

// Parallel blocked backprojection of the whole stack. The volume is zeroed
// by the same thread partition before timing starts (first-touch contract);
// padded image copies per locality domain are made inside the timed region.
// Per voxel the accumulation order is ascending projection index regardless
// of threads, chunk, block_b and numa_domains, so strict-mode results are
// bitwise reproducible across all of them.
Volume reconstruct(const ProjectionStack& stack, const VoxelGrid& grid, const RunConfig& cfg,
                   RunStats* stats = nullptr, const ClipTable* table = nullptr);

}  // namespace bp
