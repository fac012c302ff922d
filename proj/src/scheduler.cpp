#include "scheduler.hpp"

#include <barrier>
#include <chrono>
#include <cstring>
#include <thread>

#include "errors.hpp"

namespace bp {

std::vector<std::vector<int>> partition_slices(int L, int threads, int chunk) {
    if (threads < 1) throw config_error("threads must be >= 1");
    if (chunk < 1) throw config_error("chunk must be >= 1");
    std::vector<std::vector<int>> lists(threads);
    int n_chunks = (L + chunk - 1) / chunk;
    for (int c = 0; c < n_chunks; ++c) {
        auto& dst = lists[c % threads];
        for (int z = c * chunk; z < std::min((c + 1) * chunk, L); ++z) dst.push_back(z);
    }
    return lists;
}

Volume reconstruct(const ProjectionStack& stack, const VoxelGrid& grid, const RunConfig& cfg,
                   RunStats* stats, const ClipTable* table) {
    const int L = grid.L;
    const int views = stack.count();
    if (views < 1) throw validation_error("empty projection stack");
    if ((size_t)views * stack.isy * stack.isx != stack.pixels.size())
        throw validation_error("stack dimensions inconsistent with pixel payload");
    if (cfg.threads < 1 || cfg.chunk < 1 || cfg.block_b < 1 || cfg.numa_domains < 1)
        throw config_error("threads, chunk, block_b and numa_domains must be >= 1");
    if (cfg.kernel.lanes != 1 && cfg.kernel.lanes != 4 && cfg.kernel.lanes != 8)
        throw config_error("lane width must be 1, 4 or 8");
    for (const auto& m : stack.matrices) validate_matrix_for_grid(m, grid);

    ClipTable local_table;
    const ClipTable* clip = nullptr;
    if (cfg.clip) {
        if (table) {
            if (table->L != L || table->n_views != views)
                throw validation_error("clip table does not match grid/stack dimensions");
            clip = table;
        } else {
            local_table = build_clip_table(grid, stack.matrices, stack.isx, stack.isy);
            clip = &local_table;
        }
    }

    auto slices = partition_slices(L, cfg.threads, cfg.chunk);
    std::vector<std::array<float, 12>> mats_f(views);
    for (int k = 0; k < views; ++k) mats_f[k] = stack.matrices[k].narrowed();

    Volume vol(grid);
    const int domains = std::min(cfg.numa_domains, cfg.threads);
    // padded[d][j] holds projection block_start+j for locality domain d
    std::vector<std::vector<PaddedImage>> padded(domains);

    RunStats st;
    st.per_thread_updates.assign(cfg.threads, 0);
    if (clip) st.clip_reduction = clip_stats(*clip).reduction_fraction;

    const int b = cfg.block_b;
    const int n_blocks = (views + b - 1) / b;
    std::barrier sync(cfg.threads + 1);
    std::chrono::steady_clock::time_point t_start, t_stop;

    auto worker = [&](int tid) {
        const int dom = (int)((int64_t)tid * domains / cfg.threads);
        std::vector<float> linebuf(L);
        uint64_t updates = 0;

        // First-touch: zero own slices with the partition used for compute.
        for (int z : slices[tid]) std::memset(vol.line(0, z), 0, (size_t)L * L * sizeof(float));

        sync.arrive_and_wait();  // volume initialized, timing starts
        for (int blk = 0; blk < n_blocks; ++blk) {
            sync.arrive_and_wait();  // padded buffers for this block are ready
            const int base = blk * b;
            const int nb = std::min(b, views - base);
            const auto& imgs = padded[dom];

            for (int z : slices[tid]) {
                for (int y = 0; y < L; ++y) {
                    std::memcpy(linebuf.data(), vol.line(y, z), (size_t)L * sizeof(float));
                    for (int j = 0; j < nb; ++j) {
                        int x0 = 0, x1 = L - 1;
                        if (clip) {
                            if (clip->empty_line(base + j, z, y)) continue;
                            x0 = clip->first(base + j, z, y);
                            x1 = clip->last(base + j, z, y);
                        }
                        updates += line_update(linebuf.data(), imgs[j], mats_f[base + j].data(),
                                               grid, y, z, x0, x1, cfg.kernel);
                    }
                    std::memcpy(vol.line(y, z), linebuf.data(), (size_t)L * sizeof(float));
                }
            }
            sync.arrive_and_wait();  // block done
        }
        st.per_thread_updates[tid] = updates;
    };

    std::vector<std::thread> pool;
    pool.reserve(cfg.threads);
    for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);

    sync.arrive_and_wait();
    t_start = std::chrono::steady_clock::now();
    for (int blk = 0; blk < n_blocks; ++blk) {
        const int base = blk * b;
        const int nb = std::min(b, views - base);
        for (int d = 0; d < domains; ++d) {
            padded[d].clear();
            for (int j = 0; j < nb; ++j) {
                padded[d].push_back(pad_image(stack.image(base + j), stack.isx, stack.isy,
                                              cfg.kernel.lanes));
                st.bytes_copied += (uint64_t)stack.isx * stack.isy * sizeof(float);
            }
        }
        sync.arrive_and_wait();  // release workers into the block
        sync.arrive_and_wait();  // wait for block completion
    }
    t_stop = std::chrono::steady_clock::now();
    for (auto& th : pool) th.join();

    st.seconds = std::chrono::duration<double>(t_stop - t_start).count();
    for (auto u : st.per_thread_updates) st.voxel_updates += u;
    st.writeback_stores = (uint64_t)n_blocks * L * L * L;
    st.gups = st.seconds > 0 ? st.voxel_updates / st.seconds / 1e9 : 0.0;
    if (stats) *stats = st;
    return vol;
}

}  // namespace bp
