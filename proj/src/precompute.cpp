#include "precompute.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "errors.hpp"

namespace bp {

namespace {

// Footprint visibility of one voxel, replaying the kernel's float pipeline
// (exact reciprocal). Visible means some corner read lands in the real image:
// iu in [-1, ISX-1] and iv in [-1, ISY-1].
struct LineProjector {
    float a0, a1, a2;
    float uy, vy, wy_;
    float hi_u, hi_v;

    LineProjector(const float A[12], const VoxelGrid& g, int y, int z, int isx, int isy) {
        const float wy = static_cast<float>(g.world_y(y));
        const float wz = static_cast<float>(g.world_z(z));
        a0 = A[0];
        a1 = A[1];
        a2 = A[2];
        uy = A[3] * wy + A[6] * wz + A[9];
        vy = A[4] * wy + A[7] * wz + A[10];
        wy_ = A[5] * wy + A[8] * wz + A[11];
        hi_u = static_cast<float>(isx);
        hi_v = static_cast<float>(isy);
    }

    bool visible(const VoxelGrid& g, int x) const {
        const float wx = static_cast<float>(g.world_x(x));
        float w = a2 * wx + wy_;
        float r = 1.0f / w;
        float u = std::min(std::max((a0 * wx + uy) * r, -2.0f), hi_u);
        float v = std::min(std::max((a1 * wx + vy) * r, -2.0f), hi_v);
        int iu = static_cast<int>(std::floor(u));
        int iv = static_cast<int>(std::floor(v));
        return iu >= -1 && iu <= (int)hi_u - 1 && iv >= -1 && iv <= (int)hi_v - 1;
    }
};

}  // namespace

ClipTable build_clip_table(const VoxelGrid& grid, const std::vector<ProjectionMatrix>& mats,
                           int isx, int isy) {
    if (grid.L > 65535) throw config_error("clip table supports at most 65535 voxels per edge");
    const int L = grid.L;
    ClipTable t;
    t.L = L;
    t.n_views = (int)mats.size();
    t.ranges.assign((size_t)2 * t.n_views * L * L, 0);

    unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                          (unsigned)mats.size());
    std::atomic<int> next{0};
    auto scan_projection = [&](int p) {
        const auto Af = mats[p].narrowed();
        for (int z = 0; z < L; ++z) {
            for (int y = 0; y < L; ++y) {
                LineProjector lp(Af.data(), grid, y, z, isx, isy);
                int first = 0;
                while (first < L && !lp.visible(grid, first)) ++first;
                uint16_t* out = &t.ranges[t.idx(p, z, y)];
                if (first == L) {
                    out[0] = ClipTable::kEmptyFirst;
                    out[1] = 0;
                    continue;
                }
                int last = L - 1;
                while (last > first && !lp.visible(grid, last)) --last;
                out[0] = (uint16_t)first;
                out[1] = (uint16_t)last;
            }
        }
    };

    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i)
        pool.emplace_back([&] {
            for (int p; (p = next.fetch_add(1)) < (int)mats.size();) scan_projection(p);
        });
    for (auto& th : pool) th.join();
    return t;
}

ClipStats clip_stats(const ClipTable& t) {
    ClipStats s;
    for (size_t i = 0; i < t.ranges.size(); i += 2) {
        if (t.ranges[i] == ClipTable::kEmptyFirst) continue;
        s.total_updates += (uint64_t)(t.ranges[i + 1] - t.ranges[i] + 1);
    }
    uint64_t full = (uint64_t)t.n_views * t.L * t.L * t.L;
    s.reduction_fraction = 1.0 - (double)s.total_updates / (double)full;
    s.bytes = (uint64_t)t.L * t.L * t.n_views * 4;
    return s;
}

void write_clip_table(const std::string& path, const ClipTable& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path + " for writing");
    f.write("BPCT", 4);
    uint32_t l = (uint32_t)t.L, n = (uint32_t)t.n_views;
    f.write(reinterpret_cast<const char*>(&l), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(t.ranges.data()), (std::streamsize)(t.ranges.size() * 2));
    if (!f) throw io_error("write failed for " + path);
}

ClipTable read_clip_table(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    char m[4];
    f.read(m, 4);
    if (!f || std::memcmp(m, "BPCT", 4) != 0) throw io_error("bad magic in " + path, 0);
    uint32_t l, n;
    f.read(reinterpret_cast<char*>(&l), 4);
    f.read(reinterpret_cast<char*>(&n), 4);
    if (!f || l < 1 || l > 65535 || n < 1) throw io_error("implausible clip table header in " + path, 4);
    ClipTable t;
    t.L = (int)l;
    t.n_views = (int)n;
    t.ranges.resize((size_t)2 * n * l * l);
    long long pos = (long long)f.tellg();
    f.read(reinterpret_cast<char*>(t.ranges.data()), (std::streamsize)(t.ranges.size() * 2));
    if (!f) throw io_error("truncated clip table in " + path, pos + (long long)f.gcount());
    return t;
}

}  // namespace bp
