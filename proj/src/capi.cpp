#include "backproject.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <string>

#include "datagen.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "perfmodel.hpp"
#include "precompute.hpp"
#include "psnr.hpp"
#include "scheduler.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return BP_OK;
    } catch (const bp::config_error& e) {
        return fail(BP_EINVAL, e.what());
    } catch (const bp::io_error& e) {
        return fail(BP_EIO, e.what());
    } catch (const bp::validation_error& e) {
        return fail(BP_EVERIFY, e.what());
    } catch (const std::exception& e) {
        return fail(BP_EINTERNAL, e.what());
    }
}

}  // namespace

struct bp_stack {
    bp::ProjectionStack s;
};
struct bp_volume {
    bp::Volume v;
};
struct bp_machine {
    bp::MachineModel m;
};

extern "C" {

const char* bp_last_error(void) { return g_last_error.c_str(); }

int bp_stack_generate(const bp_gen_params* p, bp_stack** out) {
    if (!p || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] {
        double sid = p->sid_mm > 0 ? p->sid_mm : 750.0;
        double sdd = p->sdd_mm > 0 ? p->sdd_mm : 1200.0;
        double pitch = p->pitch_mm > 0 ? p->pitch_mm : 0.32;
        auto ph = bp::make_phantom(p->phantom ? p->phantom : "spheres3");
        auto mats = bp::make_circular_trajectory(p->n_views, sid, sdd, p->isx, p->isy, pitch);
        *out = new bp_stack{bp::make_stack(ph, mats, p->isx, p->isy)};
    });
}

int bp_stack_read(const char* path, bp_stack** out) {
    if (!path || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] { *out = new bp_stack{bp::read_stack(path)}; });
}

int bp_stack_write(const bp_stack* s, const char* path) {
    if (!s || !path) return fail(BP_EINVAL, "null argument");
    return guarded([&] { bp::write_stack(path, s->s); });
}

void bp_stack_dims(const bp_stack* s, uint32_t* isx, uint32_t* isy, uint32_t* count) {
    if (!s) return;
    if (isx) *isx = (uint32_t)s->s.isx;
    if (isy) *isy = (uint32_t)s->s.isy;
    if (count) *count = (uint32_t)s->s.count();
}

void bp_stack_free(bp_stack* s) { delete s; }

int bp_volume_read(const char* path, bp_volume** out) {
    if (!path || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] { *out = new bp_volume{bp::read_volume(path)}; });
}

int bp_volume_write(const bp_volume* v, const char* path) {
    if (!v || !path) return fail(BP_EINVAL, "null argument");
    return guarded([&] { bp::write_volume(path, v->v); });
}

uint32_t bp_volume_edge(const bp_volume* v) { return v ? (uint32_t)v->v.grid.L : 0; }

const float* bp_volume_data(const bp_volume* v) { return v ? v->v.vox.data() : nullptr; }

void bp_volume_free(bp_volume* v) { delete v; }

int bp_psnr(const bp_volume* vol, const bp_volume* ref, double peak, double* out_db) {
    if (!vol || !ref || !out_db) return fail(BP_EINVAL, "null argument");
    return guarded([&] { *out_db = bp::psnr(vol->v, ref->v, peak); });
}

int bp_reconstruct(const bp_stack* s, const bp_recon_params* p, bp_volume** out,
                   bp_recon_stats* stats) {
    if (!s || !p || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] {
        if (p->recip_mode < BP_RECIP_EXACT || p->recip_mode > BP_RECIP_APPROX12_NR)
            throw bp::config_error("recip_mode out of range");
        if (p->extract != BP_EXTRACT_V1_STORE && p->extract != BP_EXTRACT_V2_SHIFT)
            throw bp::config_error("extract out of range");
        bp::RunConfig cfg;
        cfg.threads = p->threads;
        cfg.chunk = p->chunk > 0 ? p->chunk : 1;
        cfg.block_b = p->block_b > 0 ? p->block_b : 1;
        cfg.kernel.lanes = p->lanes > 0 ? p->lanes : 1;
        cfg.kernel.recip = p->recip_mode == BP_RECIP_APPROX12 ? bp::RecipMode::approx12
                           : p->recip_mode == BP_RECIP_APPROX12_NR ? bp::RecipMode::approx12_nr
                                                                   : bp::RecipMode::exact;
        cfg.kernel.extract = p->extract == BP_EXTRACT_V2_SHIFT ? bp::ExtractStrategy::v2_shift
                                                               : bp::ExtractStrategy::v1_store;
        cfg.kernel.arith = p->strict_mode ? bp::ArithMode::strict : bp::ArithMode::fast;
        cfg.kernel.distance_weight = p->distance_weight != 0;
        cfg.clip = p->clip != 0;
        cfg.numa_domains = p->numa_domains > 0 ? p->numa_domains : 1;

        bp::VoxelGrid grid = bp::VoxelGrid::cube((int)p->l);
        bp::ClipTable table;
        const bp::ClipTable* tp = nullptr;
        if (cfg.clip && p->clip_cache) {
            if (std::filesystem::exists(p->clip_cache)) {
                table = bp::read_clip_table(p->clip_cache);
            } else {
                table = bp::build_clip_table(grid, s->s.matrices, s->s.isx, s->s.isy);
                bp::write_clip_table(p->clip_cache, table);
            }
            tp = &table;
        }

        bp::RunStats st;
        auto vol = bp::reconstruct(s->s, grid, cfg, &st, tp);
        *out = new bp_volume{std::move(vol)};
        if (stats) {
            *stats = {};
            stats->seconds = st.seconds;
            stats->voxel_updates = st.voxel_updates;
            stats->gups = st.gups;
            stats->gflops = st.seconds > 0 ? 31.0 * st.voxel_updates / st.seconds / 1e9 : 0.0;
            stats->writeback_stores = st.writeback_stores;
            stats->bytes_copied = st.bytes_copied;
            stats->clip_reduction = st.clip_reduction;
            uint64_t mn = UINT64_MAX, mx = 0;
            for (auto u : st.per_thread_updates) {
                mn = std::min(mn, u);
                mx = std::max(mx, u);
            }
            stats->thread_updates_min = mn == UINT64_MAX ? 0 : mn;
            stats->thread_updates_max = mx;
        }
    });
}

int bp_machine_load(const char* path, bp_machine** out) {
    if (!path || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] { *out = new bp_machine{bp::load_machine_model(path)}; });
}

void bp_machine_free(bp_machine* m) { delete m; }

int bp_model_report_build(const bp_machine* m, bp_model_report* out) {
    if (!m || !out) return fail(BP_EINVAL, "null argument");
    return guarded([&] {
        *out = {};
        out->arithmetic_bound_gups = bp::arithmetic_bound_gups(m->m);
        out->bandwidth_bound_gups = m->m.update_bw_node > 0 ? bp::bandwidth_bound_gups(m->m) : -1.0;
        if (m->m.kernel_cycles_per_iter > 0) {
            auto p = bp::predict_socket(m->m);
            out->cacheline_cycles = p.cacheline_cycles;
            out->bw_per_core_gbps = p.bw_per_core / 1e9;
            out->bw_per_socket_gbps = p.bw_per_socket / 1e9;
            out->predicted_socket_gups = p.gups;
            out->bandwidth_limited = p.bandwidth_limited ? 1 : 0;
        } else {
            out->cacheline_cycles = -1.0;
        }
    });
}

int bp_machine_measure(bp_machine* m, size_t bench_elems, int bench_threads, double clock_hz) {
    if (!m) return fail(BP_EINVAL, "null argument");
    return guarded([&] {
        if (clock_hz > 0) m->m.clock_hz = clock_hz;
        if (m->m.clock_hz <= 0) m->m.clock_hz = bp::estimate_clock_hz();
        if (bench_elems > 0) {
            m->m.update_bw_1thread = bp::update_microbench(bench_elems, 1);
            if (bench_threads > 1)
                m->m.update_bw_socket = bp::update_microbench(bench_elems, bench_threads);
            else
                m->m.update_bw_socket = m->m.update_bw_1thread;
            if (m->m.update_bw_node <= 0) m->m.update_bw_node = m->m.update_bw_socket;
        }
        bp::KernelConfig k;
        k.lanes = m->m.lane_width;
        m->m.kernel_cycles_per_iter = bp::measure_kernel_cycles(k, 128, m->m.clock_hz);
    });
}

int bp_model_deviation(const bp_machine* m, double measured_gups, double* out_dev) {
    if (!m || !out_dev) return fail(BP_EINVAL, "null argument");
    return guarded([&] { *out_dev = bp::model_deviation(bp::predict_socket(m->m).gups, measured_gups); });
}

}  // extern "C"
