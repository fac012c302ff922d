// Command-line harness for the backprojection engine: synthetic data
// generation, reconstruction benchmarking, PSNR comparison and the analytic
// performance model. Talks to the engine exclusively through the C API.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "backproject.h"

using nlohmann::json;

namespace {

constexpr double kGoalGups = 3.33;  // 496 views * 512^3 updates in 20 s

int exit_code(int bp_code) {
    switch (bp_code) {
        case BP_OK: return 0;
        case BP_EINVAL: return 1;
        case BP_EIO: return 2;
        case BP_EVERIFY: return 3;
        default: return 3;
    }
}

[[noreturn]] void die(int bp_code) {
    std::fprintf(stderr, "error: %s\n", bp_last_error());
    std::exit(exit_code(bp_code));
}

int env_threads() {
    if (const char* e = std::getenv("BP_THREADS")) {
        int t = std::atoi(e);
        if (t >= 1) return t;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cone-beam backprojection benchmark harness"};
    app.require_subcommand(1);

    // gen-data ------------------------------------------------------------
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic projection stack");
    std::string g_phantom = "spheres3", g_out = "stack.bpst";
    int g_views = 496, g_isx = 1248, g_isy = 960, g_l = 512;
    double g_sid = 750.0, g_sdd = 1200.0, g_pitch = 0.32;
    gen->add_option("--phantom", g_phantom, "spheres3 | shell | point");
    gen->add_option("--views", g_views, "number of projections");
    gen->add_option("--size-l", g_l, "grid edge used to validate the geometry");
    gen->add_option("--isx", g_isx, "detector width (pixels)");
    gen->add_option("--isy", g_isy, "detector height (pixels)");
    gen->add_option("--sid", g_sid, "source-isocenter distance (mm)");
    gen->add_option("--sdd", g_sdd, "source-detector distance (mm)");
    gen->add_option("--pitch", g_pitch, "detector pixel pitch (mm)");
    gen->add_option("--out", g_out, "output stack file (BPST)");

    // reconstruct ---------------------------------------------------------
    auto* rec = app.add_subcommand("reconstruct", "backproject a stack and report throughput");
    std::string r_in, r_out, r_report, r_ref, r_recip = "exact", r_extract = "v1", r_clip_cache;
    int r_l = 512, r_threads = env_threads(), r_chunk = 1, r_b = 1, r_lanes = 4, r_domains = 1;
    bool r_clip = false, r_strict = false, r_no_weight = false;
    rec->add_option("--in", r_in, "input stack (BPST)")->required();
    rec->add_option("--l", r_l, "voxels per edge");
    rec->add_option("--threads", r_threads, "worker threads (default $BP_THREADS or 1)");
    rec->add_option("--chunk", r_chunk, "slice scheduling chunk size");
    rec->add_option("--block-b", r_b, "projections per block (unroll-and-jam factor)");
    rec->add_option("--lanes", r_lanes, "kernel lane width: 1, 4 or 8");
    rec->add_option("--recip", r_recip, "exact | approx12 | approx12-nr");
    rec->add_option("--extract", r_extract, "lane index extraction: v1 | v2");
    rec->add_flag("--clip", r_clip, "enable per-line clipping");
    rec->add_flag("--strict", r_strict, "bitwise-reproducible arithmetic");
    rec->add_flag("--no-distance-weight", r_no_weight, "accumulate plain fx instead of fx*r^2");
    rec->add_option("--numa-domains", r_domains, "padded-image copies");
    rec->add_option("--clip-cache", r_clip_cache, "BPCT cache file for the clip table");
    rec->add_option("--out", r_out, "output volume (BPVL)");
    rec->add_option("--report", r_report, "JSON report path");
    rec->add_option("--ref", r_ref, "reference volume for a PSNR line");

    // psnr ----------------------------------------------------------------
    auto* ps = app.add_subcommand("psnr", "compare two volumes");
    std::string p_vol, p_ref;
    double p_max = 0.0;
    ps->add_option("--vol", p_vol, "volume under test")->required();
    ps->add_option("--ref", p_ref, "reference volume")->required();
    ps->add_option("--max", p_max, "peak value M (default: max of reference)");

    // model ---------------------------------------------------------------
    auto* mo = app.add_subcommand("model", "performance bounds and socket prediction");
    std::string m_file, m_validate;
    bool m_measure = false;
    int m_threads = env_threads();
    mo->add_option("--machine-file", m_file, "key=value machine description")->required();
    mo->add_flag("--measure", m_measure, "measure host bandwidth, clock and kernel cycles");
    mo->add_option("--threads", m_threads, "threads for the measured update benchmark");
    mo->add_option("--validate-against", m_validate, "JSON report with a measured gups field");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*gen) {
        bp_gen_params p{g_phantom.c_str(), g_views, g_isx, g_isy, g_sid, g_sdd, g_pitch};
        bp_stack* s = nullptr;
        if (int rc = bp_stack_generate(&p, &s)) die(rc);
        if (int rc = bp_stack_write(s, g_out.c_str())) die(rc);
        uint32_t isx, isy, n;
        bp_stack_dims(s, &isx, &isy, &n);
        std::printf("wrote %s: %u x %u pixels, %u views, phantom %s\n", g_out.c_str(), isx, isy, n,
                    g_phantom.c_str());
        bp_stack_free(s);
        return 0;
    }

    if (*rec) {
        bp_stack* s = nullptr;
        if (int rc = bp_stack_read(r_in.c_str(), &s)) die(rc);

        bp_recon_params p{};
        p.l = (uint32_t)r_l;
        p.threads = r_threads;
        p.chunk = r_chunk;
        p.block_b = r_b;
        p.lanes = r_lanes;
        p.recip_mode = r_recip == "approx12" ? BP_RECIP_APPROX12
                       : (r_recip == "approx12-nr" || r_recip == "approx12_nr") ? BP_RECIP_APPROX12_NR
                                                                                : BP_RECIP_EXACT;
        if (r_recip != "exact" && p.recip_mode == BP_RECIP_EXACT) {
            std::fprintf(stderr, "error: unknown --recip '%s'\n", r_recip.c_str());
            return 1;
        }
        p.extract = r_extract == "v2" ? BP_EXTRACT_V2_SHIFT : BP_EXTRACT_V1_STORE;
        p.strict_mode = r_strict ? 1 : 0;
        p.distance_weight = r_no_weight ? 0 : 1;
        p.clip = r_clip ? 1 : 0;
        p.numa_domains = r_domains;
        p.clip_cache = r_clip_cache.empty() ? nullptr : r_clip_cache.c_str();

        bp_volume* vol = nullptr;
        bp_recon_stats st{};
        if (int rc = bp_reconstruct(s, &p, &vol, &st)) die(rc);
        bp_stack_free(s);

        double psnr_db = -1.0;
        bool have_psnr = false;
        if (!r_ref.empty()) {
            bp_volume* ref = nullptr;
            if (int rc = bp_volume_read(r_ref.c_str(), &ref)) die(rc);
            if (int rc = bp_psnr(vol, ref, 0.0, &psnr_db)) die(rc);
            bp_volume_free(ref);
            have_psnr = true;
        }
        if (!r_out.empty())
            if (int rc = bp_volume_write(vol, r_out.c_str())) die(rc);

        std::printf("reconstruction: L=%d, %.3f s, %llu updates\n", r_l, st.seconds,
                    (unsigned long long)st.voxel_updates);
        std::printf("throughput: %.3f GUPS, %.2f GFLOP/s (31 FLOPs/update)\n", st.gups, st.gflops);
        if (r_clip) std::printf("clipping: %.1f%% work reduction\n", 100.0 * st.clip_reduction);
        if (have_psnr) std::printf("psnr vs %s: %.2f dB\n", r_ref.c_str(), psnr_db);
        std::printf("goal (3.33 GUPS for 512^3/496 views in 20 s): %s (%.1f%%)\n",
                    st.gups >= kGoalGups ? "met" : "not met", 100.0 * st.gups / kGoalGups);

        if (!r_report.empty()) {
            json j;
            j["schema"] = "bpct-report/1";
            j["config"] = {{"l", r_l},          {"threads", r_threads},
                           {"chunk", r_chunk},  {"block_b", r_b},
                           {"lanes", r_lanes},  {"recip", r_recip},
                           {"extract", r_extract}, {"clip", r_clip},
                           {"strict", r_strict}, {"distance_weight", !r_no_weight},
                           {"numa_domains", r_domains}};
            j["result"] = {{"seconds", st.seconds},
                           {"voxel_updates", st.voxel_updates},
                           {"gups", st.gups},
                           {"gflops", st.gflops},
                           {"writeback_stores", st.writeback_stores},
                           {"bytes_copied", st.bytes_copied},
                           {"clip_reduction", st.clip_reduction},
                           {"thread_updates_min", st.thread_updates_min},
                           {"thread_updates_max", st.thread_updates_max}};
            if (have_psnr) j["result"]["psnr_db"] = psnr_db;
            j["goal"] = {{"target_gups", kGoalGups}, {"met", st.gups >= kGoalGups}};
            std::ofstream f(r_report);
            f << j.dump(2) << "\n";
            if (!f) {
                std::fprintf(stderr, "error: cannot write report %s\n", r_report.c_str());
                return 2;
            }
        }
        bp_volume_free(vol);
        return 0;
    }

    if (*ps) {
        bp_volume *v = nullptr, *r = nullptr;
        if (int rc = bp_volume_read(p_vol.c_str(), &v)) die(rc);
        if (int rc = bp_volume_read(p_ref.c_str(), &r)) die(rc);
        double db = 0.0;
        if (int rc = bp_psnr(v, r, p_max, &db)) die(rc);
        if (std::isinf(db))
            std::printf("psnr: inf\n");
        else
            std::printf("psnr: %.2f dB\n", db);
        bp_volume_free(v);
        bp_volume_free(r);
        return 0;
    }

    if (*mo) {
        bp_machine* m = nullptr;
        if (int rc = bp_machine_load(m_file.c_str(), &m)) die(rc);
        if (m_measure) {
            std::printf("measuring host parameters (update benchmark, clock, kernel cycles)...\n");
            if (int rc = bp_machine_measure(m, 1 << 25, m_threads, 0.0)) die(rc);
        }
        bp_model_report rep{};
        if (int rc = bp_model_report_build(m, &rep)) die(rc);

        std::printf("arithmetic bound: %.2f GUPS\n", rep.arithmetic_bound_gups);
        if (rep.bandwidth_bound_gups >= 0)
            std::printf("bandwidth bound:  %.2f GUPS\n", rep.bandwidth_bound_gups);
        else
            std::printf("bandwidth bound:  n/a (no node bandwidth configured)\n");
        if (rep.cacheline_cycles >= 0) {
            std::printf("cacheline update: %.1f cycles\n", rep.cacheline_cycles);
            std::printf("required BW:      %.2f GB/s per core, %.2f GB/s per socket\n",
                        rep.bw_per_core_gbps, rep.bw_per_socket_gbps);
            std::printf("socket prediction: %.2f GUPS%s\n", rep.predicted_socket_gups,
                        rep.bandwidth_limited ? " (bandwidth-limited)" : "");
        } else {
            std::printf("socket prediction: n/a (no kernel cycles configured)\n");
        }

        if (!m_validate.empty()) {
            std::ifstream f(m_validate);
            if (!f) {
                std::fprintf(stderr, "error: cannot read %s\n", m_validate.c_str());
                bp_machine_free(m);
                return 2;
            }
            json j = json::parse(f, nullptr, false);
            if (j.is_discarded() || !j.contains("result") || !j["result"].contains("gups")) {
                std::fprintf(stderr, "error: %s is not a bpct report\n", m_validate.c_str());
                bp_machine_free(m);
                return 2;
            }
            double dev = 0.0;
            if (int rc = bp_model_deviation(m, j["result"]["gups"].get<double>(), &dev)) die(rc);
            std::printf("measured %.3f GUPS, deviation vs prediction: %+.1f%%\n",
                        j["result"]["gups"].get<double>(), 100.0 * dev);
        }
        bp_machine_free(m);
        return 0;
    }
    return 1;
}
