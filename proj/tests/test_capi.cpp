#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <backproject.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

namespace {

bp_gen_params small_gen(const char* phantom, int views, int isx, int isy) {
    bp_gen_params p{};
    p.phantom = phantom;
    p.n_views = views;
    p.isx = isx;
    p.isy = isy;
    p.pitch_mm = 0.32 * 1248.0 / isx;  // keep the detector field of view
    return p;
}

bp_recon_params default_recon(uint32_t l) {
    bp_recon_params p{};
    p.l = l;
    p.threads = 1;
    p.chunk = 1;
    p.block_b = 1;
    p.lanes = 1;
    p.strict_mode = 1;
    p.distance_weight = 1;
    p.numa_domains = 1;
    return p;
}

std::string tmp(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("stack generation, dims, file round trip") {
    auto gp = small_gen("spheres3", 4, 48, 40);
    bp_stack* s = nullptr;
    REQUIRE(bp_stack_generate(&gp, &s) == BP_OK);
    uint32_t isx = 0, isy = 0, count = 0;
    bp_stack_dims(s, &isx, &isy, &count);
    CHECK(isx == 48);
    CHECK(isy == 40);
    CHECK(count == 4);

    auto path = tmp("bp_capi_stack.bpst");
    REQUIRE(bp_stack_write(s, path.c_str()) == BP_OK);
    bp_stack* s2 = nullptr;
    REQUIRE(bp_stack_read(path.c_str(), &s2) == BP_OK);
    uint32_t i2 = 0, j2 = 0, c2 = 0;
    bp_stack_dims(s2, &i2, &j2, &c2);
    CHECK(i2 == isx);
    CHECK(j2 == isy);
    CHECK(c2 == count);
    bp_stack_free(s2);
    bp_stack_free(s);
    std::filesystem::remove(path);
}

TEST_CASE("error codes and thread-local messages") {
    bp_stack* s = nullptr;
    bp_gen_params bad = small_gen("nope", 2, 32, 32);
    CHECK(bp_stack_generate(&bad, &s) == BP_EINVAL);
    CHECK(std::strlen(bp_last_error()) > 0);
    CHECK(s == nullptr);

    CHECK(bp_stack_read("/nonexistent/x.bpst", &s) == BP_EIO);
    CHECK(bp_stack_generate(nullptr, &s) == BP_EINVAL);
    CHECK(bp_stack_generate(&bad, nullptr) == BP_EINVAL);

    bp_volume* v = nullptr;
    CHECK(bp_volume_read("/nonexistent/x.bpvl", &v) == BP_EIO);
}

TEST_CASE("reconstruction through the C API with stats") {
    auto gp = small_gen("spheres3", 4, 48, 40);
    bp_stack* s = nullptr;
    REQUIRE(bp_stack_generate(&gp, &s) == BP_OK);

    auto rp = default_recon(16);
    bp_volume* vol = nullptr;
    bp_recon_stats st{};
    REQUIRE(bp_reconstruct(s, &rp, &vol, &st) == BP_OK);
    CHECK(bp_volume_edge(vol) == 16);
    CHECK(st.voxel_updates == (uint64_t)4 * 16 * 16 * 16);
    CHECK(st.gups > 0);
    CHECK(st.gflops == doctest::Approx(31.0 * st.gups));
    CHECK(st.thread_updates_min == st.thread_updates_max);  // one thread
    CHECK(st.writeback_stores == (uint64_t)4 * 16 * 16 * 16);

    // some signal made it into the volume
    const float* d = bp_volume_data(vol);
    double sum = 0;
    for (uint32_t i = 0; i < 16u * 16u * 16u; ++i) sum += std::abs(d[i]);
    CHECK(sum > 0);

    // volume file round trip
    auto path = tmp("bp_capi_vol.bpvl");
    REQUIRE(bp_volume_write(vol, path.c_str()) == BP_OK);
    bp_volume* back = nullptr;
    REQUIRE(bp_volume_read(path.c_str(), &back) == BP_OK);
    double db = 0;
    REQUIRE(bp_psnr(back, vol, 0.0, &db) == BP_OK);
    CHECK(std::isinf(db));
    bp_volume_free(back);
    std::filesystem::remove(path);

    // psnr of a different reconstruction is finite
    auto rp2 = rp;
    rp2.recip_mode = BP_RECIP_APPROX12;
    bp_volume* v2 = nullptr;
    REQUIRE(bp_reconstruct(s, &rp2, &v2, nullptr) == BP_OK);
    REQUIRE(bp_psnr(v2, vol, 0.0, &db) == BP_OK);
    CHECK(std::isfinite(db));
    CHECK(db > 20.0);
    bp_volume_free(v2);

    bp_volume_free(vol);
    bp_stack_free(s);
}

TEST_CASE("reconstruction parameter validation") {
    auto gp = small_gen("point", 2, 32, 32);
    bp_stack* s = nullptr;
    REQUIRE(bp_stack_generate(&gp, &s) == BP_OK);
    bp_volume* vol = nullptr;

    auto rp = default_recon(8);
    rp.lanes = 3;
    CHECK(bp_reconstruct(s, &rp, &vol, nullptr) == BP_EINVAL);
    rp = default_recon(8);
    rp.threads = 0;
    CHECK(bp_reconstruct(s, &rp, &vol, nullptr) == BP_EINVAL);
    rp = default_recon(0);
    CHECK(bp_reconstruct(s, &rp, &vol, nullptr) == BP_EINVAL);
    rp = default_recon(8);
    rp.recip_mode = 9;
    CHECK(bp_reconstruct(s, &rp, &vol, nullptr) == BP_EINVAL);
    CHECK(bp_reconstruct(nullptr, &rp, &vol, nullptr) == BP_EINVAL);
    bp_stack_free(s);
}

TEST_CASE("clip cache file is written then reused") {
    auto gp = small_gen("spheres3", 3, 40, 32);
    bp_stack* s = nullptr;
    REQUIRE(bp_stack_generate(&gp, &s) == BP_OK);

    auto cache = tmp("bp_capi_clip.bpct");
    std::filesystem::remove(cache);

    auto rp = default_recon(12);
    rp.clip = 1;
    rp.clip_cache = cache.c_str();
    bp_volume* v1 = nullptr;
    REQUIRE(bp_reconstruct(s, &rp, &v1, nullptr) == BP_OK);
    REQUIRE(std::filesystem::exists(cache));
    auto mtime = std::filesystem::last_write_time(cache);

    bp_volume* v2 = nullptr;
    REQUIRE(bp_reconstruct(s, &rp, &v2, nullptr) == BP_OK);
    CHECK(std::filesystem::last_write_time(cache) == mtime);  // reused, not rebuilt
    CHECK(std::memcmp(bp_volume_data(v1), bp_volume_data(v2),
                      sizeof(float) * 12 * 12 * 12) == 0);

    bp_volume_free(v1);
    bp_volume_free(v2);
    bp_stack_free(s);
    std::filesystem::remove(cache);
}

TEST_CASE("psnr requires matching volumes") {
    auto gp = small_gen("point", 2, 32, 32);
    bp_stack* s = nullptr;
    REQUIRE(bp_stack_generate(&gp, &s) == BP_OK);
    auto rp8 = default_recon(8);
    auto rp12 = default_recon(12);
    bp_volume *a = nullptr, *b = nullptr;
    REQUIRE(bp_reconstruct(s, &rp8, &a, nullptr) == BP_OK);
    REQUIRE(bp_reconstruct(s, &rp12, &b, nullptr) == BP_OK);
    double db = 0;
    CHECK(bp_psnr(a, b, 0.0, &db) == BP_EVERIFY);
    bp_volume_free(a);
    bp_volume_free(b);
    bp_stack_free(s);
}

TEST_CASE("machine model through the C API") {
    bp_machine* m = nullptr;
    std::string path = std::string(MACHINES_DIR) + "/wem.machine";
    REQUIRE(bp_machine_load(path.c_str(), &m) == BP_OK);

    bp_model_report r{};
    REQUIRE(bp_model_report_build(m, &r) == BP_OK);
    CHECK(r.arithmetic_bound_gups == doctest::Approx(6.7).epsilon(0.01));
    CHECK(r.bandwidth_bound_gups == doctest::Approx(4.89).epsilon(0.01));
    CHECK(r.cacheline_cycles == doctest::Approx(206.0));
    CHECK(r.predicted_socket_gups == doctest::Approx(1.42).epsilon(0.05));
    CHECK(r.bandwidth_limited == 0);

    double dev = 0;
    REQUIRE(bp_model_deviation(m, r.predicted_socket_gups, &dev) == BP_OK);
    CHECK(dev == doctest::Approx(0.0).scale(1.0));

    bp_machine_free(m);
    CHECK(bp_machine_load("/nonexistent.machine", &m) == BP_EIO);
}
