#include "perfmodel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "errors.hpp"

namespace bp {

namespace {

double now() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

template <typename T>
inline void keep(T& v) {
    asm volatile("" : "+r"(v));
}

}  // namespace

MachineModel load_machine_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open machine file " + path);
    MachineModel m;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw config_error(path + ":" + std::to_string(lineno) + ": expected key=value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        try {
            if (key == "name") m.name = val;
            else if (key == "clock_hz") m.clock_hz = std::stod(val);
            else if (key == "clock_ghz") m.clock_hz = std::stod(val) * 1e9;
            else if (key == "cores_per_socket") m.cores_per_socket = std::stoi(val);
            else if (key == "sockets") m.sockets = std::stoi(val);
            else if (key == "lane_width") m.lane_width = std::stoi(val);
            else if (key == "update_bw_1thread_gbps") m.update_bw_1thread = std::stod(val) * 1e9;
            else if (key == "update_bw_socket_gbps") m.update_bw_socket = std::stod(val) * 1e9;
            else if (key == "update_bw_node_gbps") m.update_bw_node = std::stod(val) * 1e9;
            else if (key == "kernel_cycles_per_iter") m.kernel_cycles_per_iter = std::stod(val);
            else throw config_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw config_error(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    if (m.clock_hz <= 0 || m.cores_per_socket < 1 || m.sockets < 1)
        throw config_error(path + ": clock_ghz, cores_per_socket and sockets are required");
    if (m.lane_width != 1 && m.lane_width != 4 && m.lane_width != 8)
        throw config_error(path + ": lane_width must be 1, 4 or 8");
    return m;
}

double arithmetic_bound_gups(const MachineModel& m) {
    return (double)m.sockets * m.cores_per_socket * m.lane_width * m.clock_hz / 21.0 / 1e9;
}

double bandwidth_bound_gups(const MachineModel& m) {
    if (m.update_bw_node <= 0) throw config_error("bandwidth bound needs update_bw_node");
    return m.update_bw_node / 8.0 / 1e9;
}

SocketPrediction predict_socket(const MachineModel& m) {
    if (m.kernel_cycles_per_iter <= 0)
        throw config_error("socket prediction needs kernel_cycles_per_iter");
    SocketPrediction p;
    p.cacheline_cycles = (16.0 / m.lane_width) * m.kernel_cycles_per_iter;
    p.bw_per_core = 2.0 * m.cacheline_bytes * m.clock_hz / p.cacheline_cycles;  // load + evict
    p.bw_per_socket = p.bw_per_core * m.cores_per_socket;
    p.gups = (double)m.cores_per_socket * 16.0 * m.clock_hz / p.cacheline_cycles / 1e9;
    p.bandwidth_limited = m.update_bw_socket > 0 && p.bw_per_socket > m.update_bw_socket;
    return p;
}

double model_deviation(double predicted_gups, double measured_gups) {
    if (predicted_gups <= 0) throw config_error("predicted GUPS must be positive");
    return measured_gups / predicted_gups - 1.0;
}

double update_microbench(size_t n_elems, int threads, int reps) {
    if (threads < 1) throw config_error("threads must be >= 1");
    reps = std::max(reps, 5);
    std::vector<float> a;
    try {
        a.assign(n_elems, 1.0f);
    } catch (const std::bad_alloc&) {
        throw config_error("microbenchmark allocation of " + std::to_string(n_elems * 4) + " bytes failed");
    }

    const float s = 1.0000001f;
    double best = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        double t0 = now();
        if (threads == 1) {
            float* p = a.data();
            for (size_t i = 0; i < n_elems; ++i) p[i] = s * p[i];
            keep(p);
        } else {
            std::vector<std::thread> pool;
            size_t per = n_elems / threads;
            for (int t = 0; t < threads; ++t) {
                size_t lo = t * per, hi = (t == threads - 1) ? n_elems : lo + per;
                pool.emplace_back([&a, lo, hi, s] {
                    float* p = a.data();
                    for (size_t i = lo; i < hi; ++i) p[i] = s * p[i];
                    keep(p);
                });
            }
            for (auto& th : pool) th.join();
        }
        double dt = now() - t0;
        if (dt > 0) best = std::max(best, 8.0 * (double)n_elems / dt);
    }
    return best;
}

double measure_kernel_cycles(const KernelConfig& cfg, int line_len, double clock_hz,
                             int repetitions) {
    if (clock_hz <= 0) throw config_error("kernel cycle measurement needs the core clock");
    if (line_len < cfg.lanes) throw config_error("line too short for configured lane width");
    repetitions = std::max(repetitions, 10000);

    // L1-resident working set: one voxel line plus a small projection image.
    const int isx = 48, isy = 48;
    std::mt19937 rng(12345);
    std::uniform_real_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> raw((size_t)isx * isy);
    for (auto& v : raw) v = dist(rng);
    PaddedImage img = pad_image(raw.data(), isx, isy, cfg.lanes);

    VoxelGrid grid = VoxelGrid::cube(line_len);
    auto mats = make_circular_trajectory(1, 750.0, 1200.0, isx, isy, 16.0);
    auto Af = mats[0].narrowed();
    std::vector<float> line(line_len, 0.0f);
    const int y = line_len / 2, z = line_len / 2;

    const uint64_t iters_per_call = (uint64_t)line_len / std::max(cfg.lanes, 1);
    int calls_per_sample = std::max(1, (int)(50000 / (uint64_t)line_len));
    const int samples = 31;
    int calls_done = 0, attempts = 0;

    std::vector<double> per_iter;
    while (calls_done < repetitions || (int)per_iter.size() < samples) {
        if (++attempts > 10000) break;
        double t0 = now();
        for (int c = 0; c < calls_per_sample; ++c) {
            line_update(line.data(), img, Af.data(), grid, y, z, 0, line_len - 1, cfg);
            keep(line[0]);
        }
        double dt = now() - t0;
        calls_done += calls_per_sample;
        if (dt < 50e-6) {
            calls_per_sample *= 2;  // grow until comfortably above timer resolution
            continue;
        }
        per_iter.push_back(dt * clock_hz / ((double)calls_per_sample * iters_per_call));
    }
    if (per_iter.empty()) throw config_error("timer resolution insufficient for cycle measurement");
    std::sort(per_iter.begin(), per_iter.end());
    return per_iter[per_iter.size() / 2];
}

double estimate_clock_hz() {
    const uint64_t iters = 1u << 27;
    double best = 0.0;
    for (int rep = 0; rep < 5; ++rep) {
        uint64_t x = rep;
        double t0 = now();
        for (uint64_t i = 0; i < iters; ++i) {
            x += i;
            keep(x);  // one dependent add per cycle
        }
        double dt = now() - t0;
        if (dt > 0) best = std::max(best, (double)iters / dt);
    }
    return best;
}

}  // namespace bp
