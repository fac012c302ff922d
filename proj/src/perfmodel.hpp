#pragma once

#include <string>

#include "kernel.hpp"

namespace bp {

// Measured machine parameters feeding the analytic throughput model.
// Bandwidths are in bytes/s (update-benchmark convention: 8 bytes per
// element, read + write). kernel_cycles_per_iter is the measured cost of
// one W-wide inner loop iteration with operands in L1.
struct MachineModel {
    std::string name;
    double clock_hz = 0;
    int cores_per_socket = 0;
    int sockets = 1;
    int lane_width = 4;
    double update_bw_1thread = 0;
    double update_bw_socket = 0;
    double update_bw_node = 0;
    double kernel_cycles_per_iter = 0;
    int cacheline_bytes = 64;
};

struct SocketPrediction {
    double cacheline_cycles = 0;  // in-core cycles per 16-voxel cacheline update
    double bw_per_core = 0;       // required voxel bandwidth, bytes/s
    double bw_per_socket = 0;
    double gups = 0;
    bool bandwidth_limited = false;  // required socket BW exceeds the measured update BW
};

// Key=value machine file ('#' comments; clock_ghz / *_gbps accepted as
// SI-prefixed shorthands).
MachineModel load_machine_model(const std::string& path);

// Upper bound from arithmetic throughput: 21 cycles per W-wide update.
double arithmetic_bound_gups(const MachineModel& m);

// Upper bound from streaming capability: 8 bytes of voxel traffic per update.
double bandwidth_bound_gups(const MachineModel& m);

// Cacheline-transfer composition: 128 bytes (load + evict) of voxel traffic
// per 16-voxel cacheline, in-core execution from measured kernel cycles.
SocketPrediction predict_socket(const MachineModel& m);

// Signed relative deviation measured/predicted - 1.
double model_deviation(double predicted_gups, double measured_gups);

// a[i] = s * a[i] streaming benchmark; returns bytes/s counting 8 bytes per
// element, best of `reps` (>= 5) repetitions. n_elems * 4 bytes should be
// at least 4x the last-level cache.
double update_microbench(size_t n_elems, int threads, int reps = 5);

// Median cycles for one W-wide kernel iteration with an L1-resident working
// set. Needs the core clock to convert wall time to cycles.
double measure_kernel_cycles(const KernelConfig& cfg, int line_len, double clock_hz,
                             int repetitions = 20000);

// Core clock estimate from a chain of dependent integer adds (1 add/cycle).
double estimate_clock_hz();

}  // namespace bp
