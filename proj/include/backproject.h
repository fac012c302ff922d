/* C API for the cone-beam backprojection engine. Opaque handles, integer
 * error codes; bp_last_error() returns a thread-local message for the most
 * recent failure on the calling thread. */
#ifndef BACKPROJECT_H
#define BACKPROJECT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
    BP_OK = 0,
    BP_EINVAL = 1,   /* bad parameters / config */
    BP_EIO = 2,      /* file format or I/O failure */
    BP_EVERIFY = 3,  /* data fails a documented invariant */
    BP_EINTERNAL = 4
};

const char* bp_last_error(void);

/* ---- projection stacks ---------------------------------------------- */

typedef struct bp_stack bp_stack;

typedef struct bp_gen_params {
    const char* phantom;  /* "spheres3", "shell" or "point" */
    int n_views;
    int isx, isy;
    double sid_mm, sdd_mm, pitch_mm; /* <= 0 selects the defaults 750/1200/0.32 */
} bp_gen_params;

int bp_stack_generate(const bp_gen_params* p, bp_stack** out);
int bp_stack_read(const char* path, bp_stack** out);
int bp_stack_write(const bp_stack* s, const char* path);
void bp_stack_dims(const bp_stack* s, uint32_t* isx, uint32_t* isy, uint32_t* count);
void bp_stack_free(bp_stack* s);

/* ---- volumes --------------------------------------------------------- */

typedef struct bp_volume bp_volume;

int bp_volume_read(const char* path, bp_volume** out);
int bp_volume_write(const bp_volume* v, const char* path);
uint32_t bp_volume_edge(const bp_volume* v);
const float* bp_volume_data(const bp_volume* v);
void bp_volume_free(bp_volume* v);

/* PSNR of vol against ref in dB; peak <= 0 uses max(ref). Identical volumes
 * report +inf. */
int bp_psnr(const bp_volume* vol, const bp_volume* ref, double peak, double* out_db);

/* ---- reconstruction -------------------------------------------------- */

enum { BP_RECIP_EXACT = 0, BP_RECIP_APPROX12 = 1, BP_RECIP_APPROX12_NR = 2 };
enum { BP_EXTRACT_V1_STORE = 0, BP_EXTRACT_V2_SHIFT = 1 };

typedef struct bp_recon_params {
    uint32_t l;          /* voxels per edge */
    int threads;         /* >= 1 */
    int chunk;           /* slice scheduling chunk, default 1 */
    int block_b;         /* projections per block, default 1 */
    int lanes;           /* 1, 4 or 8 */
    int recip_mode;      /* BP_RECIP_* */
    int extract;         /* BP_EXTRACT_* */
    int strict_mode;     /* nonzero: bitwise-reproducible arithmetic */
    int distance_weight; /* nonzero: accumulate fx*r^2 (default) */
    int clip;            /* nonzero: use per-line clipping */
    int numa_domains;    /* padded-image copies, default 1 */
    const char* clip_cache; /* optional BPCT path, read if present else written; NULL to skip */
} bp_recon_params;

typedef struct bp_recon_stats {
    double seconds;
    uint64_t voxel_updates;
    double gups;
    double gflops;            /* 31 FLOPs per update */
    uint64_t writeback_stores;
    uint64_t bytes_copied;
    double clip_reduction;
    uint64_t thread_updates_min, thread_updates_max;
} bp_recon_stats;

int bp_reconstruct(const bp_stack* s, const bp_recon_params* p, bp_volume** out,
                   bp_recon_stats* stats);

/* ---- performance model ----------------------------------------------- */

typedef struct bp_machine bp_machine;

int bp_machine_load(const char* path, bp_machine** out);
void bp_machine_free(bp_machine* m);

typedef struct bp_model_report {
    double arithmetic_bound_gups;
    double bandwidth_bound_gups;   /* < 0 when no node bandwidth is configured */
    double cacheline_cycles;       /* < 0 when no kernel cycles are configured */
    double bw_per_core_gbps;
    double bw_per_socket_gbps;
    double predicted_socket_gups;
    int bandwidth_limited;
} bp_model_report;

int bp_model_report_build(const bp_machine* m, bp_model_report* out);

/* Measure host parameters into the model: the update streaming benchmark
 * (n_elems floats, given thread count) and the L1-resident kernel cycle
 * count for the model's lane width. clock_hz <= 0 estimates the clock. */
int bp_machine_measure(bp_machine* m, size_t bench_elems, int bench_threads, double clock_hz);

/* Signed relative deviation measured/predicted - 1. */
int bp_model_deviation(const bp_machine* m, double measured_gups, double* out_dev);

#ifdef __cplusplus
}
#endif

#endif /* BACKPROJECT_H */
