/*
 * Copyright 2026 The Frontnet Toolkit Authors.
 * SPDX-License-Identifier: Apache-2.0
 */

/*
 * C interface of the frontnet shared library. Every call returns an fnt_status; on failure
 * fnt_last_error() describes the problem for the calling thread. Strings returned through
 * char** out-parameters are owned by the caller and released with fnt_string_free.
 */

#ifndef FRONTNET_FRONTNET_H
#define FRONTNET_FRONTNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(FNT_BUILDING_LIBRARY)
#define FNT_API __attribute__((visibility("default")))
#else
#define FNT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fnt_status
{
    FNT_OK                     = 0,
    FNT_ERR_INVALID_ARGUMENT   = 1,
    FNT_ERR_DEGENERATE         = 2,
    FNT_ERR_OVERFLOW           = 3,
    FNT_ERR_SHAPE_MISMATCH     = 4,
    FNT_ERR_NOT_FOUND          = 5,
    FNT_ERR_SCHEMA             = 6,
    FNT_ERR_CONSTRAINT         = 7,
    FNT_ERR_NUMERIC            = 8,
    FNT_ERR_INTERNAL           = 9
} fnt_status;

typedef struct fnt_graph fnt_graph;
typedef struct fnt_floatnet fnt_floatnet;
typedef struct fnt_qgraph fnt_qgraph;
typedef struct fnt_plan fnt_plan;
typedef struct fnt_image fnt_image;

typedef struct fnt_graph_stats
{
    int64_t macs;
    int64_t params;
    int64_t memory_bytes;
    int32_t num_layers;
} fnt_graph_stats;

typedef struct fnt_operating_point
{
    double f_fc_mhz;
    double f_cl_mhz;
    double vdd;
    double fps;
    double mw_total;
    double mj_frame;
    int32_t idle_layers;
} fnt_operating_point;

FNT_API const char* fnt_version(void);
FNT_API const char* fnt_last_error(void);
FNT_API void fnt_string_free(char* s);
/* Hex FNV-1a 64 digest of a file. */
FNT_API fnt_status fnt_hash_file(const char* path, char** hex);

/* Graphs. variant is "160x32", "160x16" or "80x32". */
FNT_API fnt_status fnt_graph_build(const char* variant, fnt_graph** out);
FNT_API fnt_status fnt_graph_load(const char* path, fnt_graph** out);
/* provenance_json may be NULL; otherwise it is stored under "provenance". */
FNT_API fnt_status fnt_graph_save(const fnt_graph* g, const char* path, const char* provenance_json);
FNT_API fnt_status fnt_graph_stats_get(const fnt_graph* g, fnt_graph_stats* out);
FNT_API fnt_status fnt_graph_report(const fnt_graph* g, char** text);
FNT_API const char* fnt_graph_variant(const fnt_graph* g);
FNT_API void fnt_graph_free(fnt_graph* g);

/* Float networks: random He-style weights, or a directory of QTNS tensors. */
FNT_API fnt_status fnt_floatnet_random(const fnt_graph* g, uint64_t seed, fnt_floatnet** out);
FNT_API fnt_status fnt_floatnet_load(const fnt_graph* g, const char* dir, fnt_floatnet** out);
FNT_API fnt_status fnt_floatnet_save(const fnt_floatnet* net, const char* dir);
FNT_API void fnt_floatnet_free(fnt_floatnet* net);

/*
 * Post-training quantization. Calibration uses the PGM frames in calib_dir, or
 * random_count synthetic frames drawn from seed when calib_dir is NULL.
 */
FNT_API fnt_status fnt_quantize(const fnt_floatnet* net, const char* calib_dir, int32_t random_count, uint64_t seed,
                                fnt_qgraph** out);
FNT_API fnt_status fnt_qgraph_load(const char* path, fnt_qgraph** out);
FNT_API fnt_status fnt_qgraph_save(const fnt_qgraph* q, const char* path, const char* provenance_json);
/* Per-output bound on the integer versus float pose difference. */
FNT_API fnt_status fnt_qgraph_error_bound(const fnt_floatnet* net, const fnt_qgraph* q, double bound[4]);
/* Copy of the network graph the quantized model was built from. */
FNT_API fnt_status fnt_qgraph_graph(const fnt_qgraph* q, fnt_graph** out);
FNT_API void fnt_qgraph_free(fnt_qgraph* q);

/* Images: binary PGM, 8-bit. */
FNT_API fnt_status fnt_image_load(const char* path, fnt_image** out);
FNT_API fnt_status fnt_image_size(const fnt_image* img, int32_t* width, int32_t* height);
FNT_API void fnt_image_free(fnt_image* img);

/* Integer inference. The frame is cropped and downscaled to the network input. */
FNT_API fnt_status fnt_infer(const fnt_qgraph* q, const fnt_image* frame, int32_t threads, double pose[4],
                             int32_t raw[4]);
/* Writes one QTNS file per layer output (<two-digit index>_<layer>.qtns) into dir. */
FNT_API fnt_status fnt_infer_dump(const fnt_qgraph* q, const fnt_image* frame, const char* dir);
/* Float reference with activations clipped at the calibrated bounds of q. */
FNT_API fnt_status fnt_infer_float(const fnt_floatnet* net, const fnt_qgraph* q, const fnt_image* frame,
                                   double pose[4]);

/* Deployment planning. memory_json and NULL select the default hierarchy. policy is
 * "streamed" or "resident". */
FNT_API fnt_status fnt_plan_create(const fnt_graph* g, const char* memory_json, const char* policy,
                                   int32_t fuse_pool, fnt_plan** out);
FNT_API fnt_status fnt_plan_load(const char* path, fnt_plan** out);
FNT_API fnt_status fnt_plan_save(const fnt_plan* p, const char* path, const char* provenance_json);
/* Independent audit; *ok is 1 when no violation was found. report lists the findings. */
FNT_API fnt_status fnt_plan_audit(const fnt_plan* p, int32_t* ok, char** report);
FNT_API fnt_status fnt_plan_memory_csv(const fnt_plan* p, char** csv);
FNT_API fnt_status fnt_plan_report(const fnt_plan* p, char** text);
FNT_API void fnt_plan_free(fnt_plan* p);

/* Cost model. params_json NULL selects the built-in coefficients. */
FNT_API fnt_status fnt_cost_params_default(char** json);
/* Fits the coefficients to the built-in anchor measurements. */
FNT_API fnt_status fnt_cost_calibrate(const char* memory_json, char** params_json, char** residuals_json);
FNT_API fnt_status fnt_estimate(const fnt_plan* p, const char* params_json, double f_fc_mhz, double f_cl_mhz,
                                fnt_operating_point* out, char** layers_csv);
/* Default grid sweep. Either best pointer may be NULL. */
FNT_API fnt_status fnt_sweep(const fnt_plan* p, const char* params_json, const char* csv_comment, char** csv,
                             fnt_operating_point* best_energy, fnt_operating_point* best_throughput);

/* Closed-loop simulation. net is "160x32", "160x16", "80x32" or "mocap". */
FNT_API fnt_status fnt_sim_config_default(const char* net, uint64_t seed, char** config_json);
FNT_API fnt_status fnt_simulate(const char* config_json, const char* csv_comment, char** metrics_csv,
                                char** trajectory_csv);

/*
 * Augments every image listed in labels_csv (paths relative to in_dir), writing copies
 * variants per image plus an output labels.csv into out_dir.
 */
FNT_API fnt_status fnt_augment_dataset(const char* labels_csv, const char* in_dir, const char* out_dir,
                                       int32_t copies, uint64_t seed, const char* comment, int32_t* written);

#ifdef __cplusplus
}
#endif

#endif /* FRONTNET_FRONTNET_H */
