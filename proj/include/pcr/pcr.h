/* C API for the pcr point-cloud registration toolkit.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return PCR_OK on success; on failure they return an error code
 * and pcr_last_error() describes what went wrong (per thread).
 */
#ifndef PCR_PCR_H
#define PCR_PCR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PCR_API __declspec(dllexport)
#else
#define PCR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pcr_status {
  PCR_OK = 0,
  PCR_ERROR_INVALID_ARGUMENT = 1,
  PCR_ERROR_IO = 2,
  PCR_ERROR_PARSE = 3,
  PCR_ERROR_CONFIG = 4,
  PCR_ERROR_RUNTIME = 5
} pcr_status;

typedef struct pcr_cloud pcr_cloud;
typedef struct pcr_model pcr_model;

/* Row-major homogeneous 4x4 matrix. */
typedef struct pcr_transform {
  double m[16];
} pcr_transform;

typedef struct pcr_result {
  pcr_transform transform;
  int iterations;
  int converged;
  double seconds;
} pcr_result;

PCR_API const char* pcr_version(void);

/* Message for the most recent failure on the calling thread. */
PCR_API const char* pcr_last_error(void);

/* ---- point clouds ---- */

/* Reads an ASCII XYZ or binary PCRC file (auto-detected). */
PCR_API pcr_status pcr_cloud_load(const char* path, pcr_cloud** out);

/* binary != 0 writes PCRC, otherwise ASCII XYZ. */
PCR_API pcr_status pcr_cloud_save(const pcr_cloud* cloud, const char* path, int binary);

/* Full sampling pipeline: parse OFF, area-weighted sample 10x, farthest
 * point sample down to n_points, normalize into the unit box. */
PCR_API pcr_status pcr_cloud_from_off(const char* off_path, uint32_t n_points,
                                      uint64_t seed, pcr_cloud** out);

PCR_API uint32_t pcr_cloud_size(const pcr_cloud* cloud);

/* Copies size*3 doubles (x y z per point) into xyz. */
PCR_API pcr_status pcr_cloud_points(const pcr_cloud* cloud, double* xyz);

PCR_API void pcr_cloud_free(pcr_cloud* cloud);

/* ---- transforms and metrics ---- */

PCR_API void pcr_transform_identity(pcr_transform* t);
PCR_API pcr_status pcr_transform_read(const char* path, pcr_transform* t);
PCR_API pcr_status pcr_transform_write(const pcr_transform* t, const char* path);

PCR_API double pcr_rotation_error_deg(const pcr_transform* est, const pcr_transform* gt);
PCR_API double pcr_translation_error(const pcr_transform* est, const pcr_transform* gt);

/* ---- models ---- */

PCR_API pcr_status pcr_model_load(const char* path, pcr_model** out);

/* "single_shot" or "iterative". */
PCR_API const char* pcr_model_variant(const pcr_model* model);

/* Untrained model with seed-initialized weights; variant is "single_shot"
 * or "iterative", width_divisor scales the paper widths down (>= 1). */
PCR_API pcr_status pcr_model_init(const char* variant, uint32_t width_divisor,
                                  uint64_t seed, pcr_model** out);

PCR_API void pcr_model_free(pcr_model* model);

/* ---- registration ---- */

typedef struct pcr_register_options {
  int max_iterations; /* iterative methods only */
  double epsilon;     /* convergence threshold on ||T_i T_{i-1}^-1 - I||_F */
} pcr_register_options;

PCR_API void pcr_register_options_init(pcr_register_options* opts);

PCR_API pcr_status pcr_register_icp(const pcr_cloud* source, const pcr_cloud* tmpl,
                                    const pcr_register_options* opts, pcr_result* out);

/* Single-shot models run one pass; iterative models loop to convergence. */
PCR_API pcr_status pcr_register_model(const pcr_model* model, const pcr_cloud* source,
                                      const pcr_cloud* tmpl,
                                      const pcr_register_options* opts, pcr_result* out);

/* ---- training ---- */

typedef void (*pcr_progress_fn)(uint64_t epoch, double mean_loss, double lr, void* user);

/* Trains per the key-value config file on every cloud file in data_dir,
 * writing the checkpoint to out_checkpoint and per-epoch history to
 * history_csv (may be NULL). resume_checkpoint continues a previous run and
 * may be NULL. */
PCR_API pcr_status pcr_train(const char* config_path, const char* data_dir,
                             const char* out_checkpoint, const char* history_csv,
                             const char* resume_checkpoint, pcr_progress_fn progress,
                             void* user);

/* ---- benchmark ---- */

typedef struct pcr_benchmark_options {
  const char* methods;      /* comma list of icp, pcrnet, pcrnet-iter */
  const char* template_dir; /* directory of cloud files */
  const char* checkpoint_single_shot; /* used by pcrnet; NULL: untrained */
  const char* checkpoint_iterative;   /* used by pcrnet-iter; NULL: untrained */
  uint32_t pairs;
  double noise_sigma;
  double angle_range_deg;
  double trans_range;
  uint64_t seed;
  int threads;
  int max_iterations;     /* pcrnet-iter iteration cap */
  int icp_max_iterations; /* ICP iteration cap */
  double epsilon;
  uint32_t untrained_width_divisor; /* for methods run without a checkpoint */
  int measure_time; /* 0 writes zeros in the time columns */
} pcr_benchmark_options;

PCR_API void pcr_benchmark_options_init(pcr_benchmark_options* opts);

/* Writes details.csv, summary.csv and curve_<method>.csv under out_dir. */
PCR_API pcr_status pcr_benchmark(const pcr_benchmark_options* opts, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* PCR_PCR_H */
