#ifndef SDWAVE_SDWAVE_H
#define SDWAVE_SDWAVE_H

#include <stddef.h>
#include <stdint.h>

#if defined(SDWAVE_BUILDING_LIBRARY)
#define SDWAVE_API __attribute__((visibility("default")))
#else
#define SDWAVE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct sdw_problem sdw_problem;
typedef struct sdw_correctors sdw_correctors;
typedef struct sdw_trajectory sdw_trajectory;
typedef struct sdw_report sdw_report;

typedef enum sdw_status {
  SDW_OK = 0,
  SDW_INVALID_ARGUMENT = 1,
  SDW_SINGULAR_SYSTEM = 2,
  SDW_DEGENERATE_CONSTRAINT = 3,
  SDW_EMPTY_BASIS = 4,
  SDW_IO = 5,
  SDW_CONFIG = 6,
  SDW_INTERNAL = 7
} sdw_status;

typedef enum sdw_form {
  SDW_FORM_A_PLUS_TAU_B = 0,
  SDW_FORM_A_ONLY = 1,
  SDW_FORM_B_ONLY = 2
} sdw_form;

SDWAVE_API const char* sdw_version(void);
/* Message of the last failed call on this thread; "" if none. */
SDWAVE_API const char* sdw_last_error(void);
SDWAVE_API const char* sdw_status_name(sdw_status status);

/* Fine mesh 2^p, coarse mesh 2^q, random A and B. law: "uniform" or
   "loguniform". block 0 draws one value per fine element. */
SDWAVE_API sdw_status sdw_problem_create(int p, int q, uint64_t seed, double lo, double hi, const char* law,
                                         int block, sdw_problem** out);
/* A and B hold one value per fine element, 2 * 4^p entries each. */
SDWAVE_API sdw_status sdw_problem_create_fields(int p, int q, const double* A, const double* B, size_t count,
                                                sdw_problem** out);
SDWAVE_API void sdw_problem_destroy(sdw_problem* problem);
SDWAVE_API sdw_status sdw_problem_sizes(const sdw_problem* problem, int* fine_dofs, int* coarse_dofs);
/* Smallest patch size k for which every corrector patch is the whole domain. */
SDWAVE_API sdw_status sdw_problem_saturation(const sdw_problem* problem, int* k);

SDWAVE_API sdw_status sdw_correctors_build(const sdw_problem* problem, int k, double tau, sdw_form form,
                                           sdw_correctors** out);
SDWAVE_API void sdw_correctors_destroy(sdw_correctors* correctors);

/* Constant source f, zero initial data, `steps` backward Euler steps. */
SDWAVE_API sdw_status sdw_fine_solve(const sdw_problem* problem, double f, double tau, int steps,
                                     sdw_trajectory** out);
/* Localized method with the corrector set's tau. rb_m < 0 uses the stored
   transient correctors, rb_m = 0 the automatic reduced basis, rb_m > 0 a
   basis of that size. */
SDWAVE_API sdw_status sdw_lod_solve(const sdw_problem* problem, const sdw_correctors* correctors, double f,
                                    int steps, int rb_m, sdw_trajectory** out);
/* Needs correctors whose patches all cover the domain; see
   sdw_problem_saturation. */
SDWAVE_API sdw_status sdw_ideal_solve(const sdw_problem* problem, const sdw_correctors* correctors, double f,
                                      int steps, sdw_trajectory** out);
SDWAVE_API void sdw_trajectory_destroy(sdw_trajectory* trajectory);

SDWAVE_API sdw_status sdw_trajectory_size(const sdw_trajectory* trajectory, int* steps, int* dofs);
SDWAVE_API sdw_status sdw_trajectory_state(const sdw_trajectory* trajectory, int n, double* out, size_t len);
SDWAVE_API sdw_status sdw_trajectory_norms(const sdw_problem* problem, const sdw_trajectory* trajectory, int n,
                                           double* l2, double* h1);
SDWAVE_API sdw_status sdw_relative_error(const sdw_problem* problem, const sdw_trajectory* reference,
                                         const sdw_trajectory* approx, double* rel_h1_final, double* rel_l2h1);
SDWAVE_API sdw_status sdw_trajectory_write_csv(const sdw_problem* problem, const sdw_trajectory* trajectory,
                                               const char* path);

/* experiment: "exp-k", "exp-H" or "exp-rb". config_json may be NULL or a
   JSON object whose keys override the preset. */
SDWAVE_API sdw_status sdw_experiment_run(const char* experiment, const char* config_json, sdw_report** out);
SDWAVE_API void sdw_report_destroy(sdw_report* report);
SDWAVE_API sdw_status sdw_report_rows(const sdw_report* report, size_t* count);
/* method stays valid until the report is destroyed. */
SDWAVE_API sdw_status sdw_report_row(const sdw_report* report, size_t i, double* param, double* rel_h1_final,
                                     double* rel_l2h1, double* runtime_s, const char** method);
SDWAVE_API sdw_status sdw_report_stats(const sdw_report* report, double* wall_clock_s, int* cache_hits,
                                       int* cache_misses);
/* Resolved configuration as JSON, owned by the report. */
SDWAVE_API const char* sdw_report_config(const sdw_report* report);
/* out_dir NULL uses the configured directory; svg < 0 the configured flag. */
SDWAVE_API sdw_status sdw_report_write(const sdw_report* report, const char* out_dir, int svg);

#ifdef __cplusplus
}
#endif

#endif
