#ifndef BQCF_BQCF_H
#define BQCF_BQCF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bqcf_status {
  BQCF_OK = 0,
  BQCF_INVALID_ARGUMENT = 1,
  BQCF_SOLVER_FAILURE = 2,
  BQCF_CONFIG_ERROR = 3,
  BQCF_IO_ERROR = 4,
  BQCF_CHECK_FAILED = 5,
  BQCF_INTERNAL = 6
} bqcf_status;

typedef struct bqcf_config bqcf_config;
typedef struct bqcf_result bqcf_result;
typedef struct bqcf_op bqcf_op;

/* Status and message of the last failed call on the calling thread. */
bqcf_status bqcf_last_error_code(void);
const char* bqcf_last_error_message(void);
const char* bqcf_status_name(bqcf_status s);
const char* bqcf_version(void);

bqcf_status bqcf_config_new(bqcf_config** out);
bqcf_status bqcf_config_parse_file(const char* path, bqcf_config** out);
bqcf_status bqcf_config_parse_string(const char* text, bqcf_config** out);
bqcf_status bqcf_config_set(bqcf_config* cfg, const char* key, const char* value);
void bqcf_config_free(bqcf_config* cfg);

size_t bqcf_experiment_count(void);
const char* bqcf_experiment_name(size_t i);

/* Runs a named experiment. out_dir may be NULL; it only receives matrix exports. */
bqcf_status bqcf_run(const char* experiment, const bqcf_config* cfg, int threads, uint64_t seed, const char* out_dir,
                     bqcf_result** out);
int bqcf_result_passed(const bqcf_result* r);
const char* bqcf_result_summary(const bqcf_result* r);
const char* bqcf_result_fit_json(const bqcf_result* r);
const char* bqcf_result_csv(const bqcf_result* r);
size_t bqcf_result_check_count(const bqcf_result* r);
bqcf_status bqcf_result_check(const bqcf_result* r, size_t i, const char** name, int* passed, const char** detail);
bqcf_status bqcf_result_write(const bqcf_result* r, const char* dir);
void bqcf_result_free(bqcf_result* r);

/* 1D operator; kind is atomistic, qcl, bqcf, bqcf1 or bqcf2. K = 0 means no blend. */
bqcf_status bqcf_op1d_new(const char* kind, int N, double phiF, double phi2F, int K, bqcf_op** out);
/* 1D operator with blend samples beta[0..2N-1] in array order. */
bqcf_status bqcf_op1d_new_blend(const char* kind, int N, double phiF, double phi2F, const double* beta, bqcf_op** out);
/* 2D toy-model operator; kind is atomistic, cauchy_born, bqcf or ltilde. Rb <= Ra means no blend. */
bqcf_status bqcf_op2d_new_toy(const char* kind, int N, double k_nn, double lambda, double delta, int Ra, int Rb,
                              int margin, bqcf_op** out);
bqcf_status bqcf_op_dim(const bqcf_op* op, size_t* dim);
bqcf_status bqcf_op_apply(const bqcf_op* op, const double* u, double* out);
bqcf_status bqcf_op_quad_form(const bqcf_op* op, const double* u, double* value);
/* method is automatic, dense or iterative (NULL: automatic). */
bqcf_status bqcf_op_coercivity(const bqcf_op* op, const char* method, double* gamma);
bqcf_status bqcf_op_export_mm(const bqcf_op* op, const char* path);
void bqcf_op_free(bqcf_op* op);

#ifdef __cplusplus
}
#endif

#endif
