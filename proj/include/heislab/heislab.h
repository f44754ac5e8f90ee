/* C interface to heislab: finite-difference heat and semilinear heat flows on the
 * Heisenberg group, lifespan sweeps and blow-up certificates.
 *
 * All objects are opaque handles released by their *_destroy function. Every call that can
 * fail returns a heis_status; on failure heis_last_error() describes the error for the
 * calling thread. Strings returned by the library stay valid until the owning handle is
 * mutated or destroyed. */
#ifndef HEISLAB_H
#define HEISLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HEIS_API __declspec(dllexport)
#else
#define HEIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum heis_status {
  HEIS_OK = 0,
  HEIS_ERR_INVALID_ARGUMENT = 1,
  HEIS_ERR_NUMERICAL = 2,
  HEIS_ERR_IO = 3,
  HEIS_ERR_CHECK_FAILED = 4,
  HEIS_ERR_INTERNAL = 5
} heis_status;

/* Process exit codes used by the command-line tool. */
enum {
  HEIS_EXIT_OK = 0,
  HEIS_EXIT_CHECK_FAILED = 1,
  HEIS_EXIT_CONFIG_ERROR = 2,
  HEIS_EXIT_NUMERICAL_ERROR = 3,
  HEIS_EXIT_IO_ERROR = 4,
  HEIS_EXIT_INTERNAL_ERROR = 5
};

HEIS_API const char* heis_version(void);
HEIS_API const char* heis_last_error(void);
HEIS_API const char* heis_status_name(heis_status status);

/* Warnings (boundary contamination, fallbacks) go to stderr unless a callback is set.
 * Passing NULL restores the default. The callback may be invoked from worker threads. */
typedef void (*heis_warning_fn)(const char* message, void* user_data);
HEIS_API void heis_set_warning_callback(heis_warning_fn fn, void* user_data);

/* ---- group ---------------------------------------------------------------------------- */

/* 1 + 2/Q with Q = 2n + 2. */
HEIS_API heis_status heis_fujita_exponent(int n, double* out);
/* "subcritical", "critical" or "supercritical" for exponent p on H_n. */
HEIS_API heis_status heis_classify_regime(double p, int n, const char** out);

/* ---- fields --------------------------------------------------------------------------- */

typedef struct heis_field heis_field;

/* Zero field on [-L_xy, L_xy]^{2n} x [-L_tau, L_tau] with N_xy^{2n} x N_tau nodes (tau fastest). */
HEIS_API heis_status heis_field_create(int n, double L_xy, double L_tau, int N_xy, int N_tau, heis_field** out);
/* Samples a named datum ("compact_bump", "weighted_decay", "constant") onto the field's grid. */
HEIS_API heis_status heis_field_fill_datum(heis_field* field, const char* kind, double radius, double kappa,
                                           int subsamples);
HEIS_API heis_status heis_field_read(const char* path, heis_field** out);
HEIS_API heis_status heis_field_write(const heis_field* field, const char* path);
HEIS_API heis_status heis_field_size(const heis_field* field, size_t* out);
/* Direct access to the values in storage order. The pointer is invalidated by
 * heis_field_fill_datum and heis_field_destroy. */
HEIS_API heis_status heis_field_data(heis_field* field, double** out);
HEIS_API heis_status heis_field_integrate(const heis_field* field, double* out);
/* out = Delta_H field; periodic != 0 selects periodic wrap, otherwise zero Dirichlet ghosts. */
HEIS_API heis_status heis_field_sublaplacian(const heis_field* field, int periodic, heis_field** out);
HEIS_API void heis_field_destroy(heis_field* field);

/* ---- solver --------------------------------------------------------------------------- */

typedef struct heis_solve_result {
  int blowup;          /* 1 when the sup-norm reached the threshold */
  int contaminated;    /* 1 when the boundary shell exceeded 1% of the sup-norm */
  double lifespan;     /* extrapolated blow-up time, or -1 */
  double final_time;   /* last stable time */
  double final_sup;    /* sup-norm at the last stable time */
  size_t steps;
} heis_solve_result;

/* Integrates u_t = Delta_H u + |u|^p from epsilon * datum with Dirichlet boundary. */
HEIS_API heis_status heis_solve(const heis_field* datum, double p, double epsilon, double t_max,
                                double blowup_threshold, heis_solve_result* out);

/* ---- configured commands -------------------------------------------------------------- */

HEIS_API size_t heis_command_count(void);
HEIS_API const char* heis_command_name(size_t index);
HEIS_API heis_status heis_command_key_count(const char* command, size_t* out);
HEIS_API heis_status heis_command_key(const char* command, size_t index, const char** name,
                                      const char** default_value, const char** description);

typedef struct heis_config heis_config;

HEIS_API heis_status heis_config_create(const char* command, heis_config** out);
HEIS_API heis_status heis_config_load_file(heis_config* config, const char* path);
/* Unknown keys fail with HEIS_ERR_INVALID_ARGUMENT naming the key. */
HEIS_API heis_status heis_config_set(heis_config* config, const char* key, const char* value);
HEIS_API heis_status heis_config_set_workers(heis_config* config, int workers);
HEIS_API heis_status heis_config_set_seed(heis_config* config, uint64_t seed);
/* Materialises defaults and validates every key. */
HEIS_API heis_status heis_config_resolve(heis_config* config);
HEIS_API heis_status heis_config_get(const heis_config* config, const char* key, const char** value);
/* "key = value" lines of the resolved configuration. */
HEIS_API heis_status heis_config_dump(const heis_config* config, const char** text);
HEIS_API void heis_config_destroy(heis_config* config);

typedef struct heis_report heis_report;

/* Runs the command and writes its reports and manifest into out_dir. Returns HEIS_OK when
 * the command completed, whether or not its checks passed; inspect the report for that.
 * Refuses a directory holding a previous run unless force != 0. */
HEIS_API heis_status heis_run(heis_config* config, const char* out_dir, int force, heis_report** out);
HEIS_API int heis_report_all_pass(const heis_report* report);
HEIS_API size_t heis_report_check_count(const heis_report* report);
HEIS_API heis_status heis_report_check(const heis_report* report, size_t index, const char** name, int* pass,
                                       double* value, const char** detail);
HEIS_API size_t heis_report_file_count(const heis_report* report);
HEIS_API const char* heis_report_file(const heis_report* report, size_t index);
HEIS_API const char* heis_report_summary(const heis_report* report);
HEIS_API void heis_report_destroy(heis_report* report);

/* Exit code for a status and (when the status is HEIS_OK) the report's checks. */
HEIS_API int heis_exit_code(heis_status status, const heis_report* report);

#ifdef __cplusplus
}
#endif

#endif /* HEISLAB_H */
