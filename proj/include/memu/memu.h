#ifndef MEMU_MEMU_H
#define MEMU_MEMU_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#  ifdef MEMU_BUILDING_LIBRARY
#    define MEMU_API __declspec(dllexport)
#  else
#    define MEMU_API __declspec(dllimport)
#  endif
#else
#  define MEMU_API __attribute__((visibility("default")))
#endif

/* Every fallible call returns a status; on failure memu_last_error() holds a
 * message for the calling thread until its next failing call. */
typedef enum memu_status {
  MEMU_OK = 0,
  MEMU_ERR_INVALID_ARGUMENT = 1,
  MEMU_ERR_CONFIG = 2,
  MEMU_ERR_RUNTIME = 3
} memu_status;

MEMU_API const char* memu_version(void);
MEMU_API const char* memu_last_error(void);

/* ---- muscle model ---- */

typedef struct memu_muscle_params {
  double l_min;
  double l_max;
  double fv_max;
  double fp_max;
  double lce_min;
  double lce_max;
  double f_max;
  double phi_min;
  double phi_max;
  double tau_act;
  double beta;
} memu_muscle_params;

/* Fills `out` with the library defaults. */
MEMU_API void memu_muscle_params_default(memu_muscle_params* out);

MEMU_API memu_status memu_fl(double length, const memu_muscle_params* p, double* out);
MEMU_API memu_status memu_fv(double v_bar, const memu_muscle_params* p, double* out);
MEMU_API memu_status memu_fp(double length, const memu_muscle_params* p, double* out);
MEMU_API memu_status memu_activation_step(double m_act, double excitation, double dt,
                                          double tau_act, double* out);
/* beta = k_damp / (4 a1 f_max) */
MEMU_API memu_status memu_beta_from_damping(double k_damp, double a1, double f_max,
                                            double* out);

/* Antagonistic muscle pair driving one joint. */
typedef struct memu_muscle memu_muscle;

MEMU_API memu_status memu_muscle_create(const memu_muscle_params* p, double tau_abs_max,
                                        double floor_damping, memu_muscle** out);
MEMU_API void memu_muscle_destroy(memu_muscle* m);
MEMU_API memu_status memu_muscle_reset(memu_muscle* m, double m_act_1, double m_act_2,
                                       double q, double q_dot);
/* Advances activations by dt and returns the joint torque in N*m. */
MEMU_API memu_status memu_muscle_step(memu_muscle* m, double excitation_1,
                                      double excitation_2, double q, double q_dot,
                                      double dt, double* torque);
MEMU_API memu_status memu_muscle_activation(const memu_muscle* m, double out[2]);

/* ---- experiments ---- */

typedef struct memu_experiment memu_experiment;

/* Receives one human-readable progress line at a time. */
typedef void (*memu_log_fn)(const char* line, void* user);

MEMU_API memu_status memu_experiment_load_file(const char* path, memu_experiment** out);
MEMU_API memu_status memu_experiment_load_string(const char* text, const char* source_name,
                                                 memu_experiment** out);
MEMU_API void memu_experiment_destroy(memu_experiment* e);
/* "section.key=value"; re-validates the whole config. */
MEMU_API memu_status memu_experiment_override(memu_experiment* e, const char* assignment);
MEMU_API memu_status memu_experiment_set_log(memu_experiment* e, memu_log_fn fn, void* user);

/* out_dir may be NULL (config output.directory); seed < 0 uses the config seeds. */
MEMU_API memu_status memu_simulate(memu_experiment* e, const char* out_dir, int64_t seed);
MEMU_API memu_status memu_train(memu_experiment* e, const char* out_dir, int64_t seed);
MEMU_API memu_status memu_eval_robustness(memu_experiment* e, const char* out_dir,
                                          int64_t seed);
MEMU_API memu_status memu_export_curves(memu_experiment* e, const char* out_dir);
/* Empty grids (count 0) use the config [sweep] section. recommended_beta may be NULL. */
MEMU_API memu_status memu_sweep_beta(memu_experiment* e, const char* out_dir,
                                     const double* betas, size_t n_betas,
                                     const double* freqs, size_t n_freqs,
                                     double* recommended_beta);

#ifdef __cplusplus
}
#endif

#endif /* MEMU_MEMU_H */
