#include "memu/memu.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memu/actuators.hpp"
#include "memu/config.hpp"
#include "memu/error.hpp"
#include "memu/experiments.hpp"
#include "memu/muscle.hpp"

struct memu_muscle {
  memu::Actuator actuator;
};

struct memu_experiment {
  std::string text;
  std::string source;
  std::string base_dir;
  std::vector<std::string> overrides;
  memu::ExperimentConfig config;
  memu_log_fn log = nullptr;
  void* log_user = nullptr;
};

namespace {

thread_local std::string g_last_error;

memu_status set_error(memu_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Argument-level calls: bad inputs are the caller's fault.
template <class Fn>
memu_status guard(Fn&& fn) {
  try {
    fn();
    return MEMU_OK;
  } catch (const memu::ConfigError& e) {
    return set_error(MEMU_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(MEMU_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return set_error(MEMU_ERR_RUNTIME, e.what());
  } catch (...) {
    return set_error(MEMU_ERR_RUNTIME, "unknown error");
  }
}

// Experiment commands: everything but configuration problems is a runtime failure.
template <class Fn>
memu_status guard_command(memu_experiment* e, Fn&& fn) {
  if (e == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null experiment handle");
  std::ostringstream log;
  memu::RunOptions opts;
  opts.log = &log;
  const memu_status status = guard([&] { fn(opts); });
  if (e->log != nullptr) {
    std::istringstream lines(log.str());
    for (std::string line; std::getline(lines, line);) e->log(line.c_str(), e->log_user);
  }
  if (status == MEMU_ERR_INVALID_ARGUMENT) return MEMU_ERR_RUNTIME;
  return status;
}

memu::MuscleParams to_params(const memu_muscle_params& p) {
  memu::MuscleParams m;
  m.l_min = p.l_min;
  m.l_max = p.l_max;
  m.fv_max = p.fv_max;
  m.fp_max = p.fp_max;
  m.lce_min = p.lce_min;
  m.lce_max = p.lce_max;
  m.f_max = p.f_max;
  m.phi_min = p.phi_min;
  m.phi_max = p.phi_max;
  m.tau_act = p.tau_act;
  m.beta = p.beta;
  m.validate();
  return m;
}

template <class Fn>
memu_status curve(double x, const memu_muscle_params* p, double* out, Fn&& fn) {
  if (p == nullptr || out == nullptr)
    return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    memu::require_finite(x, "curve argument");
    *out = fn(x, to_params(*p));
  });
}

void reload(memu_experiment& e) {
  e.config = memu::parse_config(e.text, e.source, e.overrides);
  e.config.base_dir = e.base_dir;
}

std::optional<std::uint64_t> seed_arg(int64_t seed) {
  if (seed < 0) return std::nullopt;
  return static_cast<std::uint64_t>(seed);
}

}  // namespace

extern "C" {

const char* memu_version(void) { return memu::kVersion.data(); }

const char* memu_last_error(void) { return g_last_error.c_str(); }

void memu_muscle_params_default(memu_muscle_params* out) {
  if (out == nullptr) return;
  const memu::MuscleParams d;
  *out = {d.l_min, d.l_max, d.fv_max, d.fp_max, d.lce_min, d.lce_max,
          d.f_max, d.phi_min, d.phi_max, d.tau_act, d.beta};
}

memu_status memu_fl(double length, const memu_muscle_params* p, double* out) {
  return curve(length, p, out, [](double x, const memu::MuscleParams& m) { return memu::fl_curve(x, m); });
}

memu_status memu_fv(double v_bar, const memu_muscle_params* p, double* out) {
  return curve(v_bar, p, out, [](double x, const memu::MuscleParams& m) { return memu::fv_curve(x, m); });
}

memu_status memu_fp(double length, const memu_muscle_params* p, double* out) {
  return curve(length, p, out, [](double x, const memu::MuscleParams& m) { return memu::fp_curve(x, m); });
}

memu_status memu_activation_step(double m_act, double excitation, double dt, double tau_act,
                                 double* out) {
  if (out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = memu::activation_step(m_act, excitation, dt, tau_act); });
}

memu_status memu_beta_from_damping(double k_damp, double a1, double f_max, double* out) {
  if (out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = memu::beta_from_damping(k_damp, a1, f_max); });
}

memu_status memu_muscle_create(const memu_muscle_params* p, double tau_abs_max,
                               double floor_damping, memu_muscle** out) {
  if (p == nullptr || out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guard([&] {
    memu::require(tau_abs_max > 0.0 && std::isfinite(tau_abs_max), "tau_abs_max must be > 0");
    memu::require(floor_damping >= 0.0 && std::isfinite(floor_damping),
                  "floor_damping must be >= 0");
    memu::ActuatorConfig cfg;
    cfg.kind = memu::ActuatorKind::muscle;
    cfg.muscle = to_params(*p);
    cfg.limits.tau_abs_max = tau_abs_max;
    cfg.limits.k_damp_floor = floor_damping;
    *out = new memu_muscle{memu::Actuator(cfg)};
  });
}

void memu_muscle_destroy(memu_muscle* m) { delete m; }

memu_status memu_muscle_reset(memu_muscle* m, double m_act_1, double m_act_2, double q,
                              double q_dot) {
  if (m == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null muscle handle");
  return guard([&] {
    memu::require(m_act_1 >= 0.0 && m_act_1 <= 1.0 && m_act_2 >= 0.0 && m_act_2 <= 1.0,
                  "activities must lie in [0, 1]");
    memu::require_finite(q, "q");
    memu::require_finite(q_dot, "q_dot");
    m->actuator.reset({m_act_1, m_act_2}, q, q_dot);
  });
}

memu_status memu_muscle_step(memu_muscle* m, double excitation_1, double excitation_2,
                             double q, double q_dot, double dt, double* torque) {
  if (m == nullptr || torque == nullptr)
    return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    memu::require(dt >= 0.0 && std::isfinite(dt), "dt must be >= 0");
    memu::require_finite(q, "q");
    memu::require_finite(q_dot, "q_dot");
    memu::ExcitationPair cmd;
    cmd.e = {excitation_1, excitation_2};
    *torque = m->actuator.apply(cmd, q, q_dot, dt);
  });
}

memu_status memu_muscle_activation(const memu_muscle* m, double out[2]) {
  if (m == nullptr || out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  out[0] = m->actuator.muscle_state().m_act[0];
  out[1] = m->actuator.muscle_state().m_act[1];
  return MEMU_OK;
}

memu_status memu_experiment_load_file(const char* path, memu_experiment** out) {
  if (path == nullptr || out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream in(path, std::ios::binary);
  if (!in) return set_error(MEMU_ERR_CONFIG, std::string(path) + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  auto* e = new memu_experiment;
  e->text = text.str();
  e->source = path;
  const auto slash = e->source.find_last_of('/');
  e->base_dir = slash == std::string::npos ? "" : e->source.substr(0, slash);
  const memu_status s = guard([&] { reload(*e); });
  if (s != MEMU_OK) {
    delete e;
    return s;
  }
  *out = e;
  return MEMU_OK;
}

memu_status memu_experiment_load_string(const char* text, const char* source_name,
                                        memu_experiment** out) {
  if (text == nullptr || out == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  auto* e = new memu_experiment;
  e->text = text;
  e->source = source_name != nullptr ? source_name : "<string>";
  const memu_status s = guard([&] { reload(*e); });
  if (s != MEMU_OK) {
    delete e;
    return s;
  }
  *out = e;
  return MEMU_OK;
}

void memu_experiment_destroy(memu_experiment* e) { delete e; }

memu_status memu_experiment_override(memu_experiment* e, const char* assignment) {
  if (e == nullptr || assignment == nullptr)
    return set_error(MEMU_ERR_INVALID_ARGUMENT, "null argument");
  e->overrides.emplace_back(assignment);
  const memu_status s = guard([&] { reload(*e); });
  if (s != MEMU_OK) {
    e->overrides.pop_back();
    return s == MEMU_ERR_INVALID_ARGUMENT ? MEMU_ERR_CONFIG : s;
  }
  return MEMU_OK;
}

memu_status memu_experiment_set_log(memu_experiment* e, memu_log_fn fn, void* user) {
  if (e == nullptr) return set_error(MEMU_ERR_INVALID_ARGUMENT, "null experiment handle");
  e->log = fn;
  e->log_user = user;
  return MEMU_OK;
}

memu_status memu_simulate(memu_experiment* e, const char* out_dir, int64_t seed) {
  return guard_command(e, [&](memu::RunOptions& opts) {
    opts.seed = seed_arg(seed);
    if (out_dir) opts.out_dir = out_dir;
    memu::cmd_simulate(e->config, opts);
  });
}

memu_status memu_train(memu_experiment* e, const char* out_dir, int64_t seed) {
  return guard_command(e, [&](memu::RunOptions& opts) {
    opts.seed = seed_arg(seed);
    if (out_dir) opts.out_dir = out_dir;
    memu::cmd_train(e->config, opts);
  });
}

memu_status memu_eval_robustness(memu_experiment* e, const char* out_dir, int64_t seed) {
  return guard_command(e, [&](memu::RunOptions& opts) {
    opts.seed = seed_arg(seed);
    if (out_dir) opts.out_dir = out_dir;
    memu::cmd_eval_robustness(e->config, opts);
  });
}

memu_status memu_export_curves(memu_experiment* e, const char* out_dir) {
  return guard_command(e, [&](memu::RunOptions& opts) {
    if (out_dir) opts.out_dir = out_dir;
    memu::cmd_export_curves(e->config, opts);
  });
}

memu_status memu_sweep_beta(memu_experiment* e, const char* out_dir, const double* betas,
                            size_t n_betas, const double* freqs, size_t n_freqs,
                            double* recommended_beta) {
  if ((n_betas > 0 && betas == nullptr) || (n_freqs > 0 && freqs == nullptr))
    return set_error(MEMU_ERR_INVALID_ARGUMENT, "null grid with non-zero size");
  return guard_command(e, [&](memu::RunOptions& opts) {
    if (out_dir) opts.out_dir = out_dir;
    std::vector<double> b(betas, betas + n_betas);
    std::vector<double> f(freqs, freqs + n_freqs);
    for (double v : b)
      if (!(v >= 0.0 && std::isfinite(v))) throw memu::ConfigError("sweep: betas must be finite and >= 0");
    for (double v : f)
      if (!(v > 0.0 && std::isfinite(v))) throw memu::ConfigError("sweep: frequencies must be > 0");
    const memu::SweepOutput r = memu::cmd_sweep_beta(e->config, opts, b, f);
    if (recommended_beta) *recommended_beta = r.recommended_beta;
  });
}

}  // extern "C"
