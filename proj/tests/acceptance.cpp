// Acceptance checks: one PASS/FAIL line per primary criterion. Expected values
// come from closed-form oracles written out here, not from the library.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memu/actuators.hpp"
#include "memu/config.hpp"
#include "memu/experiments.hpp"
#include "memu/learn.hpp"
#include "memu/mrloop.hpp"
#include "memu/muscle.hpp"
#include "memu/plant.hpp"
#include "memu/rewards.hpp"

namespace fs = std::filesystem;
using namespace memu;

namespace {

// Oracles.
double ref_fv(double v, double fvmax) {
  const double y = fvmax - 1.0;
  if (v <= -1.0) return 0.0;
  if (v <= 0.0) return (v + 1.0) * (v + 1.0);
  if (v <= y) return fvmax - (y - v) * (y - v) / y;
  return fvmax;
}

double slope(const std::function<double(double)>& f, double x, double h, int side) {
  return side < 0 ? (3 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / (2 * h)
                  : (-3 * f(x) + 4 * f(x + h) - f(x + 2 * h)) / (2 * h);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome fv_linearization() {
  // Checked literally. The lengthening branch has curvature 1 / (fv_max - 1),
  // so the 1.1 v^2 bound can only hold for v <= 0 when fv_max < 1.91.
  const MuscleParams p;
  double ratio_short = 0.0;
  double ratio_long = 0.0;
  for (int i = -2000; i <= 2000; ++i) {
    const double v = 0.2 * i / 2000.0;
    if (v == 0.0) continue;
    const double r = std::abs(fv_curve(v, p) - 1.0 - 2.0 * v) / (v * v);
    double& worst = v < 0.0 ? ratio_short : ratio_long;
    worst = std::max(worst, r);
  }
  const bool ok = ratio_short <= 1.1 && ratio_long <= 1.1;
  return {ok, "max |FV - 1 - 2v| / v^2 = " + fmt(ratio_short) + " (v < 0), " + fmt(ratio_long) +
                  " (v > 0; 1/(fv_max-1) = " + fmt(1.0 / (p.fv_max - 1.0)) + "), bound 1.1"};
}

Outcome damping_equivalence() {
  const MuscleParams base;
  const MuscleGeometry g = derive_geometry(base);
  const CurveMask mask{true, true};
  bool ok = true;
  double worst_slope = 0.0;
  double worst_band = 0.0;
  for (double k_damp : {0.01, 0.05, 0.1}) {
    MuscleParams p = base;
    p.beta = k_damp / (4.0 * g.a1 * p.f_max);
    MuscleState s;
    s.m_act = {1.0, 1.0};
    const double h = 1e-6;
    const double sl = (joint_torque(s, 0.0, h, p, g, mask) - joint_torque(s, 0.0, -h, p, g, mask)) /
                      (2.0 * h);
    const double rel = std::abs(sl + k_damp) / k_damp;
    worst_slope = std::max(worst_slope, rel);
    ok = ok && rel <= 0.01;
    const double qd_max = 0.05 / (p.beta * g.a1);
    for (int i = 1; i <= 100; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double qd = sgn * qd_max * i / 100.0;
        const double v1 = p.beta * g.a1 * qd;
        const double oracle = p.f_max * (ref_fv(-v1, p.fv_max) - ref_fv(v1, p.fv_max));
        const double tau = joint_torque(s, 0.0, qd, p, g, mask);
        ok = ok && std::abs(tau - oracle) <= 1e-9;
        const double band = std::abs(tau + k_damp * qd) / (k_damp * std::abs(qd));
        worst_band = std::max(worst_band, band);
        ok = ok && band <= 0.05;
      }
    }
  }
  return {ok, "slope rel err " + fmt(worst_slope) + ", band rel err " + fmt(worst_band)};
}

Outcome beta_stability(const fs::path& config_dir) {
  const ExperimentConfig cfg = load_config((config_dir / "beta_sweep.ini").string());
  if (cfg.mode != LoopMode::hardware_faithful) return {false, "sweep config is not hardware-faithful"};
  const HoldBenchmark bench = cfg.hold_benchmark();
  const std::vector<double> betas{0.36, 0.66};
  const std::vector<StabilityCell> cells = sweep_beta(bench, betas, cfg.sweep.freqs);
  const std::size_t nf = cfg.sweep.freqs.size();
  double best_ratio = 0.0;
  double best_hz = 0.0;
  double at500 = -1.0;
  for (std::size_t f = 0; f < nf; ++f) {
    const double lo = cells[f].amplitude;
    const double hi = cells[nf + f].amplitude;
    const double ratio = hi / std::max(lo, 1e-12);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_hz = cfg.sweep.freqs[f];
    }
    if (cfg.sweep.freqs[f] == 500.0) at500 = lo;
  }
  const bool ok = best_ratio > 5.0 && at500 >= 0.0 && at500 < 0.05;
  return {ok, "amp(0.66)/amp(0.36) = " + fmt(best_ratio) + " at " + fmt(best_hz) +
                  " Hz; amp(0.36 @ 500 Hz) = " + fmt(at500) + " rad"};
}

Outcome activation() {
  const double m = activation_step(0.0, 1.0, 0.01, 0.01);
  const double expected = 1.0 - std::exp(-1.0);
  return {std::abs(m - expected) <= 1e-6, "m(tau) = " + fmt(m)};
}

Outcome curve_anchors() {
  const MuscleParams p;
  bool ok = fl_curve(0.24, p) == 0.0 && fl_curve(1.0, p) == 1.0 && fl_curve(1.53, p) == 0.0;
  ok = ok && fv_curve(5.0, p) == 1.38 && fv_curve(p.fv_max - 1.0, p) == 1.38;
  for (double l = -1.0; l <= 1.0; l += 0.01) ok = ok && fp_curve(l, p) == 0.0;
  const double a = 0.5 * (p.l_min + 1.0);
  const double b = 0.5 * (1.0 + p.l_max);
  auto fl = [&](double x) { return fl_curve(x, p); };
  auto fv = [&](double x) { return fv_curve(x, p); };
  auto fp = [&](double x) { return fp_curve(x, p); };
  const double h = 1e-5;
  double worst = 0.0;
  auto knot = [&](const std::function<double(double)>& f, double x) {
    worst = std::max(worst, std::abs(slope(f, x, h, -1) - slope(f, x, h, +1)));
  };
  for (double x : {p.l_min, a, 1.0, b, p.l_max}) knot(fl, x);
  for (double x : {-1.0, 0.0, p.fv_max - 1.0}) knot(fv, x);
  for (double x : {1.0, b}) knot(fp, x);
  ok = ok && worst <= 1e-6;
  return {ok, "max knot slope jump " + fmt(worst)};
}

Outcome rewards() {
  RewardConfig cfg;
  cfg.v_target = 0.5;
  cfg.sigma = 0.25;
  const std::vector<double> a{0.3, -0.4};
  const bool ok = reward_walk(0.5, cfg) == 1.0 &&
                  std::abs(reward_walk(1.0, cfg) - std::exp(-1.0)) <= 1e-12 &&
                  reward_hop(0.0, cfg) == 1.0 && reward_hop(-2.0, cfg) == 1.0 &&
                  reward_action_rate(a, a, cfg.w_act) == 0.0;
  return {ok, "r_walk(err 0.5) = " + fmt(reward_walk(1.0, cfg))};
}

Outcome multirate() {
  PendulumPlant plant;
  plant.mgd = 0.0;
  ActuatorConfig act;
  act.kind = ActuatorKind::pd;
  act.limits.k_damp_floor = 0.08;
  TaskConfig task;
  task.horizon = 10.0;
  task.fail_angle = 1e9;
  EpisodeSpec spec = make_episode(Plant(plant), act, RateConfig::hardware_faithful(), task, {});
  const EpisodeTrace tr = run_episode(spec, [](std::span<const double>, std::span<double> a) {
    a[0] = 0.25;
  });
  const double dt = spec.rates.physics_dt;
  std::vector<bool> tick(tr.rows.size() + 1, false);
  for (double t : tr.controller_tick_times) tick[static_cast<std::size_t>(std::llround(t / dt))] = true;
  bool zoh = true;
  for (std::size_t i = 1; i < tr.rows.size(); ++i)
    if (tr.rows[i].tau != tr.rows[i - 1].tau && !tick[i]) zoh = false;
  const auto near = [](std::size_t n, double target) { return std::abs(double(n) - target) <= 1.0; };
  const bool ok = near(tr.policy_ticks, 500) && near(tr.controller_ticks, 5000) && zoh;
  return {ok, std::to_string(tr.policy_ticks) + " policy / " + std::to_string(tr.controller_ticks) +
                  " controller ticks, zero-order hold " + (zoh ? "ok" : "violated")};
}

Outcome integrator() {
  // Hopper: push off at full torque, compare apex rise with the ballistic height.
  const HopperPlant h;
  PlantState s = hopper_standing_state(h, 0.0);
  for (int i = 0; i < 10000 && s.in_contact; ++i) s = step_hopper(h, s, h.tau_abs_max, 1e-3);
  const double z0 = s.z;
  const double v0 = s.z_dot;
  double apex = z0;
  while (s.z_dot > 0.0) {
    s = step_hopper(h, s, h.tau_abs_max, 1e-3);
    apex = std::max(apex, s.z);
  }
  const double ballistic = v0 * v0 / (2.0 * h.g);
  const double apex_err = std::abs(apex - z0 - ballistic) / ballistic;

  // Pendulum: energy drift against a fine-step RK4 reference.
  PendulumPlant p;
  p.inertia = 0.01;
  p.mgd = 0.2;
  p.phi_min = -10.0;
  p.phi_max = 10.0;
  PlantState ps;
  ps.q = 1.0;
  double q = 1.0, w = 0.0;
  const auto acc = [&](double x) { return -p.mgd * std::sin(x) / p.inertia; };
  for (int i = 0; i < 1000000; ++i) {
    const double d = 1e-4;
    const double k1q = w, k1w = acc(q);
    const double k2q = w + 0.5 * d * k1w, k2w = acc(q + 0.5 * d * k1q);
    const double k3q = w + 0.5 * d * k2w, k3w = acc(q + 0.5 * d * k2q);
    const double k4q = w + d * k3w, k4w = acc(q + d * k3q);
    q += d / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
    w += d / 6 * (k1w + 2 * k2w + 2 * k3w + k4w);
  }
  const double e_ref = 0.5 * p.inertia * w * w + p.mgd * (1.0 - std::cos(q));
  double drift = 0.0;
  for (int i = 0; i < 100000; ++i) {
    ps = step_pendulum(p, ps, 0.0, 1e-3);
    drift = std::max(drift, std::abs(pendulum_energy(p, ps) - e_ref) / e_ref);
  }
  return {apex_err <= 0.01 && drift <= 0.005,
          "apex rel err " + fmt(apex_err) + ", energy drift " + fmt(drift)};
}

Outcome training(const fs::path& config_dir, const fs::path& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig cfg = load_config((config_dir / "train_hold.ini").string());
  RunOptions opts;
  opts.out_dir = (work / "train").string();
  const std::vector<TrainRunSummary> runs = cmd_train(cfg, opts);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int improved = 0;
  for (const auto& r : runs) improved += r.final_return > r.initial_return ? 1 : 0;
  const bool ok = runs.size() == 10 && improved == 10 && cfg.trainer.generations <= 30 &&
                  secs < 300.0;
  return {ok, std::to_string(improved) + "/" + std::to_string(runs.size()) +
                  " seeds improved in " + fmt(secs) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& config_dir, const fs::path& work) {
  const std::string cli = MEMU_CLI_PATH;
  const std::string fast =
      " --set train.population=16 --set train.generations=3 --set train.eval_episodes=2";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "simulate --config " + (config_dir / "hold_muscle.ini").string() + " --seed 5"},
      {"curves", "export-curves --config " + (config_dir / "hold_muscle.ini").string()},
      {"sweep", "sweep-beta --config " + (config_dir / "beta_sweep.ini").string() +
                    " --betas 0.36,0.66 --freqs 500,125"},
      {"train", "train --config " + (config_dir / "train_hold.ini").string() + " --seed 2" + fast},
      {"robust", "eval-robustness --config " + (config_dir / "hop_robustness.ini").string() +
                     " --seed 1 --set train.robustness_episodes=2" + fast},
  };
  std::size_t compared = 0;
  for (const auto& [tag, args] : commands) {
    std::map<std::string, std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = work / ("det_" + tag + "_" + std::to_string(k));
      fs::remove_all(dir);
      const std::string cmd = cli + " " + args + " --out " + dir.string() + " >/dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, tag + " failed to run"};
      for (const auto& e : fs::directory_iterator(dir)) runs[k][e.path().filename()] = slurp(e.path());
    }
    if (runs[0] != runs[1]) return {false, tag + " output differs between reruns"};
    if (!runs[0].count("manifest.json")) return {false, tag + " wrote no manifest"};
    compared += runs[0].size();
  }
  return {true, std::to_string(compared) + " files byte-identical across reruns of 5 commands"};
}

}  // namespace

int main() {
  const fs::path config_dir = MEMU_CONFIG_DIR;
  const fs::path work = fs::temp_directory_path() / "memu_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
      {"fv-linearization", fv_linearization},
      {"damping-rule-equivalence", damping_equivalence},
      {"beta-stability", [&] { return beta_stability(config_dir); }},
      {"activation-dynamics", activation},
      {"curve-anchors", curve_anchors},
      {"reward-formulas", rewards},
      {"multi-rate-accounting", multirate},
      {"integrator-fidelity", integrator},
      {"training-smoke", [&] { return training(config_dir, work); }},
      {"determinism", [&] { return determinism(config_dir, work); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : checks) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  fs::remove_all(work);
  return failures == 0 ? 0 : 1;
}
