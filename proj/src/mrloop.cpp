#include "memu/mrloop.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <string>

#include "memu/csv.hpp"
#include "memu/error.hpp"
#include "memu/rng.hpp"

namespace memu {

LoopMode parse_loop_mode(std::string_view name) {
  if (name == "ideal-sim") return LoopMode::ideal_sim;
  if (name == "hardware-faithful") return LoopMode::hardware_faithful;
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "' (expected ideal-sim or hardware-faithful)");
}

std::string_view to_string(LoopMode mode) {
  return mode == LoopMode::ideal_sim ? "ideal-sim" : "hardware-faithful";
}

RateConfig RateConfig::ideal_sim() { return {50.0, 200.0, 0.005, 4, true}; }

RateConfig RateConfig::hardware_faithful() { return {50.0, 500.0, 0.0002, 100, true}; }

void RateConfig::validate(LoopMode mode) const {
  require(policy_hz > 0.0 && std::isfinite(policy_hz), "rates: policy_hz must be > 0");
  require(controller_hz >= policy_hz && std::isfinite(controller_hz),
          "rates: controller_hz must be >= policy_hz");
  require(physics_dt > 0.0 && physics_dt <= 0.01, "rates: physics_dt must lie in (0, 0.01]");
  require(substeps_per_control >= 1, "rates: substeps must be >= 1");
  require(1.0 / controller_hz >= physics_dt * (1.0 - 1e-9),
          "rates: controller period must not be shorter than physics_dt");
  if (mode == LoopMode::ideal_sim) {
    const double period = 1.0 / policy_hz;
    require(std::abs(physics_dt * substeps_per_control - period) <= 1e-9 * period,
            "rates: ideal-sim requires physics_dt * substeps = one policy period");
  }
}

double floor_damping_for(LoopMode mode) {
  return mode == LoopMode::hardware_faithful ? 0.08 : 0.0;
}

void LatencyModel::validate() const {
  require(action_delay >= 0.0 && std::isfinite(action_delay),
          "latency: action_delay must be >= 0");
  require(jitter_std >= 0.0 && std::isfinite(jitter_std), "latency: jitter_std must be >= 0");
}

namespace {

struct PendingTorque {
  double t;
  double tau;
};

class ControllerClock {
 public:
  ControllerClock(double hz, const LatencyModel& latency)
      : period_(1.0 / hz), sigma_(latency.jitter_std), rng_(latency.seed) {
    advance();
  }

  double next() const { return next_; }

  void advance() {
    double t = static_cast<double>(index_) * period_;
    if (sigma_ > 0.0) {
      t += std::clamp(sigma_ * rng_.normal(), -2.0 * sigma_, 2.0 * sigma_);
    }
    next_ = std::max({t, last_, 0.0});
    last_ = next_;
    ++index_;
  }

 private:
  double period_;
  double sigma_;
  Rng rng_;
  std::size_t index_ = 0;
  double next_ = 0.0;
  double last_ = 0.0;
};

}  // namespace

EpisodeTrace run_episode(const EpisodeSpec& spec, const Policy& policy) {
  if (!(spec.horizon > 0.0)) throw std::invalid_argument("run_episode: horizon must be > 0");
  if (!policy) throw std::invalid_argument("run_episode: empty policy");
  spec.plant.validate();
  spec.latency.validate();
  spec.reward.validate();
  const RateConfig& rates = spec.rates;
  rates.validate(LoopMode::hardware_faithful);

  Actuator actuator(spec.actuator);
  TaskMonitor monitor(spec.task, spec.reward, spec.plant);
  const bool muscle = actuator.kind() == ActuatorKind::muscle;
  actuator.reset(spec.m_act0, spec.initial.q, spec.initial.q_dot);

  EpisodeTrace trace;
  trace.action_dim = actuator.action_dim();
  trace.has_muscle = muscle;
  trace.seed = spec.seed;

  const double dt = rates.physics_dt;
  const double eps = 1e-6 * dt;
  const auto steps = static_cast<std::size_t>(std::llround(spec.horizon / dt));
  if (spec.record_rows) trace.rows.reserve(steps);

  Rng obs_rng(stream_seed(spec.seed, 0x0b5));
  ControllerClock clock(rates.controller_hz, spec.latency);
  const double policy_period = 1.0 / rates.policy_hz;
  std::size_t policy_index = 0;
  std::size_t push_index = 0;

  std::vector<double> action(trace.action_dim, 0.0);
  std::vector<double> prev_action(trace.action_dim, 0.0);
  std::vector<double> obs;
  std::deque<PendingTorque> pending;
  double held = 0.0;
  double last_ctrl_t = 0.0;
  bool any_ctrl = false;
  LogSumAccumulator task_sum;
  double act_sum = 0.0;
  bool failed = false;

  PlantState state = spec.initial;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    while (push_index < spec.pushes.size() && spec.pushes[push_index].t <= t + eps) {
      spec.plant.apply_push(state, spec.pushes[push_index].dv);
      ++push_index;
    }

    double r_task = 0.0;
    double r_act = 0.0;
    bool ticked = false;
    while (static_cast<double>(policy_index) * policy_period <= t + eps) {
      obs = observe(spec.plant, state, muscle ? &actuator.muscle_state() : nullptr,
                    muscle ? &spec.actuator.muscle : nullptr, spec.noise, obs_rng);
      if (monitor.signal_size() > 0) obs.push_back(monitor.signal());
      policy(obs, action);
      for (double a : action)
        if (!std::isfinite(a)) throw Error("policy produced a non-finite action");
      if (policy_index == 0) prev_action = action;
      const double log_r = monitor.reward_log(state);
      r_task = std::exp(log_r);
      r_act = reward_action_rate(prev_action, action, spec.reward.w_act);
      task_sum.add_log(log_r);
      act_sum += r_act;
      prev_action = action;
      ++policy_index;
      ++trace.policy_ticks;
      if (!failed) ++trace.ok_policy_steps;
      ticked = true;
    }

    if (!rates.backend_hold) held = 0.0;
    while (clock.next() <= t + eps) {
      const double elapsed = any_ctrl ? t - last_ctrl_t : 0.0;
      const ActuatorCommand cmd = to_command(spec.actuator, action);
      const double tau = actuator.apply(cmd, state.q, state.q_dot, elapsed);
      pending.push_back({t + spec.latency.action_delay, tau});
      trace.controller_tick_times.push_back(t);
      ++trace.controller_ticks;
      last_ctrl_t = t;
      any_ctrl = true;
      clock.advance();
    }
    while (!pending.empty() && pending.front().t <= t + eps) {
      held = pending.front().tau;
      pending.pop_front();
    }

    state = spec.plant.step(state, held, dt);
    ++trace.physics_steps;
    monitor.observe_step(state, dt);
    if (monitor.failed() && !failed) {
      failed = true;
      trace.termination = "failure";
    }

    if (spec.record_rows) {
      TraceRow row;
      row.t = state.t;
      row.q = state.q;
      row.q_dot = state.q_dot;
      row.z = state.z;
      row.z_dot = state.z_dot;
      row.tau = held;
      for (std::size_t k = 0; k < action.size(); ++k) row.act[k] = action[k];
      if (muscle) row.m_act = actuator.muscle_state().m_act;
      row.r_task = ticked ? r_task : 0.0;
      row.r_act = ticked ? r_act : 0.0;
      row.done = failed || i + 1 == steps;
      trace.rows.push_back(row);
    }
    if (failed && spec.stop_on_failure) break;
  }

  trace.excitation_clamps = actuator.excitation_clamps();
  trace.log_task_return = task_sum.log_sum();
  trace.act_return = act_sum;
  trace.episode_return = (task_sum.empty() ? 0.0 : task_sum.value()) + act_sum;
  return trace;
}

EpisodeSpec make_episode(const Plant& plant, const ActuatorConfig& actuator,
                         const RateConfig& rates, const TaskConfig& task,
                         const RewardConfig& reward) {
  EpisodeSpec spec;
  spec.plant = plant;
  spec.actuator = actuator;
  spec.rates = rates;
  spec.task = task;
  spec.reward = reward;
  spec.horizon = task.horizon;
  spec.initial = plant.initial_state(task.q0);
  spec.initial.q_dot += task.kick;
  spec.m_act0 = task.m_act0;
  return spec;
}

double stability_metric(const EpisodeTrace& trace, double settle_time) {
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const TraceRow& row : trace.rows) {
    if (row.t < settle_time) continue;
    if (!any) {
      lo = hi = row.q;
      any = true;
    }
    lo = std::min(lo, row.q);
    hi = std::max(hi, row.q);
  }
  if (!any) throw std::invalid_argument("stability_metric: empty post-settle window");
  return hi - lo;
}

EpisodeTrace run_hold_benchmark(const HoldBenchmark& bench, double beta,
                                double controller_hz) {
  ActuatorConfig act;
  act.kind = ActuatorKind::muscle;
  act.muscle = bench.muscle;
  act.muscle.beta = beta;
  act.limits = bench.limits;

  TaskConfig task;
  task.kind = TaskKind::hold;
  task.horizon = bench.horizon;
  task.q0 = 0.5 * (bench.muscle.phi_min + bench.muscle.phi_max);
  task.target = task.q0;
  task.kick = bench.kick;
  task.m_act0 = {1.0, 1.0};
  task.fail_angle = 1e9;
  task.settle_time = bench.settle_time;

  RateConfig rates = bench.rates;
  rates.controller_hz = controller_hz;
  rates.policy_hz = std::min(rates.policy_hz, controller_hz);

  EpisodeSpec spec = make_episode(Plant(bench.plant), act, rates, task, RewardConfig{});
  spec.latency = bench.latency;
  return run_episode(spec, [](std::span<const double>, std::span<double> a) {
    std::fill(a.begin(), a.end(), 1.0);
  });
}

std::vector<StabilityCell> sweep_beta(const HoldBenchmark& bench,
                                      std::span<const double> betas,
                                      std::span<const double> controller_hz) {
  if (betas.empty() || controller_hz.empty())
    throw std::invalid_argument("sweep_beta: beta and frequency grids must be non-empty");
  std::vector<StabilityCell> cells;
  cells.reserve(betas.size() * controller_hz.size());
  for (double beta : betas) {
    for (double hz : controller_hz) {
      const EpisodeTrace trace = run_hold_benchmark(bench, beta, hz);
      const double amp = stability_metric(trace, bench.settle_time);
      cells.push_back({beta, hz, amp, amp <= kOscillationThreshold});
    }
  }
  return cells;
}

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace) {
  CsvWriter csv(out);
  std::vector<std::string> cols{"t", "q", "q_dot", "z", "z_dot", "tau"};
  for (std::size_t k = 0; k < trace.action_dim; ++k) cols.push_back("act_" + std::to_string(k));
  if (trace.has_muscle) {
    cols.push_back("m_act_0");
    cols.push_back("m_act_1");
  }
  cols.insert(cols.end(), {"r_task", "r_act", "done"});
  csv.header(cols);
  for (const TraceRow& r : trace.rows) {
    csv.cell(r.t).cell(r.q).cell(r.q_dot).cell(r.z).cell(r.z_dot).cell(r.tau);
    for (std::size_t k = 0; k < trace.action_dim; ++k) csv.cell(r.act[k]);
    if (trace.has_muscle) csv.cell(r.m_act[0]).cell(r.m_act[1]);
    csv.cell(r.r_task).cell(r.r_act).cell(static_cast<long long>(r.done ? 1 : 0));
    csv.end_row();
  }
}

void write_sweep_csv(std::ostream& out, std::span<const StabilityCell> cells) {
  CsvWriter csv(out);
  csv.header({"beta", "controller_hz", "amplitude", "stable"});
  for (const StabilityCell& c : cells) {
    csv.cell(c.beta).cell(c.controller_hz).cell(c.amplitude).cell(
        static_cast<long long>(c.stable ? 1 : 0));
    csv.end_row();
  }
}

}  // namespace memu
