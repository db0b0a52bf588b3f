#include "memu/mailbox.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

#include "memu/error.hpp"

namespace memu {
namespace {

struct Snapshot {
  std::array<double, 16> obs{};
  std::size_t size = 0;
};

struct ActionSlot {
  std::array<double, 2> a{0.0, 0.0};
};

}  // namespace

EpisodeTrace run_realtime_replay(const EpisodeSpec& spec, const Policy& policy,
                                 double time_scale) {
  using clock = std::chrono::steady_clock;
  require(spec.horizon > 0.0, "realtime replay: horizon must be > 0");
  require(time_scale > 0.0, "realtime replay: time_scale must be > 0");
  spec.rates.validate(LoopMode::hardware_faithful);

  Actuator actuator(spec.actuator);
  actuator.reset(spec.m_act0, spec.initial.q, spec.initial.q_dot);
  const bool muscle = actuator.kind() == ActuatorKind::muscle;
  const std::size_t adim = actuator.action_dim();

  LatestValue<Snapshot> obs_box;
  LatestValue<ActionSlot> action_box;
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> policy_ticks{0};

  auto snapshot = [&](const PlantState& s) {
    Rng unused(0);
    NoiseAndDR quiet = spec.noise;
    quiet.noise_enabled = false;
    std::vector<double> o = observe(spec.plant, s, muscle ? &actuator.muscle_state() : nullptr,
                                    muscle ? &spec.actuator.muscle : nullptr, quiet, unused);
    Snapshot snap;
    snap.size = std::min(o.size(), snap.obs.size());
    for (std::size_t i = 0; i < snap.size; ++i) snap.obs[i] = o[i];
    return snap;
  };

  PlantState state = spec.initial;
  obs_box.publish(snapshot(state));
  const double signal = spec.task.kind == TaskKind::hold ? spec.task.target : spec.reward.v_target;
  const bool with_signal = spec.task.kind != TaskKind::hop;

  const auto start = clock::now();
  auto wall = [&](double sim_t) {
    return start + std::chrono::duration_cast<clock::duration>(
                       std::chrono::duration<double>(sim_t * time_scale));
  };

  std::thread policy_thread([&] {
    std::vector<double> obs;
    std::vector<double> action(adim, 0.0);
    const double period = 1.0 / spec.rates.policy_hz;
    for (std::size_t k = 0; !stop.load(); ++k) {
      std::this_thread::sleep_until(wall(static_cast<double>(k) * period));
      Snapshot snap;
      if (!obs_box.read(snap)) continue;
      obs.assign(snap.obs.begin(), snap.obs.begin() + snap.size);
      if (with_signal) obs.push_back(signal);
      policy(obs, action);
      ActionSlot slot;
      for (std::size_t i = 0; i < adim; ++i) slot.a[i] = action[i];
      action_box.publish(slot);
      ++policy_ticks;
    }
  });

  EpisodeTrace trace;
  trace.action_dim = adim;
  trace.has_muscle = muscle;
  trace.seed = spec.seed;
  const double ctrl_period = 1.0 / spec.rates.controller_hz;
  const double dt = spec.rates.physics_dt;
  const auto substeps =
      std::max<long long>(1, std::llround(ctrl_period / dt));
  const auto ticks = static_cast<std::size_t>(std::ceil(spec.horizon / ctrl_period - 1e-9));
  ActionSlot current;
  try {
    for (std::size_t j = 0; j < ticks; ++j) {
      std::this_thread::sleep_until(wall(static_cast<double>(j) * ctrl_period));
      action_box.read(current);
      const ActuatorCommand cmd =
          to_command(spec.actuator, std::span<const double>(current.a.data(), adim));
      const double tau =
          actuator.apply(cmd, state.q, state.q_dot, j == 0 ? 0.0 : ctrl_period);
      trace.controller_tick_times.push_back(state.t);
      ++trace.controller_ticks;
      for (long long s = 0; s < substeps; ++s) {
        state = spec.plant.step(state, tau, dt);
        ++trace.physics_steps;
        TraceRow row;
        row.t = state.t;
        row.q = state.q;
        row.q_dot = state.q_dot;
        row.z = state.z;
        row.z_dot = state.z_dot;
        row.tau = tau;
        row.act = current.a;
        if (muscle) row.m_act = actuator.muscle_state().m_act;
        trace.rows.push_back(row);
      }
      obs_box.publish(snapshot(state));
    }
  } catch (...) {
    stop = true;
    policy_thread.join();
    throw;
  }
  stop = true;
  policy_thread.join();
  if (!trace.rows.empty()) trace.rows.back().done = true;
  trace.policy_ticks = policy_ticks.load();
  trace.ok_policy_steps = trace.policy_ticks;
  trace.excitation_clamps = actuator.excitation_clamps();
  return trace;
}

}  // namespace memu
