#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memu/actuators.hpp"
#include "memu/domain.hpp"
#include "memu/plant.hpp"
#include "memu/rewards.hpp"
#include "memu/task.hpp"

namespace memu {

/// ideal_sim: 5 ms physics, torques recomputed every physics step, policy
/// every 4 steps. hardware_faithful: 0.2 ms physics under a ~500 Hz
/// controller and ~50 Hz policy, plus always-on floor damping.
enum class LoopMode { ideal_sim, hardware_faithful };

LoopMode parse_loop_mode(std::string_view name);
std::string_view to_string(LoopMode mode);

struct RateConfig {
  double policy_hz = 50.0;
  double controller_hz = 500.0;
  double physics_dt = 0.0002;
  /// Physics updates per policy step.
  int substeps_per_control = 100;
  /// The backend repeats the last torque between controller updates.
  bool backend_hold = true;

  static RateConfig ideal_sim();
  static RateConfig hardware_faithful();
  void validate(LoopMode mode) const;
};

/// Default floor damping for a mode (N·m·s/rad).
double floor_damping_for(LoopMode mode);

struct LatencyModel {
  double action_delay = 0.0;  // s between controller tick and torque at the backend
  double jitter_std = 0.0;    // s, Gaussian tick-time jitter truncated at 2 sigma
  std::uint64_t seed = 0;

  void validate() const;
};

struct TraceRow {
  double t = 0.0;
  double q = 0.0;
  double q_dot = 0.0;
  double z = 0.0;
  double z_dot = 0.0;
  double tau = 0.0;  // torque applied during the step ending at t
  std::array<double, 2> act{0.0, 0.0};
  std::array<double, 2> m_act{0.0, 0.0};
  double r_task = 0.0;  // non-zero only on rows where the policy ticked
  double r_act = 0.0;
  bool done = false;
};

struct EpisodeTrace {
  std::size_t action_dim = 1;
  bool has_muscle = false;
  std::vector<TraceRow> rows;  // one per physics step when recording
  std::vector<double> controller_tick_times;
  std::uint64_t seed = 0;
  std::string termination = "horizon";
  std::size_t policy_ticks = 0;
  std::size_t controller_ticks = 0;
  std::size_t physics_steps = 0;
  /// Policy ticks completed before any failure.
  std::size_t ok_policy_steps = 0;
  std::size_t excitation_clamps = 0;
  double log_task_return = 0.0;  // log of the summed task reward
  double act_return = 0.0;       // summed action-rate penalty
  double episode_return = 0.0;   // task + action-rate
};

/// Writes observation-space inputs to `action` (sized to the controller).
using Policy = std::function<void(std::span<const double> obs, std::span<double> action)>;

struct EpisodeSpec {
  Plant plant = PendulumPlant{};
  ActuatorConfig actuator;
  RateConfig rates = RateConfig::hardware_faithful();
  LatencyModel latency;
  TaskConfig task;
  RewardConfig reward;
  NoiseAndDR noise = NoiseAndDR::zero();
  PlantState initial;
  std::array<double, 2> m_act0{0.0, 0.0};
  std::vector<Push> pushes;
  double horizon = 2.0;
  std::uint64_t seed = 0;
  bool record_rows = true;
  bool stop_on_failure = true;
};

/// Event-ordered multi-rate loop: policy ticks, controller ticks and backend
/// updates are quantized onto the physics grid and processed in that order
/// before each physics step.
EpisodeTrace run_episode(const EpisodeSpec& spec, const Policy& policy);

/// Builds the episode for a task from nominal values (no randomization).
EpisodeSpec make_episode(const Plant& plant, const ActuatorConfig& actuator,
                         const RateConfig& rates, const TaskConfig& task,
                         const RewardConfig& reward);

/// Peak-to-peak joint angle over rows with t >= settle_time.
double stability_metric(const EpisodeTrace& trace, double settle_time);

/// Co-contraction hold: both muscles fully excited and active, the joint
/// starts at the range midpoint with an initial velocity kick.
struct HoldBenchmark {
  PendulumPlant plant{0.005, 0.0, 0.0, -3.14, 3.14, 2.7, 0.3, 0.0};
  MuscleParams muscle;
  TorqueLimits limits{2.7, 2.7, 0.08};
  RateConfig rates = RateConfig::hardware_faithful();
  LatencyModel latency;
  double kick = 2.0;
  double horizon = 4.0;
  double settle_time = 2.0;
};

/// Amplitude threshold above which a hold run counts as oscillating.
inline constexpr double kOscillationThreshold = 0.2;

EpisodeTrace run_hold_benchmark(const HoldBenchmark& bench, double beta,
                                double controller_hz);

struct StabilityCell {
  double beta = 0.0;
  double controller_hz = 0.0;
  double amplitude = 0.0;
  bool stable = true;
};

/// Runs the hold benchmark on every (beta, controller_hz) pair, beta-major.
std::vector<StabilityCell> sweep_beta(const HoldBenchmark& bench,
                                      std::span<const double> betas,
                                      std::span<const double> controller_hz);

void write_trace_csv(std::ostream& out, const EpisodeTrace& trace);
void write_sweep_csv(std::ostream& out, std::span<const StabilityCell> cells);

}  // namespace memu
