#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "memu/actuators.hpp"
#include "memu/domain.hpp"
#include "memu/mrloop.hpp"
#include "memu/plant.hpp"
#include "memu/policy.hpp"
#include "memu/rewards.hpp"
#include "memu/task.hpp"

namespace memu {

/// Everything that defines a training / evaluation environment.
struct TrainTask {
  Plant plant = PendulumPlant{};
  ActuatorConfig actuator;
  RateConfig rates = RateConfig::ideal_sim();
  LatencyModel latency;
  TaskConfig task;
  RewardConfig reward;
  NoiseAndDR noise = NoiseAndDR::zero();

  /// Policy input size: observation channels plus the task signal.
  std::size_t input_dim() const;
  std::size_t output_dim() const { return action_dim(actuator.kind); }
};

/// Cross-entropy method over the flat policy parameter vector.
struct TrainerConfig {
  int population = 64;
  double elite_fraction = 0.125;
  int generations = 30;
  double init_std = 0.1;
  double extra_noise = 0.001;  // added to the elite variance, decays geometrically
  double noise_decay = 0.9;
  int episodes_per_eval = 2;
  int eval_episodes = 4;      // rollouts behind initial_return / final_return
  std::vector<std::size_t> hidden{32};
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  int elite_count() const;
};

struct GenerationStats {
  int generation = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  double mean_episode_len = 0.0;  // s
};

struct TrainResult {
  PolicySpec policy;
  std::vector<GenerationStats> curve;
  double initial_return = 0.0;  // evaluation return of the initial policy
  double final_return = 0.0;    // evaluation return of the returned policy
};

/// Builds the (optionally randomized) episode number `index` of a stream.
EpisodeSpec build_episode(const TrainTask& task, std::uint64_t episode_seed);

/// Adapts a policy network to the episode loop.
Policy as_policy(const PolicySpec& spec);

struct EvalSummary {
  double mean_return = 0.0;
  double mean_episode_len = 0.0;
};

/// Mean return over `episodes` rollouts seeded from `eval_seed`.
EvalSummary evaluate_policy(const TrainTask& task, const PolicySpec& policy,
                            std::uint64_t eval_seed, int episodes, int threads = 1);

/// Deterministic under `seed` for any thread count.
TrainResult train(const TrainTask& task, const TrainerConfig& cfg, std::uint64_t seed);

void write_learning_curve_csv(std::ostream& out, std::span<const GenerationStats> curve);

/// Unseen perturbations for robustness evaluation.
struct PerturbationSuite {
  Range push{-1.5, 1.5};
  double push_scale = 2.0;
  double push_interval = 0.5;  // s
  Range mass_shift{-0.5, 1.2};
  Range init_joint_pos{-0.25, 0.25};
  std::uint64_t seed = 0x5eed;

  static PerturbationSuite none();
};

struct RobustnessResult {
  double success_rate = 0.0;  // fraction of non-failure policy steps
  double mean_return = 0.0;
};

RobustnessResult success_rate(const TrainTask& task, const Policy& policy,
                              const PerturbationSuite& suite, int n_episodes = 100);

struct BootstrapCI {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the mean.
BootstrapCI bootstrap_mean_ci(std::span<const double> values, int resamples,
                              double level, std::uint64_t seed);

/// Runs fn(i) for i in [0, n) on `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace memu
