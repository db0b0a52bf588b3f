#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memu/actuators.hpp"
#include "memu/domain.hpp"
#include "memu/learn.hpp"
#include "memu/mrloop.hpp"
#include "memu/plant.hpp"
#include "memu/rewards.hpp"
#include "memu/task.hpp"

namespace memu {

inline constexpr int kConfigSchema = 1;

enum class BetaSource { explicit_value, eq12 };

struct SweepConfig {
  std::vector<double> betas{0.0, 0.18, 0.36, 0.66};
  std::vector<double> freqs{5000.0, 1000.0, 500.0, 250.0, 200.0, 125.0};
  double kick = 2.0;
  double horizon = 4.0;
  double settle_time = 2.0;
};

struct RobustnessConfig {
  int episodes = 100;
  PerturbationSuite suite;
  int bootstrap_resamples = 2000;
  double ci_level = 0.95;
};

/// One effective `key = value` entry after overrides, in file order.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  std::string origin;  // "file:line" or "override"
};

/// Fully resolved experiment description.
///
/// Text format (schema 1): `schema = 1` before the first section, then
/// `[section]` headers with `key = value` lines; `#` starts a comment. Lists
/// are comma separated, integer lists accept `a..b` ranges. Unknown sections
/// or keys are rejected.
struct ExperimentConfig {
  Plant plant = PendulumPlant{};
  ActuatorConfig actuator;
  LoopMode mode = LoopMode::ideal_sim;
  bool has_muscle_section = false;
  bool k_scale_set = false;
  BetaSource beta_source = BetaSource::explicit_value;
  double muscle_k_damp = 0.0;  // target damping when beta_source = eq12

  RateConfig rates = RateConfig::ideal_sim();
  LatencyModel latency;

  TrainerConfig trainer;
  std::vector<std::uint64_t> seeds{0};
  std::vector<ActuatorKind> compare{ActuatorKind::pd, ActuatorKind::torque,
                                    ActuatorKind::muscle};
  RobustnessConfig robustness;

  NoiseAndDR noise = NoiseAndDR::zero();
  TaskConfig task;
  RewardConfig reward;
  std::string policy = "scripted";  // or a policy JSON path (relative to the config)

  SweepConfig sweep;
  std::string output_dir = "out";

  std::string source_name;
  std::string base_dir;  // directory of the config file, for relative paths
  std::vector<ConfigEntry> entries;

  /// Canonical `key = value` text of the effective entries, used for hashing.
  std::string canonical_text() const;
  /// Actuator settings for `kind` sharing this config's gains, limits, muscle.
  ActuatorConfig actuator_for(ActuatorKind kind) const;
  /// Environment for training / evaluation with controller `kind`.
  TrainTask train_task(ActuatorKind kind) const;
  /// Hold benchmark built from the plant, muscle and rate sections.
  HoldBenchmark hold_benchmark() const;
};

/// Parses config text. Overrides are `section.key=value` strings applied on
/// top of the file. Throws ConfigError anchored at `source:line`.
ExperimentConfig parse_config(std::string_view text, std::string_view source_name,
                              std::span<const std::string> overrides = {});

ExperimentConfig load_config(const std::string& path,
                             std::span<const std::string> overrides = {});

}  // namespace memu
