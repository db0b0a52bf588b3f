#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memu/config.hpp"
#include "memu/learn.hpp"
#include "memu/mrloop.hpp"

namespace memu {

inline constexpr std::string_view kVersion = "0.3.0";

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the config seeds
  std::string out_dir;                // empty: config output.directory
  std::ostream* log = nullptr;        // human-readable progress, may be null
};

/// git-compatible blob id (SHA-1 over "blob <size>\0" + content), lowercase hex.
std::string git_blob_hash(std::string_view content);

/// Fixed policy used by `simulate` when no policy file is configured: a
/// proportional law toward the hold target, velocity tracking for walk, and
/// push-in-stance / retract-in-flight for hop, expressed in each controller's
/// action space.
Policy scripted_policy(const TrainTask& task);

/// Policy selected by `task.policy` (scripted or a policy JSON file).
Policy resolve_policy(const ExperimentConfig& cfg, const TrainTask& task);

struct SimulateOutput {
  EpisodeTrace trace;
  std::string trace_path;
};
SimulateOutput cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts);

struct SweepOutput {
  std::vector<StabilityCell> cells;
  double recommended_beta = 0.0;  // from the configured muscle k_damp
  std::string csv_path;
};
/// Empty grids fall back to the [sweep] section.
SweepOutput cmd_sweep_beta(const ExperimentConfig& cfg, const RunOptions& opts,
                           std::vector<double> betas = {}, std::vector<double> freqs = {});

struct TrainRunSummary {
  std::uint64_t seed = 0;
  double initial_return = 0.0;
  double final_return = 0.0;
};
std::vector<TrainRunSummary> cmd_train(const ExperimentConfig& cfg, const RunOptions& opts);

struct RobustnessRow {
  std::uint64_t seed = 0;
  ActuatorKind actuator = ActuatorKind::pd;
  double success_rate = 0.0;
  double mean_return = 0.0;
};
std::vector<RobustnessRow> cmd_eval_robustness(const ExperimentConfig& cfg,
                                               const RunOptions& opts);

/// FL / FV / FP samples over x in [-1.5, 2] for plotting.
void write_curves_csv(std::ostream& out, const MuscleParams& p, int samples = 701);
void cmd_export_curves(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace memu
