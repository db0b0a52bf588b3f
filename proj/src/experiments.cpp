#include "memu/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "memu/csv.hpp"
#include "memu/error.hpp"
#include "memu/muscle.hpp"
#include "memu/policy.hpp"
#include "memu/rng.hpp"

namespace fs = std::filesystem;

namespace memu {

std::string git_blob_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                               &EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), content.data(), content.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error("sha1 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

namespace {

using ordered_json = nlohmann::ordered_json;

double num9(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

// Collects every file of one command so the manifest can list their hashes.
class OutputDir {
 public:
  explicit OutputDir(std::string path) : path_(std::move(path)) {
    std::error_code ec;
    fs::create_directories(path_, ec);
    if (ec) throw Error("cannot create output directory '" + path_ + "': " + ec.message());
  }

  const std::string& path() const { return path_; }

  std::string write(const std::string& name, const std::string& content) {
    const std::string full = (fs::path(path_) / name).string();
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + full + "' for writing");
    out << content;
    out.close();
    if (!out) throw Error("failed writing '" + full + "'");
    files_.emplace_back(name, git_blob_hash(content));
    return full;
  }

  void manifest(const ExperimentConfig& cfg, std::string_view command,
                const std::vector<std::uint64_t>& seeds, ordered_json extra = {}) {
    ordered_json m;
    m["format"] = "memu-manifest";
    m["schema"] = kConfigSchema;
    m["command"] = command;
    m["versions"] = {{"memu", kVersion}, {"config_schema", kConfigSchema}};
    m["seeds"] = seeds;
    m["config_source"] = fs::path(cfg.source_name).filename().string();
    m["config_hash"] = git_blob_hash(cfg.canonical_text());
    ordered_json echo = ordered_json::object();
    std::map<std::string, std::map<std::string, std::string>> sorted;
    for (const auto& e : cfg.entries) sorted[e.section][e.key] = e.value;
    for (const auto& [section, keys] : sorted)
      for (const auto& [key, value] : keys) echo[section][key] = value;
    m["config"] = echo;
    m["resolved"] = {
        {"plant", to_string(cfg.plant.kind())},
        {"actuator", to_string(cfg.actuator.kind)},
        {"task", to_string(cfg.task.kind)},
        {"mode", to_string(cfg.mode)},
        {"beta", num9(cfg.actuator.muscle.beta)},
        {"beta_source", cfg.beta_source == BetaSource::eq12 ? "eq12" : "explicit"},
        {"floor_damping", num9(cfg.actuator.limits.k_damp_floor)},
        {"policy_hz", num9(cfg.rates.policy_hz)},
        {"controller_hz", num9(cfg.rates.controller_hz)},
        {"physics_dt", num9(cfg.rates.physics_dt)},
        {"substeps", cfg.rates.substeps_per_control},
    };
    if (!extra.is_null()) m["results"] = std::move(extra);
    ordered_json files = ordered_json::array();
    for (const auto& [name, hash] : files_) files.push_back({{"file", name}, {"sha1", hash}});
    m["outputs"] = files;
    const std::string text = m.dump(2) + "\n";
    const std::string full = (fs::path(path_) / "manifest.json").string();
    std::ofstream out(full, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + full + "' for writing");
    out << text;
    if (!out) throw Error("failed writing '" + full + "'");
  }

 private:
  std::string path_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::string out_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  return opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
}

std::vector<std::uint64_t> seeds_for(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (opts.seed) return {*opts.seed};
  return cfg.seeds;
}

void log_line(const RunOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << '\n';
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// Maps a scalar drive u in [-1, 1] (positive toward +q) onto a controller.
void drive(ActuatorKind kind, double u, std::span<double> a) {
  u = std::clamp(u, -1.0, 1.0);
  if (kind == ActuatorKind::muscle) {
    a[0] = -u;
    a[1] = u;
  } else {
    a[0] = u;
  }
}

}  // namespace

Policy scripted_policy(const TrainTask& task) {
  const ActuatorConfig act = task.actuator;
  const TaskConfig tc = task.task;
  const double v_target = task.reward.v_target;
  const double q_hi = task.plant.phi_max();
  return [act, tc, v_target, q_hi](std::span<const double> obs, std::span<double> a) {
    const double q = obs[0];
    const double q_dot = obs[1];
    switch (tc.kind) {
      case TaskKind::hold:
        if (act.kind == ActuatorKind::pd) {
          a[0] = tc.target / act.pd_action_scale;
        } else {
          drive(act.kind, 2.0 * (tc.target - q) - 0.1 * q_dot, a);
        }
        break;
      case TaskKind::walk:
        if (act.kind == ActuatorKind::pd) {
          a[0] = (q + 0.2 * v_target) / act.pd_action_scale;
        } else {
          drive(act.kind, 0.1 * (v_target - q_dot), a);
        }
        break;
      case TaskKind::hop: {
        const bool stance = obs[4] > 0.5;
        if (act.kind == ActuatorKind::pd) {
          a[0] = (stance ? q_hi : 0.0) / act.pd_action_scale;
        } else if (act.kind == ActuatorKind::muscle) {
          a[0] = stance ? -1.0 : 0.0;
          a[1] = stance ? 1.0 : -1.0;
        } else {
          a[0] = stance ? 1.0 : -0.2;
        }
        break;
      }
    }
  };
}

Policy resolve_policy(const ExperimentConfig& cfg, const TrainTask& task) {
  if (cfg.policy == "scripted") return scripted_policy(task);
  fs::path path(cfg.policy);
  if (path.is_relative() && !cfg.base_dir.empty()) path = fs::path(cfg.base_dir) / path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(cfg.source_name + ": task.policy: cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  PolicySpec spec;
  try {
    spec = PolicySpec::from_json(text.str());
  } catch (const std::exception& e) {
    throw ConfigError(cfg.source_name + ": task.policy: " + e.what());
  }
  if (spec.input_dim() != task.input_dim() || spec.output_dim() != task.output_dim())
    throw ConfigError(cfg.source_name + ": task.policy: network is " +
                      std::to_string(spec.input_dim()) + " -> " +
                      std::to_string(spec.output_dim()) + " but the task needs " +
                      std::to_string(task.input_dim()) + " -> " +
                      std::to_string(task.output_dim()));
  return as_policy(spec);
}

SimulateOutput cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opts) {
  const TrainTask task = cfg.train_task(cfg.actuator.kind);
  const Policy policy = resolve_policy(cfg, task);
  const std::uint64_t seed = seeds_for(cfg, opts).front();
  EpisodeSpec spec = build_episode(task, seed);
  spec.record_rows = true;

  SimulateOutput result;
  result.trace = run_episode(spec, policy);
  OutputDir dir(out_dir(cfg, opts));
  result.trace_path =
      dir.write("trace.csv", render([&](std::ostream& o) { write_trace_csv(o, result.trace); }));
  dir.manifest(cfg, "simulate", {seed},
               {{"termination", result.trace.termination},
                {"episode_return", num9(result.trace.episode_return)},
                {"policy_ticks", result.trace.policy_ticks},
                {"controller_ticks", result.trace.controller_ticks},
                {"physics_steps", result.trace.physics_steps},
                {"excitation_clamps", result.trace.excitation_clamps}});
  log_line(opts, "simulate: " + std::to_string(result.trace.rows.size()) + " rows, termination " +
                     result.trace.termination + ", return " +
                     format_number(result.trace.episode_return) + " -> " + result.trace_path);
  return result;
}

SweepOutput cmd_sweep_beta(const ExperimentConfig& cfg, const RunOptions& opts,
                           std::vector<double> betas, std::vector<double> freqs) {
  if (betas.empty()) betas = cfg.sweep.betas;
  if (freqs.empty()) freqs = cfg.sweep.freqs;
  const HoldBenchmark bench = cfg.hold_benchmark();
  const MuscleGeometry g = derive_geometry(cfg.actuator.muscle);

  SweepOutput result;
  result.recommended_beta = beta_from_damping(cfg.muscle_k_damp, g.a1, cfg.actuator.muscle.f_max);
  log_line(opts, "recommended beta for k_damp = " + format_number(cfg.muscle_k_damp) + ": " +
                     format_number(result.recommended_beta));

  std::vector<StabilityCell> cells(betas.size() * freqs.size());
  const int threads = cfg.trainer.threads;
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    const double beta = betas[i / freqs.size()];
    const double hz = freqs[i % freqs.size()];
    const std::vector<double> b{beta};
    const std::vector<double> f{hz};
    cells[i] = sweep_beta(bench, b, f).front();
  });
  result.cells = std::move(cells);

  OutputDir dir(out_dir(cfg, opts));
  result.csv_path =
      dir.write("sweep.csv", render([&](std::ostream& o) { write_sweep_csv(o, result.cells); }));
  std::size_t unstable = 0;
  for (const auto& c : result.cells) unstable += c.stable ? 0 : 1;
  dir.manifest(cfg, "sweep-beta", {},
               {{"recommended_beta", num9(result.recommended_beta)},
                {"k_damp", num9(cfg.muscle_k_damp)},
                {"a1", num9(g.a1)},
                {"cells", result.cells.size()},
                {"unstable_cells", unstable},
                {"oscillation_threshold", kOscillationThreshold}});
  log_line(opts, "sweep-beta: " + std::to_string(result.cells.size()) + " cells, " +
                     std::to_string(unstable) + " unstable -> " + result.csv_path);
  return result;
}

std::vector<TrainRunSummary> cmd_train(const ExperimentConfig& cfg, const RunOptions& opts) {
  const TrainTask task = cfg.train_task(cfg.actuator.kind);
  const std::vector<std::uint64_t> seeds = seeds_for(cfg, opts);
  OutputDir dir(out_dir(cfg, opts));

  std::vector<TrainRunSummary> summary;
  std::vector<std::vector<GenerationStats>> curves;
  for (std::uint64_t seed : seeds) {
    const TrainResult r = train(task, cfg.trainer, seed);
    const std::string tag = "seed" + std::to_string(seed);
    dir.write("learning_curve_" + tag + ".csv",
              render([&](std::ostream& o) { write_learning_curve_csv(o, r.curve); }));
    dir.write("policy_" + tag + ".json", r.policy.to_json());
    summary.push_back({seed, r.initial_return, r.final_return});
    curves.push_back(r.curve);
    log_line(opts, "train " + std::string(to_string(cfg.actuator.kind)) + " seed " +
                       std::to_string(seed) + ": return " + format_number(r.initial_return) +
                       " -> " + format_number(r.final_return));
  }

  std::vector<GenerationStats> aggregate(curves.front().size());
  for (std::size_t g = 0; g < aggregate.size(); ++g) {
    aggregate[g].generation = static_cast<int>(g);
    for (const auto& c : curves) {
      aggregate[g].mean_return += c[g].mean_return / curves.size();
      aggregate[g].max_return += c[g].max_return / curves.size();
      aggregate[g].mean_episode_len += c[g].mean_episode_len / curves.size();
    }
  }
  dir.write("learning_curve_aggregate.csv",
            render([&](std::ostream& o) { write_learning_curve_csv(o, aggregate); }));
  dir.write("train_summary.csv", render([&](std::ostream& o) {
              CsvWriter csv(o);
              csv.header({"seed", "actuator", "initial_return", "final_return", "improved"});
              for (const auto& s : summary) {
                csv.cell(static_cast<long long>(s.seed))
                    .cell(to_string(cfg.actuator.kind))
                    .cell(s.initial_return)
                    .cell(s.final_return)
                    .cell(static_cast<long long>(s.final_return > s.initial_return ? 1 : 0));
                csv.end_row();
              }
            }));
  dir.manifest(cfg, "train", seeds);
  return summary;
}

std::vector<RobustnessRow> cmd_eval_robustness(const ExperimentConfig& cfg,
                                               const RunOptions& opts) {
  const std::vector<std::uint64_t> seeds = seeds_for(cfg, opts);
  std::vector<TrainTask> tasks;
  for (ActuatorKind kind : cfg.compare) tasks.push_back(cfg.train_task(kind));

  std::vector<RobustnessRow> rows;
  for (std::uint64_t seed : seeds) {
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const TrainResult r = train(tasks[k], cfg.trainer, seed);
      const RobustnessResult rr = success_rate(tasks[k], as_policy(r.policy),
                                               cfg.robustness.suite, cfg.robustness.episodes);
      rows.push_back({seed, cfg.compare[k], rr.success_rate, rr.mean_return});
      log_line(opts, "robustness " + std::string(to_string(cfg.compare[k])) + " seed " +
                         std::to_string(seed) + ": success " + format_number(rr.success_rate));
    }
  }

  OutputDir dir(out_dir(cfg, opts));
  dir.write("robustness.csv", render([&](std::ostream& o) {
              CsvWriter csv(o);
              csv.header({"seed", "actuator", "success_rate", "mean_return"});
              for (const auto& r : rows) {
                csv.cell(static_cast<long long>(r.seed))
                    .cell(to_string(r.actuator))
                    .cell(r.success_rate)
                    .cell(r.mean_return);
                csv.end_row();
              }
            }));

  ordered_json results = ordered_json::array();
  const std::string summary = render([&](std::ostream& o) {
    CsvWriter csv(o);
    csv.header({"actuator", "n_seeds", "success_rate", "success_ci_lo", "success_ci_hi",
                "mean_return", "return_ci_lo", "return_ci_hi"});
    for (std::size_t k = 0; k < cfg.compare.size(); ++k) {
      std::vector<double> sr;
      std::vector<double> ret;
      for (const auto& r : rows) {
        if (r.actuator != cfg.compare[k]) continue;
        sr.push_back(r.success_rate);
        ret.push_back(r.mean_return);
      }
      const std::uint64_t bs = stream_seed(cfg.robustness.suite.seed, 0xb007, k);
      const BootstrapCI a = bootstrap_mean_ci(sr, cfg.robustness.bootstrap_resamples,
                                              cfg.robustness.ci_level, bs);
      const BootstrapCI b = bootstrap_mean_ci(ret, cfg.robustness.bootstrap_resamples,
                                              cfg.robustness.ci_level, bs + 1);
      csv.cell(to_string(cfg.compare[k]))
          .cell(static_cast<long long>(sr.size()))
          .cell(a.mean).cell(a.lo).cell(a.hi)
          .cell(b.mean).cell(b.lo).cell(b.hi);
      csv.end_row();
      results.push_back({{"actuator", to_string(cfg.compare[k])},
                         {"success_rate", num9(a.mean)},
                         {"ci", {num9(a.lo), num9(a.hi)}}});
      log_line(opts, std::string(to_string(cfg.compare[k])) + ": success rate " +
                         format_number(a.mean) + " [" + format_number(a.lo) + ", " +
                         format_number(a.hi) + "]");
    }
  });
  dir.write("robustness_summary.csv", summary);
  dir.manifest(cfg, "eval-robustness", seeds, {{"summary", results}});
  return rows;
}

void write_curves_csv(std::ostream& out, const MuscleParams& p, int samples) {
  require(samples >= 2, "export-curves: need at least two samples");
  CsvWriter csv(out);
  csv.header({"x", "fl", "fv", "fp"});
  const double lo = -1.5;
  const double hi = 2.0;
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * i / (samples - 1);
    csv.cell(x).cell(fl_curve(x, p)).cell(fv_curve(x, p)).cell(fp_curve(x, p));
    csv.end_row();
  }
}

void cmd_export_curves(const ExperimentConfig& cfg, const RunOptions& opts) {
  OutputDir dir(out_dir(cfg, opts));
  const std::string path = dir.write(
      "curves.csv", render([&](std::ostream& o) { write_curves_csv(o, cfg.actuator.muscle); }));
  dir.manifest(cfg, "export-curves", {});
  log_line(opts, "export-curves -> " + path);
}

}  // namespace memu
