// memu: command-line front end over the C API.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memu/memu.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config;
  int64_t seed = -1;
  std::string out;
  std::string actuator;
  std::string task;
  std::string mode;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "experiment config file")->required();
  cmd->add_option("--seed", a.seed, "seed (overrides the config seeds)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", a.out, "output directory (overrides output.directory)");
  cmd->add_option("--actuator", a.actuator, "pd | torque | muscle");
  cmd->add_option("--task", a.task, "hold | walk | hop");
  cmd->add_option("--mode", a.mode, "ideal-sim | hardware-faithful");
  cmd->add_option("--set", a.sets, "extra override, section.key=value (repeatable)");
}

int exit_code(memu_status s) {
  switch (s) {
    case MEMU_OK: return kExitOk;
    case MEMU_ERR_CONFIG: return kExitConfig;
    default: return kExitRuntime;
  }
}

int report(memu_status s) {
  if (s != MEMU_OK) std::cerr << "memu: error: " << memu_last_error() << '\n';
  return exit_code(s);
}

void print_line(const char* line, void*) { std::cout << line << '\n'; }

struct Experiment {
  memu_experiment* handle = nullptr;
  ~Experiment() { memu_experiment_destroy(handle); }
};

memu_status open_experiment(const CommonArgs& a, Experiment& e) {
  memu_status s = memu_experiment_load_file(a.config.c_str(), &e.handle);
  if (s != MEMU_OK) return s;
  std::vector<std::string> overrides = a.sets;
  if (!a.actuator.empty()) overrides.push_back("actuator.type=" + a.actuator);
  if (!a.task.empty()) overrides.push_back("task.type=" + a.task);
  if (!a.mode.empty()) overrides.push_back("actuator.mode=" + a.mode);
  for (const auto& o : overrides) {
    s = memu_experiment_override(e.handle, o.c_str());
    if (s != MEMU_OK) return s;
  }
  return memu_experiment_set_log(e.handle, print_line, nullptr);
}

const char* out_or_null(const CommonArgs& a) { return a.out.empty() ? nullptr : a.out.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Muscle actuator emulation benchmarks"};
  app.set_version_flag("--version", std::string(memu_version()));
  app.require_subcommand(1);

  CommonArgs a;
  std::vector<double> betas;
  std::vector<double> freqs;
  auto* simulate = app.add_subcommand("simulate", "run one episode and write its trace");
  auto* train = app.add_subcommand("train", "train policies (one per seed)");
  auto* sweep = app.add_subcommand("sweep-beta", "beta x controller-frequency stability map");
  auto* robust = app.add_subcommand("eval-robustness", "train and evaluate each actuator under perturbations");
  auto* curves = app.add_subcommand("export-curves", "dump FL/FV/FP samples");
  for (auto* cmd : {simulate, train, sweep, robust, curves}) add_common(cmd, a);
  sweep->add_option("--betas", betas, "beta grid")->delimiter(',');
  sweep->add_option("--freqs", freqs, "controller frequency grid [Hz]")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  Experiment e;
  if (const memu_status s = open_experiment(a, e); s != MEMU_OK) return report(s);

  memu_status s = MEMU_OK;
  if (simulate->parsed()) {
    s = memu_simulate(e.handle, out_or_null(a), a.seed);
  } else if (train->parsed()) {
    s = memu_train(e.handle, out_or_null(a), a.seed);
  } else if (robust->parsed()) {
    s = memu_eval_robustness(e.handle, out_or_null(a), a.seed);
  } else if (curves->parsed()) {
    s = memu_export_curves(e.handle, out_or_null(a));
  } else if (sweep->parsed()) {
    double beta = 0.0;
    s = memu_sweep_beta(e.handle, out_or_null(a), betas.data(), betas.size(), freqs.data(),
                        freqs.size(), &beta);
  }
  return report(s);
}
