#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memu/muscle.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = MEMU_CLI_PATH;
const std::string kConfigs = MEMU_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("memu_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunResult run(const std::string& args, const fs::path& work) {
  const fs::path out = work / "stdout.txt";
  const fs::path err = work / "stderr.txt";
  const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string cfg(const std::string& name) { return "--config " + kConfigs + "/" + name; }

// All regular files of a directory except captured stdio, by name.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name != "stdout.txt" && name != "stderr.txt")
      files[name] = slurp(e.path());
  }
  return files;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

void expect_reproducible(const std::string& args, const std::string& tag) {
  const fs::path a = scratch(tag + "_a");
  const fs::path b = scratch(tag + "_b");
  const RunResult ra = run(args + " --out " + a.string(), a);
  ASSERT_EQ(ra.code, 0) << ra.err;
  const RunResult rb = run(args + " --out " + b.string(), b);
  ASSERT_EQ(rb.code, 0) << rb.err;
  const auto fa = snapshot(a);
  const auto fb = snapshot(b);
  ASSERT_TRUE(fa.count("manifest.json")) << tag;
  ASSERT_EQ(fa.size(), fb.size());
  for (const auto& [name, content] : fa) {
    ASSERT_TRUE(fb.count(name)) << name;
    EXPECT_EQ(content, fb.at(name)) << tag << ": " << name << " differs between runs";
  }
}

const std::string kFastTrain =
    " --set train.population=16 --set train.generations=3 --set train.hidden=8"
    " --set train.eval_episodes=2";

TEST(Cli, ExitCodes) {
  const fs::path w = scratch("codes");
  EXPECT_EQ(run("--version", w).code, 0);
  EXPECT_EQ(run("simulate", w).code, 2);
  EXPECT_EQ(run("frobnicate", w).code, 2);
  const RunResult missing = run("simulate " + cfg("hold_pd.ini") + " --actuator muscle", w);
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("[muscle] section"), std::string::npos) << missing.err;
  EXPECT_EQ(run("simulate --config " + (w / "nope.ini").string(), w).code, 2);
  EXPECT_EQ(run("simulate " + cfg("hold_pd.ini") + " --set task.horizon=-1", w).code, 2);
  const RunResult ok = run("simulate " + cfg("hold_pd.ini") + " --out " + w.string(), w);
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_TRUE(fs::exists(w / "trace.csv"));
  const RunResult bad_out = run("simulate " + cfg("hold_pd.ini") + " --out /proc/memu_nope", w);
  EXPECT_EQ(bad_out.code, 3);
  EXPECT_NE(bad_out.err.find("memu: error:"), std::string::npos);
}

TEST(Cli, SimulateIsReproducible) {
  expect_reproducible("simulate " + cfg("hold_muscle.ini") + " --seed 4", "sim");
  expect_reproducible("simulate " + cfg("hop_robustness.ini") + " --seed 2", "simhop");
}

TEST(Cli, ExportCurvesIsReproducible) {
  expect_reproducible("export-curves " + cfg("hold_muscle.ini"), "curves");
}

TEST(Cli, SweepIsReproducible) {
  expect_reproducible("sweep-beta " + cfg("beta_sweep.ini") + " --betas 0,0.36 --freqs 500,125",
                      "sweep");
}

TEST(Cli, TrainIsReproducible) {
  expect_reproducible("train " + cfg("train_hold.ini") + " --seed 3" + kFastTrain, "train");
}

TEST(Cli, RobustnessIsReproducible) {
  expect_reproducible("eval-robustness " + cfg("hop_robustness.ini") + " --seed 1" + kFastTrain +
                          " --set train.robustness_episodes=2",
                      "robust");
}

TEST(Cli, SingleCellSweep) {
  const fs::path w = scratch("cell");
  const RunResult r = run("sweep-beta " + cfg("beta_sweep.ini") + " --betas 0.36 --freqs 500 --out " +
                              w.string(),
                          w);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(w / "sweep.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"beta", "controller_hz", "amplitude", "stable"}));
  EXPECT_EQ(rows[1][0], "0.36");
  EXPECT_EQ(rows[1][1], "500");
  EXPECT_EQ(rows[1][3], "1");
  // The printed recommendation is the damping-rule value for the configured k_damp.
  const memu::MuscleParams p;
  const double a1 = memu::derive_geometry(p).a1;
  const double expected = memu::beta_from_damping(0.1, a1, p.f_max);
  const std::string key = "recommended beta for k_damp = 0.1: ";
  const auto pos = r.out.find(key);
  ASSERT_NE(pos, std::string::npos) << r.out;
  const double printed = std::stod(r.out.substr(pos + key.size()));
  EXPECT_NEAR(printed, expected, 1e-8 * expected);
  EXPECT_EQ(run("sweep-beta " + cfg("beta_sweep.ini") + " --freqs 0 --out " + w.string(), w).code, 2);
}

TEST(Cli, TrainFansOutOverSeeds) {
  const fs::path w = scratch("fanout");
  const RunResult r = run("train " + cfg("train_hold.ini") + kFastTrain + " --out " + w.string(), w);
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::vector<std::vector<std::string>>> curves;
  for (int s = 0; s < 10; ++s) {
    const fs::path f = w / ("learning_curve_seed" + std::to_string(s) + ".csv");
    ASSERT_TRUE(fs::exists(f)) << f;
    ASSERT_TRUE(fs::exists(w / ("policy_seed" + std::to_string(s) + ".json")));
    curves.push_back(read_csv(f));
  }
  const auto agg = read_csv(w / "learning_curve_aggregate.csv");
  ASSERT_EQ(agg.size(), 4u);
  for (std::size_t g = 1; g < agg.size(); ++g) {
    for (std::size_t col = 1; col < agg[g].size(); ++col) {
      double mean = 0.0;
      for (const auto& c : curves) mean += std::stod(c[g][col]) / curves.size();
      const double got = std::stod(agg[g][col]);
      EXPECT_NEAR(got, mean, 1e-7 * std::max(1.0, std::abs(mean)));
    }
  }
  const auto summary = read_csv(w / "train_summary.csv");
  EXPECT_EQ(summary.size(), 11u);
}

TEST(Cli, RobustnessRowsPerSeedAndActuator) {
  const fs::path w = scratch("rows");
  const RunResult r = run("eval-robustness " + cfg("hop_robustness.ini") + kFastTrain +
                              " --set train.seeds=0..1 --set train.robustness_episodes=2 --out " +
                              w.string(),
                          w);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_csv(w / "robustness.csv");
  ASSERT_EQ(rows.size(), 1u + 2 * 3);
  std::map<std::string, int> per_actuator;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    per_actuator[rows[i][1]]++;
    const double sr = std::stod(rows[i][2]);
    EXPECT_GE(sr, 0.0);
    EXPECT_LE(sr, 1.0);
  }
  EXPECT_EQ(per_actuator["pd"], 2);
  EXPECT_EQ(per_actuator["torque"], 2);
  EXPECT_EQ(per_actuator["muscle"], 2);
  const auto summary = read_csv(w / "robustness_summary.csv");
  ASSERT_EQ(summary.size(), 4u);
  for (std::size_t i = 1; i < summary.size(); ++i) {
    EXPECT_LE(std::stod(summary[i][3]), std::stod(summary[i][2]));
    EXPECT_GE(std::stod(summary[i][4]), std::stod(summary[i][2]));
  }
}

}  // namespace
