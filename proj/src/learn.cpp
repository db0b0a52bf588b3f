#include "memu/learn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "memu/csv.hpp"
#include "memu/error.hpp"
#include "memu/rng.hpp"

namespace memu {
namespace {

constexpr std::uint64_t kEvalStream = 0xe7a1;
constexpr std::uint64_t kSampleStream = 0xce;
constexpr std::uint64_t kGenerationStream = 0x6e0;
constexpr std::uint64_t kRobustStream = 0x70b;

}  // namespace

std::size_t TrainTask::input_dim() const {
  const bool muscle = actuator.kind == ActuatorKind::muscle;
  const std::size_t signal = task.kind == TaskKind::hop ? 0 : 1;
  return observation_channels(plant.kind(), muscle).size() + signal;
}

void TrainerConfig::validate() const {
  require(population >= 8, "train: population must be >= 8");
  require(elite_fraction > 0.0 && elite_fraction <= 1.0,
          "train: elite_fraction must lie in (0, 1]");
  require(elite_count() >= 1, "train: at least one elite required");
  require(generations >= 0, "train: generations must be >= 0");
  require(init_std > 0.0, "train: init_std must be > 0");
  require(extra_noise >= 0.0, "train: extra_noise must be >= 0");
  require(noise_decay > 0.0 && noise_decay <= 1.0, "train: noise_decay must lie in (0, 1]");
  require(episodes_per_eval >= 1 && eval_episodes >= 1, "train: episode counts must be >= 1");
}

int TrainerConfig::elite_count() const {
  return static_cast<int>(std::floor(population * elite_fraction + 1e-9));
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

EpisodeSpec build_episode(const TrainTask& task, std::uint64_t episode_seed) {
  RandomizedEpisode ep = randomize_episode(task.plant, task.task.q0, task.task.m_act0,
                                           task.noise, episode_seed, task.task.horizon);
  EpisodeSpec spec = make_episode(ep.plant, task.actuator, task.rates, task.task, task.reward);
  spec.initial = ep.initial;
  spec.initial.q_dot += task.task.kick;
  spec.m_act0 = ep.m_act0;
  spec.pushes = std::move(ep.pushes);
  spec.noise = task.noise;
  spec.latency = task.latency;
  spec.latency.seed = stream_seed(task.latency.seed, episode_seed);
  spec.seed = episode_seed;
  spec.record_rows = false;
  return spec;
}

Policy as_policy(const PolicySpec& spec) {
  return [spec](std::span<const double> obs, std::span<double> action) {
    spec.forward(obs, action);
  };
}

EvalSummary evaluate_policy(const TrainTask& task, const PolicySpec& policy,
                            std::uint64_t eval_seed, int episodes, int threads) {
  std::vector<double> returns(episodes);
  std::vector<double> lengths(episodes);
  parallel_for(episodes, threads, [&](std::size_t e) {
    const EpisodeSpec spec = build_episode(task, stream_seed(eval_seed, kEvalStream, e));
    const EpisodeTrace trace = run_episode(spec, as_policy(policy));
    returns[e] = trace.episode_return;
    lengths[e] = trace.physics_steps * spec.rates.physics_dt;
  });
  EvalSummary s;
  s.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / episodes;
  s.mean_episode_len = std::accumulate(lengths.begin(), lengths.end(), 0.0) / episodes;
  return s;
}

TrainResult train(const TrainTask& task, const TrainerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  PolicySpec policy(task.input_dim(), task.output_dim(), cfg.hidden);
  const std::size_t n = policy.param_count();
  std::vector<double> mean(n, 0.0);
  std::vector<double> stddev(n, cfg.init_std);

  TrainResult result;
  const std::uint64_t eval_seed = stream_seed(seed, kEvalStream);
  result.initial_return =
      evaluate_policy(task, policy, eval_seed, cfg.eval_episodes, cfg.threads).mean_return;

  Rng rng(stream_seed(seed, kSampleStream));
  const int pop = cfg.population;
  const int elites = cfg.elite_count();
  std::vector<std::vector<double>> candidates(pop, std::vector<double>(n));
  std::vector<double> returns(pop);
  std::vector<double> lengths(pop);
  double extra = cfg.extra_noise;

  for (int g = 0; g < cfg.generations; ++g) {
    for (auto& c : candidates)
      for (std::size_t i = 0; i < n; ++i) c[i] = mean[i] + stddev[i] * rng.normal();

    parallel_for(pop, cfg.threads, [&](std::size_t p) {
      PolicySpec candidate = policy;
      candidate.set_params(candidates[p]);
      double ret = 0.0;
      double len = 0.0;
      for (int e = 0; e < cfg.episodes_per_eval; ++e) {
        const EpisodeSpec spec =
            build_episode(task, stream_seed(seed, kGenerationStream + g, e));
        const EpisodeTrace trace = run_episode(spec, as_policy(candidate));
        ret += trace.episode_return;
        len += trace.physics_steps * spec.rates.physics_dt;
      }
      returns[p] = ret / cfg.episodes_per_eval;
      lengths[p] = len / cfg.episodes_per_eval;
    });

    for (int p = 0; p < pop; ++p) {
      if (!std::isfinite(returns[p]))
        throw Error("train: non-finite return in generation " + std::to_string(g) +
                    " candidate " + std::to_string(p) + " (seed " + std::to_string(seed) + ")");
    }

    GenerationStats stats;
    stats.generation = g;
    stats.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / pop;
    stats.max_return = *std::max_element(returns.begin(), returns.end());
    stats.mean_episode_len = std::accumulate(lengths.begin(), lengths.end(), 0.0) / pop;
    result.curve.push_back(stats);

    std::vector<int> order(pop);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return returns[a] > returns[b]; });
    for (std::size_t i = 0; i < n; ++i) {
      double m = 0.0;
      for (int k = 0; k < elites; ++k) m += candidates[order[k]][i];
      m /= elites;
      double var = 0.0;
      for (int k = 0; k < elites; ++k) {
        const double d = candidates[order[k]][i] - m;
        var += d * d;
      }
      var /= elites;
      mean[i] = m;
      stddev[i] = std::sqrt(var + extra);
    }
    extra *= cfg.noise_decay;
  }

  policy.set_params(mean);
  result.policy = policy;
  result.final_return =
      cfg.generations == 0
          ? result.initial_return
          : evaluate_policy(task, policy, eval_seed, cfg.eval_episodes, cfg.threads).mean_return;
  return result;
}

void write_learning_curve_csv(std::ostream& out, std::span<const GenerationStats> curve) {
  CsvWriter csv(out);
  csv.header({"generation", "mean_return", "max_return", "mean_episode_len"});
  for (const GenerationStats& s : curve) {
    csv.cell(static_cast<long long>(s.generation))
        .cell(s.mean_return)
        .cell(s.max_return)
        .cell(s.mean_episode_len);
    csv.end_row();
  }
}

PerturbationSuite PerturbationSuite::none() {
  PerturbationSuite s;
  s.push = {};
  s.push_scale = 0.0;
  s.mass_shift = {};
  s.init_joint_pos = {};
  return s;
}

RobustnessResult success_rate(const TrainTask& task, const Policy& policy,
                              const PerturbationSuite& suite, int n_episodes) {
  require(n_episodes >= 1, "success_rate: n_episodes must be >= 1");
  TrainTask perturbed = task;
  DomainRandomization& dr = perturbed.noise.dr;
  dr = DomainRandomization{};
  dr.init_joint_pos = suite.init_joint_pos;
  dr.init_muscle_act = {};
  dr.friction = {};
  dr.joint_damping = {};
  dr.push = {suite.push.lo * suite.push_scale, suite.push.hi * suite.push_scale};
  dr.mass_shift = suite.mass_shift;
  dr.push_interval = suite.push_interval;
  perturbed.noise.dr_enabled = true;

  const double horizon = task.task.horizon;
  const auto expected = static_cast<std::size_t>(
      std::ceil(horizon * task.rates.policy_hz - 1e-9));
  std::size_t ok = 0;
  double ret = 0.0;
  for (int e = 0; e < n_episodes; ++e) {
    const EpisodeSpec spec =
        build_episode(perturbed, stream_seed(suite.seed, kRobustStream, e));
    const EpisodeTrace trace = run_episode(spec, policy);
    ok += std::min(trace.ok_policy_steps, expected);
    ret += trace.episode_return;
  }
  RobustnessResult r;
  r.success_rate = static_cast<double>(ok) / (static_cast<double>(expected) * n_episodes);
  r.mean_return = ret / n_episodes;
  return r;
}

BootstrapCI bootstrap_mean_ci(std::span<const double> values, int resamples, double level,
                              std::uint64_t seed) {
  require(!values.empty(), "bootstrap: no values");
  require(resamples >= 1, "bootstrap: resamples must be >= 1");
  require(level > 0.0 && level < 1.0, "bootstrap: level must lie in (0, 1)");
  const std::size_t n = values.size();
  BootstrapCI ci;
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[rng.next() % n];
    means[r] = s / n;
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - level);
  auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * (resamples - 1) + 0.5));
    return means[std::min(idx, means.size() - 1)];
  };
  ci.lo = pick(alpha);
  ci.hi = pick(1.0 - alpha);
  return ci;
}

}  // namespace memu
