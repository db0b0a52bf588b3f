#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

#include "memu/mailbox.hpp"
#include "memu/mrloop.hpp"

namespace memu {
namespace {

PendulumPlant flat_pendulum() {
  PendulumPlant p;
  p.mgd = 0.0;
  return p;
}

EpisodeSpec pd_spec(double horizon) {
  ActuatorConfig act;
  act.kind = ActuatorKind::pd;
  act.pd = {2.0, 0.05};
  act.limits.k_damp_floor = 0.08;
  TaskConfig task;
  task.horizon = horizon;
  task.q0 = 0.0;
  task.target = 0.5;
  task.fail_angle = 1e9;
  return make_episode(Plant(flat_pendulum()), act, RateConfig::hardware_faithful(), task,
                      RewardConfig{});
}

Policy constant_policy(double v) {
  return [v](std::span<const double>, std::span<double> a) { std::fill(a.begin(), a.end(), v); };
}

TEST(MultiRate, TenSecondTickCounts) {
  EpisodeSpec spec = pd_spec(10.0);
  const EpisodeTrace tr = run_episode(spec, constant_policy(0.3));
  EXPECT_NEAR(static_cast<double>(tr.policy_ticks), 500.0, 1.0);
  EXPECT_NEAR(static_cast<double>(tr.controller_ticks), 5000.0, 1.0);
  EXPECT_EQ(tr.physics_steps, 50000u);
  EXPECT_EQ(tr.rows.size(), 50000u);
  EXPECT_EQ(tr.termination, "horizon");
}

TEST(MultiRate, TorqueChangesOnlyAtControllerTicks) {
  EpisodeSpec spec = pd_spec(1.0);
  const EpisodeTrace tr = run_episode(spec, constant_policy(0.3));
  const double dt = spec.rates.physics_dt;
  std::set<long long> ticks;
  for (double t : tr.controller_tick_times) ticks.insert(std::llround(t / dt));
  std::size_t changes = 0;
  for (std::size_t i = 1; i < tr.rows.size(); ++i) {
    if (tr.rows[i].tau != tr.rows[i - 1].tau) {
      ++changes;
      const long long start = std::llround(tr.rows[i].t / dt) - 1;
      EXPECT_TRUE(ticks.count(start)) << "torque changed off-tick at step " << start;
    }
  }
  EXPECT_GT(changes, 100u);
}

TEST(MultiRate, ActionDelayShiftsTorque) {
  EpisodeSpec spec = pd_spec(0.05);
  spec.latency.action_delay = 0.001;
  const EpisodeTrace delayed = run_episode(spec, constant_policy(0.3));
  const double dt = spec.rates.physics_dt;
  for (const TraceRow& r : delayed.rows) {
    if (r.t - dt < 0.001 - 1e-12) {
      EXPECT_EQ(r.tau, 0.0);
    }
  }
  spec.latency.action_delay = 0.0;
  const EpisodeTrace direct = run_episode(spec, constant_policy(0.3));
  EXPECT_NE(direct.rows.front().tau, 0.0);
  EXPECT_EQ(delayed.rows[5].tau, direct.rows[0].tau);
}

TEST(MultiRate, EqualPolicyAndControllerRates) {
  EpisodeSpec spec = pd_spec(1.0);
  spec.rates.controller_hz = 50.0;
  const EpisodeTrace tr = run_episode(spec, constant_policy(0.3));
  EXPECT_EQ(tr.policy_ticks, tr.controller_ticks);
  spec.rates.controller_hz = 40.0;
  EXPECT_THROW(run_episode(spec, constant_policy(0.3)), std::invalid_argument);
  spec.rates.controller_hz = 1e5;
  EXPECT_THROW(run_episode(spec, constant_policy(0.3)), std::invalid_argument);
}

TEST(MultiRate, IdealSimRates) {
  const RateConfig r = RateConfig::ideal_sim();
  EXPECT_NO_THROW(r.validate(LoopMode::ideal_sim));
  RateConfig bad = r;
  bad.substeps_per_control = 5;
  EXPECT_THROW(bad.validate(LoopMode::ideal_sim), std::invalid_argument);
  EpisodeSpec spec = pd_spec(1.0);
  spec.rates = r;
  const EpisodeTrace tr = run_episode(spec, constant_policy(0.3));
  EXPECT_EQ(tr.policy_ticks, 50u);
  EXPECT_EQ(tr.controller_ticks, 200u);
}

TEST(MultiRate, PdAtEquilibriumIsConstant) {
  EpisodeSpec spec = pd_spec(2.0);
  spec.initial.q = 0.5;
  const EpisodeTrace tr = run_episode(spec, constant_policy(0.5 / spec.actuator.pd_action_scale));
  for (const TraceRow& r : tr.rows) {
    ASSERT_EQ(r.q, 0.5);
    ASSERT_EQ(r.tau, 0.0);
  }
}

TEST(MultiRate, JitterIsBoundedAndSeeded) {
  EpisodeSpec spec = pd_spec(1.0);
  spec.latency.jitter_std = 1e-4;
  spec.latency.seed = 7;
  const EpisodeTrace a = run_episode(spec, constant_policy(0.3));
  const EpisodeTrace b = run_episode(spec, constant_policy(0.3));
  ASSERT_EQ(a.controller_tick_times, b.controller_tick_times);
  ASSERT_EQ(a.rows.back().q, b.rows.back().q);
  const double period = 1.0 / spec.rates.controller_hz;
  const double slack = 2.0 * spec.latency.jitter_std + spec.rates.physics_dt + 1e-12;
  for (std::size_t k = 0; k < a.controller_tick_times.size(); ++k) {
    EXPECT_LE(std::abs(a.controller_tick_times[k] - static_cast<double>(k) * period), slack);
    if (k > 0) {
      EXPECT_GE(a.controller_tick_times[k], a.controller_tick_times[k - 1]);
    }
  }
  spec.latency.seed = 8;
  const EpisodeTrace c = run_episode(spec, constant_policy(0.3));
  EXPECT_NE(a.controller_tick_times, c.controller_tick_times);
}

TEST(MultiRate, Validation) {
  EpisodeSpec spec = pd_spec(1.0);
  spec.horizon = 0.0;
  EXPECT_THROW(run_episode(spec, constant_policy(0.0)), std::invalid_argument);
  spec.horizon = 1.0;
  EXPECT_THROW(run_episode(spec, Policy{}), std::invalid_argument);
  spec.latency.action_delay = -1.0;
  EXPECT_THROW(run_episode(spec, constant_policy(0.0)), std::invalid_argument);
}

TEST(MultiRate, NonFiniteActionIsAnError) {
  EpisodeSpec spec = pd_spec(0.1);
  EXPECT_THROW(run_episode(spec, constant_policy(std::nan(""))), std::runtime_error);
}

TEST(Stability, MetricCases) {
  EpisodeTrace tr;
  for (int i = 0; i < 1000; ++i) {
    TraceRow r;
    r.t = i * 0.001;
    r.q = 0.3;
    tr.rows.push_back(r);
  }
  EXPECT_EQ(stability_metric(tr, 0.5), 0.0);
  for (TraceRow& r : tr.rows) r.q = 0.1 * std::sin(2.0 * M_PI * 10.0 * r.t);
  EXPECT_NEAR(stability_metric(tr, 0.5), 0.2, 1e-3);
  EXPECT_THROW(stability_metric(tr, 5.0), std::invalid_argument);
  EXPECT_THROW(stability_metric(EpisodeTrace{}, 0.0), std::invalid_argument);
}

class SweepGrid : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cells_ = sweep_beta(HoldBenchmark{}, kBetas, kFreqs);
  }
  static double amp(std::size_t b, std::size_t f) { return cells_[b * kFreqs.size() + f].amplitude; }

  static constexpr std::array<double, 4> kBetas{0.0, 0.18, 0.36, 0.66};
  static constexpr std::array<double, 6> kFreqs{5000, 1000, 500, 250, 200, 125};
  static inline std::vector<StabilityCell> cells_;
};

TEST_F(SweepGrid, ShapeAndOrder) {
  ASSERT_EQ(cells_.size(), kBetas.size() * kFreqs.size());
  EXPECT_EQ(cells_[0].beta, 0.0);
  EXPECT_EQ(cells_[1].controller_hz, 1000.0);
  EXPECT_EQ(cells_.back().beta, 0.66);
}

TEST_F(SweepGrid, NoCoContractionTermIsStableEverywhere) {
  for (std::size_t f = 0; f < kFreqs.size(); ++f) EXPECT_LT(amp(0, f), 1e-3) << kFreqs[f];
}

TEST_F(SweepGrid, FastControllerIsStableForAllBeta) {
  for (std::size_t b = 0; b < kBetas.size(); ++b) EXPECT_LE(amp(b, 0), kOscillationThreshold);
}

TEST_F(SweepGrid, AmplitudeGrowsWithBetaAtLowRate) {
  const std::size_t f = kFreqs.size() - 1;
  for (std::size_t b = 1; b < kBetas.size(); ++b) EXPECT_GE(amp(b, f), amp(b - 1, f));
  EXPECT_GT(amp(3, f), kOscillationThreshold);
}

TEST_F(SweepGrid, AmplitudeGrowsAsControllerSlowsAboveNoiseFloor) {
  const double floor = 1e-3;
  for (std::size_t b = 0; b < kBetas.size(); ++b)
    for (std::size_t f = 1; f < kFreqs.size(); ++f)
      EXPECT_GE(amp(b, f) + floor, amp(b, f - 1)) << kBetas[b] << " @ " << kFreqs[f];
}

TEST(Sweep, RejectsEmptyGrid) {
  const std::vector<double> none;
  const std::vector<double> one{0.1};
  EXPECT_THROW(sweep_beta(HoldBenchmark{}, none, one), std::invalid_argument);
  EXPECT_THROW(sweep_beta(HoldBenchmark{}, one, none), std::invalid_argument);
}

struct Pair {
  long long a = 0;
  long long b = 0;
};

TEST(LatestValue, EmptyThenLatest) {
  LatestValue<int> box;
  int v = -1;
  EXPECT_FALSE(box.read(v));
  box.publish(1);
  box.publish(2);
  ASSERT_TRUE(box.read(v));
  EXPECT_EQ(v, 2);
  ASSERT_TRUE(box.read(v));
  EXPECT_EQ(v, 2);
  box.publish(3);
  ASSERT_TRUE(box.read(v));
  EXPECT_EQ(v, 3);
}

TEST(LatestValue, ConcurrentReadsAreConsistentAndMonotone) {
  LatestValue<Pair> box;
  constexpr long long kN = 200000;
  std::thread writer([&] {
    for (long long i = 1; i <= kN; ++i) box.publish({i, -i});
  });
  long long last = 0;
  Pair p;
  while (last < kN) {
    if (box.read(p)) {
      ASSERT_EQ(p.a, -p.b);
      ASSERT_GE(p.a, last);
      last = p.a;
    }
  }
  writer.join();
  EXPECT_EQ(last, kN);
}

TEST(RealtimeReplay, Smoke) {
  EpisodeSpec spec = pd_spec(0.2);
  const EpisodeTrace tr = run_realtime_replay(spec, constant_policy(0.3));
  EXPECT_GT(tr.controller_ticks, 0u);
  EXPECT_GT(tr.policy_ticks, 0u);
  ASSERT_FALSE(tr.rows.empty());
  for (const TraceRow& r : tr.rows) ASSERT_TRUE(std::isfinite(r.q));
  EXPECT_GT(tr.rows.back().q, 0.0);
}

}  // namespace
}  // namespace memu
