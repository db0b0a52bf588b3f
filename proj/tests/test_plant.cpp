#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "memu/plant.hpp"

namespace memu {
namespace {

// Fine-step RK4 reference for the undamped pendulum.
struct Rk4Pendulum {
  double inertia;
  double mgd;
  double q;
  double w;

  void step(double dt) {
    auto acc = [&](double x) { return -mgd * std::sin(x) / inertia; };
    const double k1q = w, k1w = acc(q);
    const double k2q = w + 0.5 * dt * k1w, k2w = acc(q + 0.5 * dt * k1q);
    const double k3q = w + 0.5 * dt * k2w, k3w = acc(q + 0.5 * dt * k2q);
    const double k4q = w + dt * k3w, k4w = acc(q + dt * k3q);
    q += dt / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
    w += dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
  }
  double energy() const { return 0.5 * inertia * w * w + mgd * (1.0 - std::cos(q)); }
};

PendulumPlant free_pendulum() {
  PendulumPlant p;
  p.inertia = 0.01;
  p.mgd = 0.2;
  p.phi_min = -10.0;
  p.phi_max = 10.0;
  return p;
}

TEST(Pendulum, EnergyDriftBelowHalfPercent) {
  const PendulumPlant p = free_pendulum();
  PlantState s;
  s.q = 1.0;
  const double e0 = pendulum_energy(p, s);
  Rk4Pendulum ref{p.inertia, p.mgd, 1.0, 0.0};
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    s = step_pendulum(p, s, 0.0, 1e-3);
    worst = std::max(worst, std::abs(pendulum_energy(p, s) - e0) / e0);
  }
  for (int i = 0; i < 1000000; ++i) ref.step(1e-4);
  EXPECT_NEAR(ref.energy(), e0, 1e-9 * e0);
  EXPECT_LE(worst, 0.005);
  EXPECT_LE(std::abs(pendulum_energy(p, s) - ref.energy()) / e0, 0.005);
  EXPECT_NEAR(s.t, 100.0, 1e-6);
}

TEST(Pendulum, ShortHorizonTracksReference) {
  const PendulumPlant p = free_pendulum();
  PlantState s;
  s.q = 0.3;
  Rk4Pendulum ref{p.inertia, p.mgd, 0.3, 0.0};
  for (int i = 0; i < 500; ++i) {
    s = step_pendulum(p, s, 0.0, 1e-3);
    for (int k = 0; k < 10; ++k) ref.step(1e-4);
  }
  EXPECT_NEAR(s.q, ref.q, 0.01);
}

TEST(Pendulum, HardStopsZeroVelocity) {
  PendulumPlant p;
  p.mgd = 0.0;
  PlantState s;
  s.q = p.phi_max - 0.001;
  s.q_dot = 5.0;
  s = step_pendulum(p, s, 0.0, 1e-3);
  EXPECT_EQ(s.q, p.phi_max);
  EXPECT_EQ(s.q_dot, 0.0);
  // Pushing further into the stop keeps it there; pulling back releases it.
  s = step_pendulum(p, s, 2.0, 1e-3);
  EXPECT_EQ(s.q, p.phi_max);
  s = step_pendulum(p, s, -2.0, 1e-3);
  EXPECT_LT(s.q, p.phi_max);
}

TEST(Pendulum, TorqueIsClamped) {
  PendulumPlant p;
  p.mgd = 0.0;
  const PlantState a = step_pendulum(p, {}, 100.0, 1e-3);
  const PlantState b = step_pendulum(p, {}, p.tau_abs_max, 1e-3);
  EXPECT_EQ(a.q_dot, b.q_dot);
}

TEST(Pendulum, DampingDissipates) {
  PendulumPlant p = free_pendulum();
  p.joint_damping = 0.01;
  PlantState s;
  s.q = 1.0;
  const double e0 = pendulum_energy(p, s);
  for (int i = 0; i < 5000; ++i) s = step_pendulum(p, s, 0.0, 1e-3);
  EXPECT_LT(pendulum_energy(p, s), 0.5 * e0);
}

TEST(Pendulum, RejectsBadStep) {
  const PendulumPlant p;
  EXPECT_THROW(step_pendulum(p, {}, 0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(step_pendulum(p, {}, 0.0, 0.05), std::invalid_argument);
  EXPECT_THROW(step_pendulum(p, {}, std::nan(""), 1e-3), std::invalid_argument);
  PendulumPlant bad;
  bad.inertia = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Pendulum, Deterministic) {
  const PendulumPlant p = free_pendulum();
  PlantState a, b;
  a.q = b.q = 0.7;
  for (int i = 0; i < 1000; ++i) {
    a = step_pendulum(p, a, 0.3 * std::sin(i * 0.01), 1e-3);
    b = step_pendulum(p, b, 0.3 * std::sin(i * 0.01), 1e-3);
  }
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.q_dot, b.q_dot);
}

TEST(Hopper, StandingStateTouchesGround) {
  const HopperPlant h;
  const PlantState s = hopper_standing_state(h, 0.0);
  EXPECT_TRUE(s.in_contact);
  EXPECT_NEAR(foot_clearance(h, s), 0.0, kContactTolerance);
  EXPECT_DOUBLE_EQ(s.z, h.rest_height());
}

TEST(Hopper, ApexMatchesBallisticHeight) {
  const HopperPlant h;
  const double dt = 1e-3;
  PlantState s = hopper_standing_state(h, 0.0);
  int guard = 0;
  while (s.in_contact && guard++ < 10000) s = step_hopper(h, s, h.tau_abs_max, dt);
  ASSERT_FALSE(s.in_contact);
  const double z_lift = s.z;
  const double v_lift = s.z_dot;
  ASSERT_GT(v_lift, 0.5);
  double apex = s.z;
  while (s.z_dot > 0.0) {
    s = step_hopper(h, s, h.tau_abs_max, dt);
    apex = std::max(apex, s.z);
  }
  const double expected = v_lift * v_lift / (2.0 * h.g);
  EXPECT_NEAR(apex - z_lift, expected, 0.01 * expected);
}

TEST(Hopper, LandsAndNeverPenetrates) {
  const HopperPlant h;
  PlantState s = hopper_standing_state(h, 0.0);
  bool left = false;
  bool landed = false;
  for (int i = 0; i < 3000; ++i) {
    const double tau = s.in_contact ? h.tau_abs_max : 0.0;
    s = step_hopper(h, s, tau, 1e-3);
    ASSERT_GE(foot_clearance(h, s), -kContactTolerance);
    ASSERT_GE(s.grf, 0.0);
    if (!s.in_contact) left = true;
    if (left && s.in_contact) landed = true;
  }
  EXPECT_TRUE(left);
  EXPECT_TRUE(landed);
}

TEST(Hopper, UnpoweredLegCollapsesToStop) {
  const HopperPlant h;
  PlantState s = hopper_standing_state(h, 0.0);
  for (int i = 0; i < 2000; ++i) s = step_hopper(h, s, 0.0, 1e-3);
  EXPECT_TRUE(s.in_contact);
  EXPECT_NEAR(s.q, h.phi_min, 1e-9);
  EXPECT_NEAR(s.z, h.ground_height + h.leg_length(h.phi_min), 1e-9);
  EXPECT_EQ(s.z_dot, 0.0);
}

TEST(Hopper, StanceForceBalancesWeight) {
  const HopperPlant h;
  const double hold = h.body_mass * h.g * h.r;
  PlantState s = hopper_standing_state(h, 0.0);
  for (int i = 0; i < 100; ++i) s = step_hopper(h, s, hold, 1e-3);
  EXPECT_TRUE(s.in_contact);
  EXPECT_NEAR(s.z, h.rest_height(), 1e-9);
  EXPECT_NEAR(s.grf, h.body_mass * h.g, 1e-6);
}

TEST(PlantWrapper, PushesAndInitialStates) {
  const Plant pend{PendulumPlant{}};
  PlantState s = pend.initial_state(0.2);
  EXPECT_EQ(s.q, 0.2);
  pend.apply_push(s, 0.5);
  EXPECT_EQ(s.q_dot, 0.5);
  const Plant hop{HopperPlant{}};
  PlantState hs = hop.initial_state(0.0);
  EXPECT_TRUE(hs.in_contact);
  hop.apply_push(hs, 1.0);
  EXPECT_EQ(hs.z_dot, 1.0);
  EXPECT_EQ(parse_plant_kind("hopper"), PlantKind::hopper);
  EXPECT_THROW(parse_plant_kind("quadruped"), std::invalid_argument);
}

}  // namespace
}  // namespace memu
