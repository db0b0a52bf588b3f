#include "memu/domain.hpp"

#include <algorithm>
#include <cmath>

#include "memu/error.hpp"

namespace memu {
namespace {

double draw(Rng& rng, const Range& r) { return rng.uniform(r.lo, r.hi); }

}  // namespace

void NoiseAndDR::validate() const {
  const InputNoise& n = noise;
  for (const Range* r : {&n.base_lin_vel, &n.base_ang_vel, &n.gravity, &n.joint_pos,
                         &n.joint_vel, &n.muscle_length, &n.muscle_vel, &n.muscle_act,
                         &n.muscle_force, &dr.init_joint_pos, &dr.init_muscle_act,
                         &dr.friction, &dr.joint_damping, &dr.push, &dr.mass_shift}) {
    require(std::isfinite(r->lo) && std::isfinite(r->hi), "noise_dr: non-finite range");
    require(r->ordered(), "noise_dr: range bounds must satisfy lo <= hi");
  }
  require(dr.push_interval > 0.0, "noise_dr: push_interval must be > 0");
}

NoiseAndDR NoiseAndDR::zero() {
  NoiseAndDR z;
  z.noise = InputNoise{{}, {}, {}, {}, {}, {}, {}, {}, {}};
  z.dr = DomainRandomization{{}, {}, {}, {}, {}, {}, 1.0};
  return z;
}

std::vector<std::string> observation_channels(PlantKind plant, bool muscle) {
  std::vector<std::string> names{"joint_pos", "joint_vel"};
  if (plant == PlantKind::hopper) {
    names.insert(names.end(), {"base_height", "base_lin_vel", "contact", "gravity"});
  }
  if (muscle) {
    names.insert(names.end(), {"muscle_length_1", "muscle_length_2", "muscle_vel_1",
                               "muscle_vel_2", "muscle_act_1", "muscle_act_2",
                               "muscle_force_1", "muscle_force_2"});
  }
  return names;
}

std::vector<double> observe(const Plant& plant, const PlantState& state,
                            const MuscleState* muscle, const MuscleParams* params,
                            const NoiseAndDR& cfg, Rng& rng) {
  const bool noisy = cfg.noise_enabled;
  const InputNoise& n = cfg.noise;
  auto add = [&](std::vector<double>& out, double value, const Range& range) {
    out.push_back(noisy ? value + draw(rng, range) : value);
  };

  std::vector<double> obs;
  obs.reserve(14);
  add(obs, state.q, n.joint_pos);
  add(obs, state.q_dot, n.joint_vel);
  if (const HopperPlant* h = plant.hopper()) {
    obs.push_back(state.z - h->rest_height());
    add(obs, state.z_dot, n.base_lin_vel);
    obs.push_back(state.in_contact ? 1.0 : 0.0);
    add(obs, -1.0, n.gravity);
  }
  if (muscle) {
    require(params != nullptr, "observe: muscle channels need muscle parameters");
    for (int k = 0; k < 2; ++k) add(obs, muscle->l[k], n.muscle_length);
    for (int k = 0; k < 2; ++k) add(obs, muscle->l_dot_bar[k], n.muscle_vel);
    for (int k = 0; k < 2; ++k) add(obs, muscle->m_act[k], n.muscle_act);
    for (int k = 0; k < 2; ++k)
      add(obs, params->f_max * muscle_force(*muscle, k, *params), n.muscle_force);
  }
  return obs;
}

RandomizedEpisode randomize_episode(const Plant& base, double q0,
                                    std::array<double, 2> m_act0,
                                    const NoiseAndDR& cfg, std::uint64_t seed,
                                    double horizon) {
  RandomizedEpisode ep{base, base.initial_state(q0), m_act0, {}};
  if (!cfg.dr_enabled) return ep;
  cfg.validate();

  Rng rng(seed);
  const DomainRandomization& dr = cfg.dr;
  const double dq = draw(rng, dr.init_joint_pos);
  const double dm1 = draw(rng, dr.init_muscle_act);
  const double dm2 = draw(rng, dr.init_muscle_act);
  const double dfriction = draw(rng, dr.friction);
  const double ddamp = draw(rng, dr.joint_damping);
  const double dmass = draw(rng, dr.mass_shift);

  if (PendulumPlant* p = ep.plant.pendulum()) {
    const double mass = std::max(p->link_mass + dmass, 0.1 * p->link_mass);
    const double scale = mass / p->link_mass;
    p->inertia *= scale;
    p->mgd *= scale;
    p->link_mass = mass;
    p->friction += dfriction;
    p->joint_damping = std::max(0.0, p->joint_damping + ddamp);
  } else {
    HopperPlant* h = ep.plant.hopper();
    h->body_mass = std::max(h->body_mass + dmass, 0.1 * h->body_mass);
    h->friction += dfriction;
    h->joint_damping = std::max(0.0, h->joint_damping + ddamp);
  }
  ep.initial = ep.plant.initial_state(q0 + dq);
  ep.m_act0 = {std::clamp(m_act0[0] + dm1, 0.0, 1.0), std::clamp(m_act0[1] + dm2, 0.0, 1.0)};

  for (double t = dr.push_interval; t < horizon; t += dr.push_interval) {
    const double dv = draw(rng, dr.push);
    if (dv != 0.0) ep.pushes.push_back({t, dv});
  }
  return ep;
}

}  // namespace memu
