#include "memu/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memu/error.hpp"

namespace memu {
namespace {

void check_dt(double dt) {
  if (!(dt > 0.0 && dt <= 0.01))
    throw std::invalid_argument("plant step: dt must lie in (0, 0.01]");
}

}  // namespace

void PendulumPlant::validate() const {
  require(inertia > 0.0, "pendulum: inertia must be > 0");
  require(phi_min < phi_max, "pendulum: phi_min must be < phi_max");
  require(tau_abs_max > 0.0, "pendulum: tau_abs_max must be > 0");
  require(joint_damping >= 0.0, "pendulum: joint_damping must be >= 0");
  require(link_mass > 0.0, "pendulum: link_mass must be > 0");
}

void HopperPlant::validate() const {
  require(body_mass > 0.0, "hopper: body_mass must be > 0");
  require(r != 0.0, "hopper: leg transmission r must be non-zero");
  require(leg_inertia > 0.0, "hopper: leg_inertia must be > 0");
  require(g > 0.0, "hopper: g must be > 0");
  require(phi_min < phi_max, "hopper: phi_min must be < phi_max");
  require(tau_abs_max > 0.0, "hopper: tau_abs_max must be > 0");
  require(joint_damping >= 0.0, "hopper: joint_damping must be >= 0");
  require(leg_length(phi_min) > 0.0 && leg_length(phi_max) > 0.0,
          "hopper: leg length must stay positive over the joint range");
}

PlantState step_pendulum(const PendulumPlant& plant, const PlantState& s, double tau,
                         double dt) {
  require_finite(tau, "pendulum torque");
  check_dt(dt);
  const double u = std::clamp(tau, -plant.tau_abs_max, plant.tau_abs_max);
  PlantState n = s;
  const double acc =
      (u - plant.mgd * std::sin(s.q) - plant.joint_damping * s.q_dot) / plant.inertia;
  n.q_dot = s.q_dot + dt * acc;
  n.q = s.q + dt * n.q_dot;
  if (n.q < plant.phi_min) {
    n.q = plant.phi_min;
    n.q_dot = 0.0;
  } else if (n.q > plant.phi_max) {
    n.q = plant.phi_max;
    n.q_dot = 0.0;
  }
  n.t = s.t + dt;
  return n;
}

double foot_clearance(const HopperPlant& plant, const PlantState& s) {
  return s.z - plant.leg_length(s.q) - plant.ground_height;
}

PlantState hopper_standing_state(const HopperPlant& plant, double q) {
  PlantState s;
  s.q = std::clamp(q, plant.phi_min, plant.phi_max);
  s.z = plant.ground_height + plant.leg_length(s.q);
  s.in_contact = true;
  return s;
}

// Stance: the foot is pinned and the joint is kinematically tied to the body,
// m z'' = F - m g with leg force F = (tau - c q_dot) / r. A negative leg force
// lifts the foot. Reaching the extension stop while rising also ends stance;
// reaching the collapse stop stops the body inelastically.
// Flight: ballistic body, joint driven by leg_inertia q'' = tau - c q_dot.
// Touchdown zeroes the foot velocity and re-ties the joint to the body.
PlantState step_hopper(const HopperPlant& plant, const PlantState& s, double tau,
                       double dt) {
  require_finite(tau, "hopper torque");
  check_dt(dt);
  const double u = std::clamp(tau, -plant.tau_abs_max, plant.tau_abs_max);
  PlantState n = s;
  n.t = s.t + dt;
  n.grf = 0.0;

  bool flight = !s.in_contact;
  if (s.in_contact) {
    const double force = (u - plant.joint_damping * s.q_dot) / plant.r;
    if (force < 0.0) {
      flight = true;
    } else {
      n.grf = force;
      const double acc = force / plant.body_mass - plant.g;
      n.z_dot = s.z_dot + dt * acc;
      n.z = s.z + dt * n.z_dot;
      const double q_fit = (n.z - plant.ground_height - plant.leg_rest_length) / plant.r;
      const double q_lo = std::min(plant.phi_min, plant.phi_max);
      const double q_hi = std::max(plant.phi_min, plant.phi_max);
      const double q_extend = plant.r > 0.0 ? plant.phi_max : plant.phi_min;
      if (q_fit < q_lo || q_fit > q_hi) {
        const double q_stop = q_fit < q_lo ? q_lo : q_hi;
        if (q_stop == q_extend) {
          // Fully extended while rising: the foot leaves the ground.
          n.q = q_extend;
          n.q_dot = 0.0;
          n.in_contact = false;
        } else {
          n.q = q_stop;
          n.q_dot = 0.0;
          n.z = plant.ground_height + plant.leg_length(q_stop);
          n.z_dot = 0.0;
          n.in_contact = true;
        }
      } else {
        n.q = q_fit;
        n.q_dot = n.z_dot / plant.r;
        n.in_contact = true;
      }
      return n;
    }
  }

  if (flight) {
    n.z_dot = s.z_dot - dt * plant.g;
    n.z = s.z + dt * n.z_dot;
    const double acc = (u - plant.joint_damping * s.q_dot) / plant.leg_inertia;
    n.q_dot = s.q_dot + dt * acc;
    n.q = s.q + dt * n.q_dot;
    if (n.q < plant.phi_min) {
      n.q = plant.phi_min;
      n.q_dot = 0.0;
    } else if (n.q > plant.phi_max) {
      n.q = plant.phi_max;
      n.q_dot = 0.0;
    }
    n.in_contact = false;
    if (foot_clearance(plant, n) <= kContactTolerance) {
      // Touchdown: compress the leg to fit, foot velocity vanishes.
      n.in_contact = true;
      const double q_fit = (n.z - plant.ground_height - plant.leg_rest_length) / plant.r;
      n.q = q_fit;
      n.q_dot = n.z_dot / plant.r;
      if (q_fit < plant.phi_min || q_fit > plant.phi_max) {
        n.q = std::clamp(q_fit, plant.phi_min, plant.phi_max);
        n.z = plant.ground_height + plant.leg_length(n.q);
        n.z_dot = 0.0;
        n.q_dot = 0.0;
      }
    }
  }
  return n;
}

double pendulum_energy(const PendulumPlant& plant, const PlantState& s) {
  return 0.5 * plant.inertia * s.q_dot * s.q_dot + plant.mgd * (1.0 - std::cos(s.q));
}

PlantKind parse_plant_kind(std::string_view name) {
  if (name == "pendulum") return PlantKind::pendulum;
  if (name == "hopper") return PlantKind::hopper;
  throw std::invalid_argument("unknown plant '" + std::string(name) +
                              "' (expected pendulum or hopper)");
}

std::string_view to_string(PlantKind kind) {
  return kind == PlantKind::pendulum ? "pendulum" : "hopper";
}

PlantKind Plant::kind() const {
  return std::holds_alternative<PendulumPlant>(model_) ? PlantKind::pendulum
                                                       : PlantKind::hopper;
}

PlantState Plant::step(const PlantState& s, double tau, double dt) const {
  if (const auto* p = pendulum()) return step_pendulum(*p, s, tau, dt);
  return step_hopper(*hopper(), s, tau, dt);
}

PlantState Plant::initial_state(double q0) const {
  if (const auto* p = pendulum()) {
    PlantState s;
    s.q = std::clamp(q0, p->phi_min, p->phi_max);
    return s;
  }
  return hopper_standing_state(*hopper(), q0);
}

double Plant::phi_min() const {
  return pendulum() ? pendulum()->phi_min : hopper()->phi_min;
}

double Plant::phi_max() const {
  return pendulum() ? pendulum()->phi_max : hopper()->phi_max;
}

void Plant::apply_push(PlantState& s, double dv) const {
  require_finite(dv, "push");
  if (pendulum()) {
    s.q_dot += dv;
    return;
  }
  s.z_dot += dv;
  if (s.in_contact) {
    if (dv > 0.0) {
      // An upward kick unloads the foot; the leg keeps its joint velocity.
      s.in_contact = false;
    } else {
      s.q_dot = s.z_dot / hopper()->r;
    }
  }
}

void Plant::validate() const {
  if (const auto* p = pendulum()) p->validate();
  else hopper()->validate();
}

}  // namespace memu
