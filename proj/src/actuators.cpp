#include "memu/actuators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memu/error.hpp"

namespace memu {
namespace {

double clamp_torque(double tau, const TorqueLimits& limits) {
  return std::clamp(tau, -limits.tau_abs_max, limits.tau_abs_max);
}

}  // namespace

ActuatorKind parse_actuator_kind(std::string_view name) {
  if (name == "pd") return ActuatorKind::pd;
  if (name == "torque") return ActuatorKind::torque;
  if (name == "muscle") return ActuatorKind::muscle;
  throw std::invalid_argument("unknown actuator '" + std::string(name) +
                              "' (expected pd, torque or muscle)");
}

std::string_view to_string(ActuatorKind kind) {
  switch (kind) {
    case ActuatorKind::pd: return "pd";
    case ActuatorKind::torque: return "torque";
    case ActuatorKind::muscle: return "muscle";
  }
  return "?";
}

std::size_t action_dim(ActuatorKind kind) {
  return kind == ActuatorKind::muscle ? 2 : 1;
}

double pd_torque(double q_desired, double q, double q_dot, const PDGains& gains,
                 const TorqueLimits& limits) {
  require_finite(q_desired, "desired position");
  require_finite(q, "joint position");
  require_finite(q_dot, "joint velocity");
  return clamp_torque(gains.k_stiff * (q_desired - q) - gains.k_damp * q_dot, limits);
}

double direct_torque(double normalized_torque, const TorqueLimits& limits) {
  require_finite(normalized_torque, "normalized torque");
  return limits.k_scale * std::clamp(normalized_torque, -1.0, 1.0);
}

MuscleStepResult muscle_actuator_step(const ExcitationPair& cmd, double q,
                                      double q_dot, const MuscleState& state,
                                      const MuscleParams& p,
                                      const MuscleGeometry& g,
                                      const TorqueLimits& limits, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("muscle_actuator_step: dt must be > 0");
  MuscleStepResult out;
  out.state = state;
  for (int k = 0; k < 2; ++k) {
    out.state.m_act[k] =
        activation_step(state.m_act[k], cmd.e[k], dt, p.tau_act, &out.excitation_clamped);
  }
  update_kinematics(out.state, q, q_dot, p, g);
  const double tau = joint_torque(out.state, q, q_dot, p, g) - limits.k_damp_floor * q_dot;
  out.torque = clamp_torque(tau, limits);
  return out;
}

ActuatorCommand to_command(const ActuatorConfig& cfg, std::span<const double> action) {
  if (action.size() != action_dim(cfg.kind))
    throw std::invalid_argument("action has " + std::to_string(action.size()) +
                                " entries, controller '" +
                                std::string(to_string(cfg.kind)) + "' expects " +
                                std::to_string(action_dim(cfg.kind)));
  for (double a : action) require_finite(a, "policy action");
  switch (cfg.kind) {
    case ActuatorKind::pd:
      return DesiredPosition{std::clamp(cfg.pd_action_scale * action[0],
                                        cfg.muscle.phi_min, cfg.muscle.phi_max)};
    case ActuatorKind::torque:
      return NormalizedTorque{action[0]};
    case ActuatorKind::muscle:
      return ExcitationPair{{0.5 * (action[0] + 1.0), 0.5 * (action[1] + 1.0)}};
  }
  throw std::logic_error("unreachable");
}

Actuator::Actuator(ActuatorConfig cfg) : cfg_(std::move(cfg)) {
  require(cfg_.limits.tau_abs_max > 0.0, "tau_abs_max must be > 0");
  require(cfg_.limits.k_damp_floor >= 0.0, "k_damp_floor must be >= 0");
  require(cfg_.pd.k_stiff >= 0.0 && cfg_.pd.k_damp >= 0.0, "PD gains must be >= 0");
  if (cfg_.kind == ActuatorKind::torque)
    require(cfg_.limits.k_scale <= cfg_.limits.tau_abs_max,
            "k_scale must not exceed tau_abs_max");
  if (cfg_.kind == ActuatorKind::muscle) {
    cfg_.muscle.validate();
    geometry_ = derive_geometry(cfg_.muscle);
  }
}

void Actuator::reset(std::array<double, 2> m_act, double q, double q_dot) {
  muscle_ = MuscleState{};
  clamps_ = 0;
  if (cfg_.kind != ActuatorKind::muscle) return;
  for (int k = 0; k < 2; ++k) muscle_.m_act[k] = std::clamp(m_act[k], 0.0, 1.0);
  update_kinematics(muscle_, q, q_dot, cfg_.muscle, geometry_);
}

double Actuator::apply(const ActuatorCommand& cmd, double q, double q_dot, double dt) {
  const double floor = cfg_.limits.k_damp_floor * q_dot;
  switch (cfg_.kind) {
    case ActuatorKind::pd: {
      const auto* c = std::get_if<DesiredPosition>(&cmd);
      if (!c) throw std::invalid_argument("PD controller expects a desired position");
      const double tau = pd_torque(c->q, q, q_dot, cfg_.pd, cfg_.limits) - floor;
      return clamp_torque(tau, cfg_.limits);
    }
    case ActuatorKind::torque: {
      const auto* c = std::get_if<NormalizedTorque>(&cmd);
      if (!c) throw std::invalid_argument("torque controller expects a normalized torque");
      require_finite(q_dot, "joint velocity");
      return clamp_torque(direct_torque(c->tau, cfg_.limits) - floor, cfg_.limits);
    }
    case ActuatorKind::muscle: {
      const auto* c = std::get_if<ExcitationPair>(&cmd);
      if (!c) throw std::invalid_argument("muscle controller expects an excitation pair");
      if (dt > 0.0) {
        auto r = muscle_actuator_step(*c, q, q_dot, muscle_, cfg_.muscle, geometry_,
                                      cfg_.limits, dt);
        if (r.excitation_clamped) ++clamps_;
        muscle_ = r.state;
        return r.torque;
      }
      update_kinematics(muscle_, q, q_dot, cfg_.muscle, geometry_);
      const double tau = joint_torque(muscle_, q, q_dot, cfg_.muscle, geometry_) - floor;
      return clamp_torque(tau, cfg_.limits);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace memu
