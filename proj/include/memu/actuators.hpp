#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <variant>

#include "memu/muscle.hpp"

namespace memu {

enum class ActuatorKind { pd, torque, muscle };

ActuatorKind parse_actuator_kind(std::string_view name);
std::string_view to_string(ActuatorKind kind);

struct PDGains {
  double k_stiff = 2.0;  // N·m/rad
  double k_damp = 0.05;  // N·m·s/rad
};

struct TorqueLimits {
  double tau_abs_max = 2.7;   // N·m
  double k_scale = 2.7;       // policy-to-torque scale of the torque controller
  double k_damp_floor = 0.0;  // always-on joint damping, N·m·s/rad
};

struct DesiredPosition {
  double q = 0.0;
};
struct NormalizedTorque {
  double tau = 0.0;  // [-1, 1]
};
struct ExcitationPair {
  std::array<double, 2> e{0.0, 0.0};  // [0, 1]^2
};

/// One low-level command for one joint. The alternative must match the
/// controller it is sent to.
using ActuatorCommand = std::variant<DesiredPosition, NormalizedTorque, ExcitationPair>;

/// PD law with zero desired velocity, clamped to +-tau_abs_max.
double pd_torque(double q_desired, double q, double q_dot, const PDGains& gains,
                 const TorqueLimits& limits);

/// k_scale * clip(tau, -1, 1).
double direct_torque(double normalized_torque, const TorqueLimits& limits);

struct MuscleStepResult {
  double torque = 0.0;
  MuscleState state;
  bool excitation_clamped = false;
};

/// Advances the activations of the pair over `dt`, refreshes the muscle
/// kinematics and returns the muscle torque plus floor damping, clamped.
MuscleStepResult muscle_actuator_step(const ExcitationPair& cmd, double q,
                                      double q_dot, const MuscleState& state,
                                      const MuscleParams& p,
                                      const MuscleGeometry& g,
                                      const TorqueLimits& limits, double dt);

struct ActuatorConfig {
  ActuatorKind kind = ActuatorKind::pd;
  PDGains pd;
  TorqueLimits limits;
  MuscleParams muscle;
  /// Desired position [rad] per unit policy action for the PD controller.
  double pd_action_scale = 1.0;
};

/// Number of policy outputs per joint for a controller kind.
std::size_t action_dim(ActuatorKind kind);

/// Maps raw policy outputs onto the command of `cfg.kind`: PD targets are
/// scale * a clipped to the muscle joint range, torques pass through, and
/// excitations are (a + 1) / 2 so a zero-initialized policy co-contracts at 0.5.
ActuatorCommand to_command(const ActuatorConfig& cfg, std::span<const double> action);

/// Stateful wrapper that owns the muscle state of one joint. All other
/// controllers are stateless.
class Actuator {
 public:
  explicit Actuator(ActuatorConfig cfg);

  ActuatorKind kind() const { return cfg_.kind; }
  std::size_t action_dim() const { return memu::action_dim(cfg_.kind); }
  const ActuatorConfig& config() const { return cfg_; }
  const MuscleGeometry& geometry() const { return geometry_; }
  const MuscleState& muscle_state() const { return muscle_; }
  std::size_t excitation_clamps() const { return clamps_; }

  /// Sets activities (muscle only) and refreshes kinematics at (q, q_dot).
  void reset(std::array<double, 2> m_act, double q, double q_dot);

  /// Torque for `cmd` at joint state (q, q_dot). `dt` is the time elapsed
  /// since the previous call and only drives the activation dynamics; zero
  /// leaves the activities unchanged.
  double apply(const ActuatorCommand& cmd, double q, double q_dot, double dt);

 private:
  ActuatorConfig cfg_;
  MuscleGeometry geometry_;
  MuscleState muscle_;
  std::size_t clamps_ = 0;
};

}  // namespace memu
