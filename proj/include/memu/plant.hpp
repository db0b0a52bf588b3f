#pragma once

#include <string_view>
#include <variant>

namespace memu {

/// Single revolute joint with gravity load and hard stops. Stands in for one
/// robot joint on a fixed stand.
struct PendulumPlant {
  double inertia = 0.005;       // kg·m²
  double mgd = 0.3;             // gravity torque coefficient, N·m
  double joint_damping = 0.0;   // N·m·s/rad
  double phi_min = -3.14;       // hard stops, rad
  double phi_max = 3.14;
  double tau_abs_max = 2.7;     // N·m
  double link_mass = 0.3;       // kg; mass shifts rescale inertia and mgd
  double friction = 0.0;        // recorded only, see README

  void validate() const;
};

/// Vertical monoped: a point-mass body on a massless-foot leg whose length is
/// driven by one joint, leg_length = leg_rest_length + r q.
struct HopperPlant {
  double body_mass = 2.0;        // kg
  double r = 0.06;               // leg transmission, m/rad
  double leg_rest_length = 0.25; // m
  double leg_inertia = 0.002;    // kg·m², joint inertia while airborne
  double g = 9.81;               // m/s²
  double ground_height = 0.0;    // m
  double phi_min = -1.2;         // leg joint stops, rad (phi_min = collapsed)
  double phi_max = 1.2;
  double tau_abs_max = 2.7;      // N·m
  double joint_damping = 0.0;    // N·m·s/rad
  double friction = 0.0;         // recorded only

  void validate() const;
  double leg_length(double q) const { return leg_rest_length + r * q; }
  double rest_height() const { return ground_height + leg_rest_length; }
};

struct PlantState {
  double q = 0.0;
  double q_dot = 0.0;
  double z = 0.0;       // body height (hopper)
  double z_dot = 0.0;
  bool in_contact = false;
  double grf = 0.0;     // ground reaction force during the last step, N
  double t = 0.0;
};

inline constexpr double kContactTolerance = 1e-9;

/// Semi-implicit Euler step. Torque is clamped to the motor limit.
PlantState step_pendulum(const PendulumPlant& plant, const PlantState& s, double tau,
                         double dt);

/// Hybrid stance/flight step; see README for the contact model.
PlantState step_hopper(const HopperPlant& plant, const PlantState& s, double tau,
                       double dt);

/// Foot height above ground (<= tolerance means touching).
double foot_clearance(const HopperPlant& plant, const PlantState& s);

/// Standing hopper at rest with joint angle q.
PlantState hopper_standing_state(const HopperPlant& plant, double q);

double pendulum_energy(const PendulumPlant& plant, const PlantState& s);

enum class PlantKind { pendulum, hopper };
PlantKind parse_plant_kind(std::string_view name);
std::string_view to_string(PlantKind kind);

/// Either plant behind one interface.
class Plant {
 public:
  Plant(PendulumPlant p) : model_(p) {}  // NOLINT(google-explicit-constructor)
  Plant(HopperPlant h) : model_(h) {}    // NOLINT(google-explicit-constructor)

  PlantKind kind() const;
  const PendulumPlant* pendulum() const { return std::get_if<PendulumPlant>(&model_); }
  const HopperPlant* hopper() const { return std::get_if<HopperPlant>(&model_); }
  PendulumPlant* pendulum() { return std::get_if<PendulumPlant>(&model_); }
  HopperPlant* hopper() { return std::get_if<HopperPlant>(&model_); }

  PlantState step(const PlantState& s, double tau, double dt) const;
  PlantState initial_state(double q0) const;
  /// Joint limits of the driven joint.
  double phi_min() const;
  double phi_max() const;
  /// Instantaneous velocity change: joint velocity for the pendulum, body
  /// vertical velocity for the hopper.
  void apply_push(PlantState& s, double dv) const;
  void validate() const;

 private:
  std::variant<PendulumPlant, HopperPlant> model_;
};

}  // namespace memu
