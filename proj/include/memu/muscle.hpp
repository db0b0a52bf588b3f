#pragma once

#include <array>

namespace memu {

/// Parametrization of one antagonistic muscle pair acting on a single joint.
/// Lengths are normalized by the optimal fiber length; f_max already folds in
/// the moment arm so that the resulting torque is in N·m.
struct MuscleParams {
  double l_min = 0.24;    // lower force-length knot
  double l_max = 1.53;    // upper force-length knot
  double fv_max = 1.38;   // force-velocity plateau (lengthening)
  double fp_max = 1.76;   // passive force scale
  double lce_min = 0.74;  // muscle length at one joint limit
  double lce_max = 0.94;  // muscle length at the other joint limit
  double f_max = 34.0;
  double phi_min = -3.14;
  double phi_max = 3.14;
  double tau_act = 0.01;  // activation time constant [s]
  double beta = 0.36;     // velocity scaling inside FV

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
};

/// Linear joint-to-muscle-length maps l_k = a_k q + b_k.
struct MuscleGeometry {
  double a1 = 0.0;
  double b1 = 0.0;
  double a2 = 0.0;
  double b2 = 0.0;

  double length1(double q) const { return a1 * q + b1; }
  double length2(double q) const { return a2 * q + b2; }
};

/// Per-muscle quantities of the pair. Activities always stay in [0, 1].
struct MuscleState {
  std::array<double, 2> m_act{0.0, 0.0};
  std::array<double, 2> l{1.0, 1.0};
  std::array<double, 2> l_dot_bar{0.0, 0.0};
};

/// Selectively replaces curve terms with their idealized values. Used by the
/// damping-rule analysis, where the force-length gain is taken as one and the
/// passive force as zero.
struct CurveMask {
  bool pin_fl_to_one = false;
  bool zero_passive = false;
};

// Gain curves. All three are C1 piecewise polynomials and reject non-finite
// input with std::invalid_argument.
double fl_curve(double length, const MuscleParams& p);
double fv_curve(double v_bar, const MuscleParams& p);
double fp_curve(double length, const MuscleParams& p);

/// Exact solution of the first-order activation low-pass over `dt`, holding
/// `excitation` constant. The excitation is clamped to [0, 1] first; when that
/// happens and `clamped` is non-null, *clamped is set to true.
double activation_step(double m, double excitation, double dt, double tau_act,
                       bool* clamped = nullptr);

/// Anchors muscle 1 to lce_min at phi_min and muscle 2 to lce_max at phi_min,
/// both traversing [lce_min, lce_max] linearly over the joint range.
MuscleGeometry derive_geometry(const MuscleParams& p);

/// Updates lengths and scaled velocities of `state` for the joint motion.
void update_kinematics(MuscleState& state, double q, double q_dot,
                       const MuscleParams& p, const MuscleGeometry& g);

/// Normalized (dimensionless) force of muscle k in `state`, i.e. the bracketed
/// term FL * FV * m_act + FP before multiplication with f_max.
double muscle_force(const MuscleState& state, int k, const MuscleParams& p,
                    CurveMask mask = {});

/// Net joint torque of the pair. Each muscle pulls in the direction that
/// shortens it, so the contribution of muscle k is -sign(a_k) f_max F_k.
/// With the derived geometry (a1 > 0) muscle 1 pulls toward -q and a pure
/// co-contraction behaves like a viscous damper with slope -4 f_max beta a1.
double joint_torque(const MuscleState& state, double q, double q_dot,
                    const MuscleParams& p, const MuscleGeometry& g,
                    CurveMask mask = {});

/// Velocity scaling that makes full co-contraction equivalent to the damping
/// controller tau = -k_damp q_dot around q_dot = 0.
double beta_from_damping(double k_damp, double a1, double f_max);

}  // namespace memu
