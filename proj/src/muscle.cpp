#include "memu/muscle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "memu/error.hpp"

namespace memu {
namespace {

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("MuscleParams: ") + what);
}

}  // namespace

void MuscleParams::validate() const {
  for (double v : {l_min, l_max, fv_max, fp_max, lce_min, lce_max, f_max,
                   phi_min, phi_max, tau_act, beta}) {
    check(std::isfinite(v), "all fields must be finite");
  }
  check(l_min < 1.0 && 1.0 < l_max, "requires l_min < 1 < l_max");
  check(fv_max > 1.0, "requires fv_max > 1");
  check(fp_max >= 0.0, "requires fp_max >= 0");
  check(f_max > 0.0, "requires f_max > 0");
  check(tau_act > 0.0, "requires tau_act > 0");
  check(beta >= 0.0, "requires beta >= 0");
  check(lce_min < lce_max, "requires lce_min < lce_max");
  check(phi_min < phi_max, "requires phi_min < phi_max");
}

// Quadratic bump: rises from l_min to the peak at 1, falls back to zero at
// l_max, with inflection points halfway between the knots.
double fl_curve(double length, const MuscleParams& p) {
  require_finite(length, "fl_curve length");
  if (length <= p.l_min || length >= p.l_max) return 0.0;
  const double a = 0.5 * (p.l_min + 1.0);
  const double b = 0.5 * (1.0 + p.l_max);
  if (length <= a) {
    const double x = (length - p.l_min) / (a - p.l_min);
    return 0.5 * x * x;
  }
  if (length <= 1.0) {
    const double x = (1.0 - length) / (1.0 - a);
    return 1.0 - 0.5 * x * x;
  }
  if (length <= b) {
    const double x = (length - 1.0) / (b - 1.0);
    return 1.0 - 0.5 * x * x;
  }
  const double x = (p.l_max - length) / (p.l_max - b);
  return 0.5 * x * x;
}

// Negative v_bar is shortening. Slope at the origin is 2 from both sides.
double fv_curve(double v_bar, const MuscleParams& p) {
  require_finite(v_bar, "fv_curve velocity");
  const double y = p.fv_max - 1.0;
  if (v_bar <= -1.0) return 0.0;
  if (v_bar <= 0.0) return (v_bar + 1.0) * (v_bar + 1.0);
  if (v_bar <= y) return p.fv_max - (y - v_bar) * (y - v_bar) / y;
  return p.fv_max;
}

double fp_curve(double length, const MuscleParams& p) {
  require_finite(length, "fp_curve length");
  const double b = 0.5 * (1.0 + p.l_max);
  if (length <= 1.0) return 0.0;
  if (length <= b) {
    const double x = (length - 1.0) / (b - 1.0);
    return 0.25 * p.fp_max * x * x * x;
  }
  const double x = (length - b) / (b - 1.0);
  return 0.25 * p.fp_max * (1.0 + 3.0 * x);
}

double activation_step(double m, double excitation, double dt, double tau_act,
                       bool* clamped) {
  require_finite(m, "activation");
  require_finite(excitation, "excitation");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("activation_step: dt must be positive");
  if (!(tau_act > 0.0))
    throw std::invalid_argument("activation_step: tau_act must be positive");
  const double e = std::clamp(excitation, 0.0, 1.0);
  if (clamped && e != excitation) *clamped = true;
  const double next = e + (m - e) * std::exp(-dt / tau_act);
  return std::clamp(next, 0.0, 1.0);
}

MuscleGeometry derive_geometry(const MuscleParams& p) {
  if (!(p.phi_max != p.phi_min))
    throw std::invalid_argument("derive_geometry: degenerate joint range");
  MuscleGeometry g;
  g.a1 = (p.lce_max - p.lce_min) / (p.phi_max - p.phi_min);
  g.b1 = p.lce_min - g.a1 * p.phi_min;
  g.a2 = -g.a1;
  g.b2 = p.lce_min + g.a1 * p.phi_max;
  return g;
}

void update_kinematics(MuscleState& state, double q, double q_dot,
                       const MuscleParams& p, const MuscleGeometry& g) {
  require_finite(q, "joint position");
  require_finite(q_dot, "joint velocity");
  state.l = {g.length1(q), g.length2(q)};
  state.l_dot_bar = {p.beta * g.a1 * q_dot, p.beta * g.a2 * q_dot};
}

double muscle_force(const MuscleState& state, int k, const MuscleParams& p,
                    CurveMask mask) {
  const double fl = mask.pin_fl_to_one ? 1.0 : fl_curve(state.l[k], p);
  const double fp = mask.zero_passive ? 0.0 : fp_curve(state.l[k], p);
  return fl * fv_curve(state.l_dot_bar[k], p) * state.m_act[k] + fp;
}

double joint_torque(const MuscleState& state, double q, double q_dot,
                    const MuscleParams& p, const MuscleGeometry& g,
                    CurveMask mask) {
  for (double m : state.m_act) require_finite(m, "muscle activity");
  MuscleState s = state;
  update_kinematics(s, q, q_dot, p, g);
  const double pull1 = g.a1 > 0.0 ? -1.0 : 1.0;
  const double pull2 = g.a2 > 0.0 ? -1.0 : 1.0;
  return p.f_max * (pull1 * muscle_force(s, 0, p, mask) +
                    pull2 * muscle_force(s, 1, p, mask));
}

double beta_from_damping(double k_damp, double a1, double f_max) {
  if (!(a1 > 0.0)) throw std::invalid_argument("beta_from_damping: a1 must be > 0");
  if (!(f_max > 0.0))
    throw std::invalid_argument("beta_from_damping: f_max must be > 0");
  if (!(k_damp >= 0.0))
    throw std::invalid_argument("beta_from_damping: k_damp must be >= 0");
  return k_damp / (4.0 * a1 * f_max);
}

}  // namespace memu
