#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace memu {

struct RewardConfig {
  double v_target = 0.5;    // m/s (walk) or rad/s when tracking a joint
  double sigma = 0.25;      // tracking sensitivity
  double hop_gain = 10.0;
  double hop_clip_lo = 0.0;
  double hop_clip_hi = 10.0;
  double w_act = 0.004;     // action-rate weight

  void validate() const;
};

/// exp(-(v_target - v_x)^2 / sigma), in (0, 1].
double reward_walk(double v_x, const RewardConfig& cfg);
double reward_walk_log(double v_x, const RewardConfig& cfg);

/// Same kernel on a generic tracking error.
double reward_track_log(double error, double sigma);

/// exp(hop_gain * clip(v_z, lo, hi)) and its logarithm.
double reward_hop(double v_z, const RewardConfig& cfg);
double reward_hop_log(double v_z, const RewardConfig& cfg);

/// -w_act * sum((a_next - a_prev)^2). Throws on size mismatch.
double reward_action_rate(std::span<const double> a_prev,
                          std::span<const double> a_next, double w_act);

/// Running sum of positive rewards kept as a logarithm so that exp(100)-sized
/// terms never overflow.
class LogSumAccumulator {
 public:
  void add_log(double log_value);
  double log_sum() const { return log_sum_; }
  double value() const { return std::exp(log_sum_); }
  bool empty() const { return log_sum_ == -std::numeric_limits<double>::infinity(); }

 private:
  double log_sum_ = -std::numeric_limits<double>::infinity();
};

}  // namespace memu
