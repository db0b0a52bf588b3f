#include "memu/rewards.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "memu/error.hpp"

namespace memu {

void RewardConfig::validate() const {
  require(sigma > 0.0, "reward: sigma must be > 0");
  require(w_act >= 0.0, "reward: w_act must be >= 0");
  require(hop_clip_lo <= hop_clip_hi, "reward: hop clip bounds must be ordered");
  require(std::isfinite(v_target) && std::isfinite(hop_gain), "reward: non-finite constant");
}

double reward_track_log(double error, double sigma) { return -(error * error) / sigma; }

double reward_walk_log(double v_x, const RewardConfig& cfg) {
  return reward_track_log(cfg.v_target - v_x, cfg.sigma);
}

double reward_walk(double v_x, const RewardConfig& cfg) {
  return std::exp(reward_walk_log(v_x, cfg));
}

double reward_hop_log(double v_z, const RewardConfig& cfg) {
  return cfg.hop_gain * std::clamp(v_z, cfg.hop_clip_lo, cfg.hop_clip_hi);
}

double reward_hop(double v_z, const RewardConfig& cfg) {
  return std::exp(reward_hop_log(v_z, cfg));
}

double reward_action_rate(std::span<const double> a_prev,
                          std::span<const double> a_next, double w_act) {
  if (a_prev.size() != a_next.size())
    throw std::invalid_argument("reward_action_rate: action sizes differ (" +
                                std::to_string(a_prev.size()) + " vs " +
                                std::to_string(a_next.size()) + ")");
  double sum = 0.0;
  for (std::size_t i = 0; i < a_prev.size(); ++i) {
    const double d = a_next[i] - a_prev[i];
    sum += d * d;
  }
  return -w_act * sum;
}

void LogSumAccumulator::add_log(double log_value) {
  if (log_value == -std::numeric_limits<double>::infinity()) return;
  if (empty()) {
    log_sum_ = log_value;
    return;
  }
  const double hi = std::max(log_sum_, log_value);
  const double lo = std::min(log_sum_, log_value);
  log_sum_ = hi + std::log1p(std::exp(lo - hi));
}

}  // namespace memu
