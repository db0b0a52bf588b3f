#pragma once

#include <array>
#include <string_view>

#include "memu/plant.hpp"
#include "memu/rewards.hpp"

namespace memu {

/// hold: keep the joint at `target`. walk: track a target joint velocity (the
/// desk-scale stand-in for forward velocity). hop: maximize vertical velocity.
enum class TaskKind { hold, walk, hop };

TaskKind parse_task_kind(std::string_view name);
std::string_view to_string(TaskKind kind);

struct TaskConfig {
  TaskKind kind = TaskKind::hold;
  double horizon = 2.0;       // s
  double q0 = 0.0;            // nominal initial joint angle
  double kick = 0.0;          // initial joint velocity perturbation, rad/s
  std::array<double, 2> m_act0{0.0, 0.0};
  double target = 0.5;        // hold target angle, rad
  double fail_angle = 1.5;    // hold: failure when |q - target| exceeds this
  double settle_time = 2.0;   // stability window start, s
  double collapse_time = 0.5; // hop: failure after this long at the collapse stop
  double fall_height_fraction = 0.4;  // hop: failure below this share of rest height

  void validate() const;
};

/// Tracks failure conditions and evaluates the task reward of a state.
class TaskMonitor {
 public:
  TaskMonitor(const TaskConfig& task, const RewardConfig& reward, const Plant& plant);

  /// Natural log of the (strictly positive) task reward.
  double reward_log(const PlantState& s) const;
  /// Extra policy input appended after the observation (may be empty).
  std::size_t signal_size() const;
  double signal() const;
  /// Call once per physics step with the post-step state.
  void observe_step(const PlantState& s, double dt);
  bool failed() const { return failed_; }

 private:
  TaskConfig task_;
  RewardConfig reward_;
  const Plant* plant_;
  double at_stop_time_ = 0.0;
  bool failed_ = false;
};

}  // namespace memu
