#include "memu/task.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "memu/error.hpp"

namespace memu {

TaskKind parse_task_kind(std::string_view name) {
  if (name == "hold") return TaskKind::hold;
  if (name == "walk") return TaskKind::walk;
  if (name == "hop") return TaskKind::hop;
  throw std::invalid_argument("unknown task '" + std::string(name) +
                              "' (expected hold, walk or hop)");
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::hold: return "hold";
    case TaskKind::walk: return "walk";
    case TaskKind::hop: return "hop";
  }
  return "?";
}

void TaskConfig::validate() const {
  require(horizon > 0.0, "task: horizon must be > 0");
  require(fail_angle > 0.0, "task: fail_angle must be > 0");
  require(settle_time >= 0.0, "task: settle_time must be >= 0");
  require(collapse_time > 0.0, "task: collapse_time must be > 0");
  require(std::isfinite(target) && std::isfinite(q0) && std::isfinite(kick),
          "task: non-finite constant");
}

TaskMonitor::TaskMonitor(const TaskConfig& task, const RewardConfig& reward,
                         const Plant& plant)
    : task_(task), reward_(reward), plant_(&plant) {
  if (task_.kind == TaskKind::hop && plant.kind() != PlantKind::hopper)
    throw std::invalid_argument("task 'hop' requires the hopper plant");
  if (task_.kind != TaskKind::hop && plant.kind() != PlantKind::pendulum)
    throw std::invalid_argument("task '" + std::string(to_string(task_.kind)) +
                                "' requires the pendulum plant");
}

double TaskMonitor::reward_log(const PlantState& s) const {
  switch (task_.kind) {
    case TaskKind::hold: return reward_track_log(task_.target - s.q, reward_.sigma);
    case TaskKind::walk: return reward_walk_log(s.q_dot, reward_);
    case TaskKind::hop: return reward_hop_log(s.z_dot, reward_);
  }
  return 0.0;
}

std::size_t TaskMonitor::signal_size() const { return task_.kind == TaskKind::hop ? 0 : 1; }

double TaskMonitor::signal() const {
  return task_.kind == TaskKind::hold ? task_.target : reward_.v_target;
}

void TaskMonitor::observe_step(const PlantState& s, double dt) {
  if (failed_) return;
  switch (task_.kind) {
    case TaskKind::hold:
      failed_ = std::abs(s.q - task_.target) > task_.fail_angle;
      break;
    case TaskKind::walk:
      break;
    case TaskKind::hop: {
      const HopperPlant& h = *plant_->hopper();
      const double collapsed = h.r > 0.0 ? h.phi_min : h.phi_max;
      if (s.in_contact && s.q == collapsed) at_stop_time_ += dt;
      else at_stop_time_ = 0.0;
      const double height = s.z - h.ground_height;
      failed_ = height < task_.fall_height_fraction * h.leg_rest_length ||
                at_stop_time_ > task_.collapse_time;
      break;
    }
  }
}

}  // namespace memu
