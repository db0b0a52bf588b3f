#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "memu/muscle.hpp"
#include "memu/plant.hpp"
#include "memu/rng.hpp"

namespace memu {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool ordered() const { return lo <= hi; }
};

/// Additive uniform observation noise per channel.
struct InputNoise {
  Range base_lin_vel{-0.02, 0.02};
  Range base_ang_vel{-0.05, 0.05};
  Range gravity{-0.05, 0.05};
  Range joint_pos{-0.01, 0.01};
  Range joint_vel{-0.075, 0.075};
  Range muscle_length{-0.01, 0.01};
  Range muscle_vel{-1.0, 1.0};
  Range muscle_act{-0.01, 0.01};
  Range muscle_force{-1.0, 1.0};
};

/// Per-episode randomization, drawn uniformly and added to the nominal value.
struct DomainRandomization {
  Range init_joint_pos{-1.0, 1.0};
  Range init_muscle_act{0.5, 1.0};
  Range friction{0.5, 1.25};
  Range joint_damping{0.0, 0.09};
  Range push{-1.5, 1.5};        // instantaneous velocity change
  Range mass_shift{-0.5, 1.2};  // kg
  double push_interval = 1.0;   // s between pushes
};

struct NoiseAndDR {
  InputNoise noise;
  DomainRandomization dr;
  bool noise_enabled = false;
  bool dr_enabled = false;
  std::uint64_t seed = 0;

  void validate() const;
  /// Every range collapsed to zero; randomization and noise become identity.
  static NoiseAndDR zero();
};

/// Channel names in observation order for a plant / controller combination.
std::vector<std::string> observation_channels(PlantKind plant, bool muscle);

/// Noisy observation vector. `muscle` is null unless the muscle controller is
/// active, in which case lengths, scaled velocities, activities and forces of
/// both muscles are appended.
std::vector<double> observe(const Plant& plant, const PlantState& state,
                            const MuscleState* muscle, const MuscleParams* params,
                            const NoiseAndDR& cfg, Rng& rng);

struct Push {
  double t = 0.0;
  double dv = 0.0;
};

struct RandomizedEpisode {
  Plant plant;
  PlantState initial;
  std::array<double, 2> m_act0{0.0, 0.0};
  std::vector<Push> pushes;
};

/// Applies the DR draws to a copy of `base`. `q0` and `m_act0` are the nominal
/// initial joint angle and activities. When `cfg.dr_enabled` is false the
/// nominal episode is returned unchanged.
RandomizedEpisode randomize_episode(const Plant& base, double q0,
                                    std::array<double, 2> m_act0,
                                    const NoiseAndDR& cfg, std::uint64_t seed,
                                    double horizon);

}  // namespace memu
