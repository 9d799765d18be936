#pragma once

#include <cstdint>

#include "reasoner/core.hpp"
#include "reasoner/rng.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

/// Waypoint thresholds of the scripted controller.
struct ExpertParams {
  double approach_height = 0.08;  // hover height above the source before descending
  double carry_height = 0.14;     // transport height of the gripper
  double coarse_tol = 0.03;       // beyond this horizontal offset, return to hover height
  double align_tol = 0.01;        // horizontal alignment needed before descending
  double grasp_tol = 0.01;        // distance to the source center that triggers closing
  double place_tol = 0.01;        // distance to the placement pose that triggers release
};

/// Stateless scripted controller: one clamped step toward the active waypoint.
Action expert_action(const Observation& obs, const ExpertParams& params = {},
                     const ActionBounds& bounds = {});

/// Current waypoint the expert steers toward.
Vec3 expert_waypoint(const Observation& obs, const ExpertParams& params = {});

struct DriftParams {
  double bias_rate = 0.004;  // eta
  double noise_std = 0.005;  // sigma
  std::uint64_t seed = 0;
};

/// Frozen action policy: either the scripted expert or the expert corrupted
/// by an accumulating random-walk bias plus white noise.
class Policy {
public:
  enum class Kind { expert, drift };

  static Policy expert(std::size_t chunk_len = 1, ExpertParams params = {},
                       ActionBounds bounds = {});
  static Policy drift(DriftParams drift, std::size_t chunk_len = 1, ExpertParams params = {},
                      ActionBounds bounds = {});

  /// Emits chunk_len actions. Drift policies advance their bias per action.
  ActionChunk propose(const Observation& obs);

  /// Zeroes the drift state and reseeds it from the episode seed.
  void reset(std::uint64_t episode_seed);

  Kind kind() const noexcept { return kind_; }
  std::size_t chunk_len() const noexcept { return chunk_len_; }
  const DriftParams& drift_params() const noexcept { return drift_; }
  const ExpertParams& expert_params() const noexcept { return params_; }
  const ActionBounds& bounds() const noexcept { return bounds_; }
  const Vec3& bias() const noexcept { return bias_; }

private:
  Policy(Kind kind, DriftParams drift, std::size_t chunk_len, ExpertParams params,
         ActionBounds bounds);

  Kind kind_;
  DriftParams drift_;
  std::size_t chunk_len_;
  ExpertParams params_;
  ActionBounds bounds_;
  Vec3 bias_{0.0, 0.0, 0.0};
  Rng rng_{0};
};

}  // namespace reasoner
