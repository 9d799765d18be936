#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reasoner/core.hpp"

namespace reasoner {

using Vec3 = std::array<double, 3>;

struct ObjectState {
  Vec3 pos{0.0, 0.0, 0.0};  // box center
  double half_size = 0.02;
  friend bool operator==(const ObjectState&, const ObjectState&) = default;
};

/// Place object `src` on top of object `dst`.
struct StackGoal {
  int src = 0;
  int dst = 1;
  friend bool operator==(const StackGoal&, const StackGoal&) = default;
};

/// Put object `src` on the table inside a horizontal disc.
struct PickPlaceGoal {
  int src = 0;
  Vec3 zone_center{0.7, 0.5, 0.0};
  double zone_radius = 0.05;
  friend bool operator==(const PickPlaceGoal&, const PickPlaceGoal&) = default;
};

/// Visit `n_waypoints` evenly spaced points on a horizontal circle, in order.
struct FollowCircleGoal {
  Vec3 center{0.5, 0.5, 0.15};
  double radius = 0.12;
  int n_waypoints = 8;
  friend bool operator==(const FollowCircleGoal&, const FollowCircleGoal&) = default;
};

using TaskGoal = std::variant<StackGoal, PickPlaceGoal, FollowCircleGoal>;

struct TaskSpec {
  TaskGoal goal = StackGoal{};
  int horizon = 80;
  double tolerance = 0.04;
  double grasp_radius = 0.03;
  double jitter = 0.03;
  Vec3 home{0.5, 0.5, 0.25};
  std::vector<ObjectState> objects;  // nominal layout, resting on the table

  std::string kind_name() const;
  /// Throws ParameterError when indices or radii are invalid.
  void validate() const;

  static TaskSpec stack();
  static TaskSpec pick_place();
  static TaskSpec follow_circle();

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Full simulated world state. Copies are cheap; the task is shared and
/// immutable.
struct Observation {
  Vec3 gripper_pos{0.5, 0.5, 0.25};
  bool grip_closed = false;
  std::optional<int> held_object;
  std::vector<ObjectState> objects;
  std::shared_ptr<const TaskSpec> task;
  int step_index = 0;
  int waypoints_reached = 0;  // FollowCircle progress

  /// Equal world state; the task is compared by value.
  bool same_state(const Observation& other) const;
};

bool operator==(const Observation& a, const Observation& b);

Observation reset(std::shared_ptr<const TaskSpec> task, std::uint64_t seed);

/// Deterministic transition. Throws ParameterError on out-of-bounds actions.
Observation step(const Observation& obs, const Action& action, const ActionBounds& bounds = {});

bool is_success(const Observation& obs);

/// `step` followed by a bounded pseudo-random perturbation of every gripper
/// and free-object coordinate, keyed by (obs, action, model_seed).
Observation imperfect_step(const Observation& obs, const Action& action, double epsilon,
                           std::uint64_t model_seed, const ActionBounds& bounds = {});

/// Hand-crafted state features consumed by the reward regressor.
Vec render_features(const Observation& obs);
std::size_t feature_length(const TaskSpec& task);

Vec3 circle_waypoint(const FollowCircleGoal& goal, int index);

/// Height of the surface directly below `object` (table = 0), ignoring the
/// object itself and anything it carries.
double support_top(const std::vector<ObjectState>& objects, int object, double tolerance);

/// Checks every structural Observation invariant; returns an empty string
/// when all hold, otherwise a description of the first violation.
std::string check_invariants(const Observation& obs);

/// Transition interface the search plans against.
class WorldModel {
public:
  virtual ~WorldModel() = default;
  /// Applies a flattened chunk (one or more kActionDim blocks) in order.
  Observation transition(const Observation& obs, std::span<const double> flat_action) const;

protected:
  virtual Observation transition_one(const Observation& obs, const Action& action) const = 0;
};

class PerfectModel final : public WorldModel {
public:
  explicit PerfectModel(ActionBounds bounds = {}) : bounds_(bounds) {}

protected:
  Observation transition_one(const Observation& obs, const Action& action) const override;

private:
  ActionBounds bounds_;
};

class NoisyModel final : public WorldModel {
public:
  NoisyModel(double epsilon, std::uint64_t model_seed, ActionBounds bounds = {});

protected:
  Observation transition_one(const Observation& obs, const Action& action) const override;

private:
  double epsilon_;
  std::uint64_t model_seed_;
  ActionBounds bounds_;
};

}  // namespace reasoner
