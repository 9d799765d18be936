#include "reasoner/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "reasoner/error.hpp"
#include "reasoner/rng.hpp"

namespace reasoner {

namespace {

constexpr double kRestTol = 1e-9;
constexpr double kPenetrationTol = 1e-6;

double horizontal_distance(const Vec3& a, const Vec3& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

double distance3(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// Footprints overlap (strictly) or centers are horizontally within tolerance.
bool stacked_column(const ObjectState& a, const ObjectState& b, double tolerance) {
  const double reach = a.half_size + b.half_size - kPenetrationTol;
  const bool overlap =
      std::abs(a.pos[0] - b.pos[0]) < reach && std::abs(a.pos[1] - b.pos[1]) < reach;
  return overlap || horizontal_distance(a.pos, b.pos) <= tolerance;
}

double top_of(const ObjectState& o) { return o.pos[2] + o.half_size; }
double bottom_of(const ObjectState& o) { return o.pos[2] - o.half_size; }

Vec3 clamp_workspace(Vec3 p) {
  for (double& c : p) c = std::clamp(c, 0.0, 1.0);
  return p;
}

// Lowest gripper height that keeps the held object clear of the table and of
// every object in its column.
double held_floor(const Observation& obs, int held) {
  const auto& objects = obs.objects;
  const auto& h = objects[static_cast<std::size_t>(held)];
  double floor = h.half_size;
  for (std::size_t j = 0; j < objects.size(); ++j) {
    if (static_cast<int>(j) == held) continue;
    ObjectState probe = h;
    probe.pos = obs.gripper_pos;
    if (stacked_column(probe, objects[j], obs.task->tolerance)) {
      floor = std::max(floor, top_of(objects[j]) + h.half_size);
    }
  }
  return floor;
}

// An object is graspable when nothing rests on it.
bool has_load(const Observation& obs, std::size_t i) {
  const auto& base = obs.objects[i];
  for (std::size_t j = 0; j < obs.objects.size(); ++j) {
    if (j == i || (obs.held_object && *obs.held_object == static_cast<int>(j))) continue;
    const auto& other = obs.objects[j];
    if (stacked_column(other, base, obs.task->tolerance) &&
        std::abs(bottom_of(other) - top_of(base)) <= kPenetrationTol) {
      return true;
    }
  }
  return false;
}

void settle(Observation& obs, int index) {
  auto& o = obs.objects[static_cast<std::size_t>(index)];
  o.pos[2] = support_top(obs.objects, index, obs.task->tolerance) + o.half_size;
}

void advance_waypoints(Observation& obs) {
  const auto* circle = std::get_if<FollowCircleGoal>(&obs.task->goal);
  if (circle == nullptr || obs.waypoints_reached >= circle->n_waypoints) return;
  const Vec3 wp = circle_waypoint(*circle, obs.waypoints_reached);
  if (distance3(obs.gripper_pos, wp) <= obs.task->tolerance) ++obs.waypoints_reached;
}

void check_index(int idx, std::size_t n, const char* what) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
    throw ParameterError(std::string(what) + " index out of range");
  }
}

}  // namespace

std::string TaskSpec::kind_name() const {
  return std::visit(
      [](const auto& g) -> std::string {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, StackGoal>) return "stack";
        if constexpr (std::is_same_v<G, PickPlaceGoal>) return "pick_place";
        return "follow_circle";
      },
      goal);
}

void TaskSpec::validate() const {
  if (horizon < 1) throw ParameterError("horizon must be >= 1");
  if (!(tolerance > 0.0)) throw ParameterError("tolerance must be positive");
  if (!(grasp_radius > 0.0)) throw ParameterError("grasp radius must be positive");
  if (!(jitter >= 0.0)) throw ParameterError("jitter must be nonnegative");
  for (const auto& o : objects) {
    if (!(o.half_size > 0.0)) throw ParameterError("object half size must be positive");
  }
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, StackGoal>) {
          check_index(g.src, objects.size(), "stack source");
          check_index(g.dst, objects.size(), "stack target");
          if (g.src == g.dst) throw ParameterError("stack source and target coincide");
        } else if constexpr (std::is_same_v<G, PickPlaceGoal>) {
          check_index(g.src, objects.size(), "pick-place source");
          if (!(g.zone_radius > 0.0)) throw ParameterError("zone radius must be positive");
        } else {
          if (!(g.radius > 0.0)) throw ParameterError("circle radius must be positive");
          if (g.n_waypoints < 1) throw ParameterError("circle needs >= 1 waypoint");
        }
      },
      goal);
}

TaskSpec TaskSpec::stack() {
  TaskSpec t;
  t.goal = StackGoal{0, 1};
  t.objects = {ObjectState{{0.35, 0.5, 0.02}, 0.02}, ObjectState{{0.65, 0.5, 0.02}, 0.02}};
  return t;
}

TaskSpec TaskSpec::pick_place() {
  TaskSpec t;
  t.goal = PickPlaceGoal{0, {0.7, 0.5, 0.0}, 0.05};
  t.objects = {ObjectState{{0.35, 0.5, 0.02}, 0.02}};
  return t;
}

TaskSpec TaskSpec::follow_circle() {
  TaskSpec t;
  t.goal = FollowCircleGoal{};
  t.home = {0.5, 0.5, 0.15};
  return t;
}

bool Observation::same_state(const Observation& other) const {
  const bool tasks_equal = (task == other.task) || (task && other.task && *task == *other.task);
  return tasks_equal && gripper_pos == other.gripper_pos && grip_closed == other.grip_closed &&
         held_object == other.held_object && objects == other.objects &&
         waypoints_reached == other.waypoints_reached;
}

bool operator==(const Observation& a, const Observation& b) {
  return a.same_state(b) && a.step_index == b.step_index;
}

Vec3 circle_waypoint(const FollowCircleGoal& goal, int index) {
  const double angle = 2.0 * std::numbers::pi * index / goal.n_waypoints;
  return {goal.center[0] + goal.radius * std::cos(angle),
          goal.center[1] + goal.radius * std::sin(angle), goal.center[2]};
}

double support_top(const std::vector<ObjectState>& objects, int object, double tolerance) {
  const auto& o = objects[static_cast<std::size_t>(object)];
  double top = 0.0;
  for (std::size_t j = 0; j < objects.size(); ++j) {
    if (static_cast<int>(j) == object) continue;
    const auto& other = objects[j];
    if (!stacked_column(o, other, tolerance)) continue;
    if (top_of(other) <= bottom_of(o) + kPenetrationTol) top = std::max(top, top_of(other));
  }
  return top;
}

Observation reset(std::shared_ptr<const TaskSpec> task, std::uint64_t seed) {
  if (!task) throw ParameterError("reset requires a task");
  task->validate();
  Rng rng(mix_seed(seed, 0x7265736574ULL));
  Observation obs;
  obs.task = task;
  obs.gripper_pos = task->home;
  obs.objects = task->objects;
  for (auto& o : obs.objects) {
    o.pos[0] = std::clamp(o.pos[0] + rng.uniform(-task->jitter, task->jitter), 0.0, 1.0);
    o.pos[1] = std::clamp(o.pos[1] + rng.uniform(-task->jitter, task->jitter), 0.0, 1.0);
    o.pos[2] = o.half_size;
  }
  return obs;
}

Observation step(const Observation& obs, const Action& action, const ActionBounds& bounds) {
  if (!within_bounds(action, bounds)) throw ParameterError("action outside bounds");
  Observation next = obs;
  for (std::size_t i = 0; i < 3; ++i) next.gripper_pos[i] += action.delta[i];
  next.gripper_pos = clamp_workspace(next.gripper_pos);

  const bool closing = !obs.grip_closed && action.closes();
  const bool opening = obs.grip_closed && !action.closes();

  if (closing && !next.held_object) {
    std::optional<int> best;
    double best_dist = obs.task->grasp_radius;
    for (std::size_t i = 0; i < next.objects.size(); ++i) {
      const double d = distance3(next.objects[i].pos, next.gripper_pos);
      if (d <= best_dist && !has_load(next, i)) {
        if (!best || d < best_dist) {
          best = static_cast<int>(i);
          best_dist = d;
        }
      }
    }
    next.held_object = best;
  }

  if (next.held_object) {
    const int held = *next.held_object;
    next.gripper_pos[2] = std::min(1.0, std::max(next.gripper_pos[2], held_floor(next, held)));
    next.objects[static_cast<std::size_t>(held)].pos = next.gripper_pos;
  }

  if (opening && next.held_object) {
    const int released = *next.held_object;
    next.held_object.reset();
    settle(next, released);
  }

  next.grip_closed = action.closes();
  advance_waypoints(next);
  ++next.step_index;
  return next;
}

bool is_success(const Observation& obs) {
  const auto& task = *obs.task;
  return std::visit(
      [&](const auto& g) -> bool {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, FollowCircleGoal>) {
          return obs.waypoints_reached >= g.n_waypoints;
        } else {
          if (obs.grip_closed || obs.held_object) return false;
          const auto& src = obs.objects[static_cast<std::size_t>(g.src)];
          if constexpr (std::is_same_v<G, StackGoal>) {
            const auto& dst = obs.objects[static_cast<std::size_t>(g.dst)];
            return horizontal_distance(src.pos, dst.pos) <= task.tolerance &&
                   std::abs(src.pos[2] - (top_of(dst) + src.half_size)) <= kRestTol;
          } else {
            return horizontal_distance(src.pos, g.zone_center) <= g.zone_radius &&
                   std::abs(src.pos[2] - src.half_size) <= kRestTol;
          }
        }
      },
      task.goal);
}

Observation imperfect_step(const Observation& obs, const Action& action, double epsilon,
                           std::uint64_t model_seed, const ActionBounds& bounds) {
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
  Observation next = step(obs, action, bounds);
  if (epsilon == 0.0) return next;

  std::uint64_t key = mix_seed(model_seed, 0x776f726c64ULL);
  key = hash_doubles(key, obs.gripper_pos);
  key = hash_double(key, obs.grip_closed ? 1.0 : 0.0);
  key = hash_double(key, obs.held_object ? *obs.held_object : -1.0);
  for (const auto& o : obs.objects) key = hash_doubles(key, o.pos);
  key = hash_doubles(key, flatten(action));
  Rng rng(key);

  for (double& c : next.gripper_pos) c += rng.uniform(-epsilon, epsilon);
  next.gripper_pos = clamp_workspace(next.gripper_pos);

  std::vector<int> free_objects;
  for (std::size_t i = 0; i < next.objects.size(); ++i) {
    const Vec3 jitter{rng.uniform(-epsilon, epsilon), rng.uniform(-epsilon, epsilon), 0.0};
    if (next.held_object && *next.held_object == static_cast<int>(i)) continue;
    auto& p = next.objects[i].pos;
    p[0] = std::clamp(p[0] + jitter[0], 0.0, 1.0);
    p[1] = std::clamp(p[1] + jitter[1], 0.0, 1.0);
    free_objects.push_back(static_cast<int>(i));
  }
  // Re-project: held object follows the gripper, free objects resettle
  // bottom-up onto whatever now lies beneath them.
  if (next.held_object) {
    next.objects[static_cast<std::size_t>(*next.held_object)].pos = next.gripper_pos;
  }
  std::stable_sort(free_objects.begin(), free_objects.end(), [&](int a, int b) {
    return next.objects[static_cast<std::size_t>(a)].pos[2] <
           next.objects[static_cast<std::size_t>(b)].pos[2];
  });
  for (int i : free_objects) settle(next, i);
  return next;
}

std::size_t feature_length(const TaskSpec& task) { return 5 + 6 * task.objects.size() + 4; }

Vec render_features(const Observation& obs) {
  const auto& task = *obs.task;
  Vec f;
  f.reserve(feature_length(task));
  const auto& g = obs.gripper_pos;
  f.insert(f.end(), g.begin(), g.end());
  f.push_back(obs.grip_closed ? 1.0 : 0.0);
  f.push_back(obs.held_object ? 1.0 : 0.0);
  for (const auto& o : obs.objects) f.insert(f.end(), o.pos.begin(), o.pos.end());
  // Offsets enter as per-axis magnitudes so a linear reward can express
  // "closer is better" without knowing the sign of the approach direction.
  for (const auto& o : obs.objects) {
    for (std::size_t i = 0; i < 3; ++i) f.push_back(std::abs(o.pos[i] - g[i]));
  }
  std::visit(
      [&](const auto& goal) {
        using G = std::decay_t<decltype(goal)>;
        if constexpr (std::is_same_v<G, FollowCircleGoal>) {
          const int next = std::min(obs.waypoints_reached, goal.n_waypoints - 1);
          const Vec3 wp = circle_waypoint(goal, next);
          for (std::size_t i = 0; i < 3; ++i) f.push_back(std::abs(wp[i] - g[i]));
          f.push_back(static_cast<double>(obs.waypoints_reached) / goal.n_waypoints);
        } else {
          const auto& src = obs.objects[static_cast<std::size_t>(goal.src)];
          Vec3 target{};
          if constexpr (std::is_same_v<G, StackGoal>) {
            const auto& dst = obs.objects[static_cast<std::size_t>(goal.dst)];
            target = {dst.pos[0], dst.pos[1], top_of(dst) + src.half_size};
          } else {
            target = {goal.zone_center[0], goal.zone_center[1], src.half_size};
          }
          for (std::size_t i = 0; i < 3; ++i) f.push_back(std::abs(target[i] - src.pos[i]));
          f.push_back(bottom_of(src) - support_top(obs.objects, goal.src, task.tolerance));
        }
      },
      task.goal);
  return f;
}

std::string check_invariants(const Observation& obs) {
  std::ostringstream msg;
  auto inside = [](const Vec3& p) {
    return std::all_of(p.begin(), p.end(), [](double c) { return c >= 0.0 && c <= 1.0; });
  };
  if (!inside(obs.gripper_pos)) return "gripper outside workspace";
  for (std::size_t i = 0; i < obs.objects.size(); ++i) {
    const auto& o = obs.objects[i];
    if (!inside(o.pos)) {
      msg << "object " << i << " outside workspace";
      return msg.str();
    }
    const bool held = obs.held_object && *obs.held_object == static_cast<int>(i);
    if (held) {
      if (o.pos != obs.gripper_pos) {
        msg << "held object " << i << " detached from gripper";
        return msg.str();
      }
      continue;
    }
    const double expected = support_top(obs.objects, static_cast<int>(i), obs.task->tolerance);
    if (std::abs(bottom_of(o) - expected) > kPenetrationTol) {
      msg << "object " << i << " not resting on its support";
      return msg.str();
    }
  }
  for (std::size_t i = 0; i < obs.objects.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.objects.size(); ++j) {
      const auto& a = obs.objects[i];
      const auto& b = obs.objects[j];
      const double reach = a.half_size + b.half_size;
      const bool overlap = std::abs(a.pos[0] - b.pos[0]) < reach - kPenetrationTol &&
                           std::abs(a.pos[1] - b.pos[1]) < reach - kPenetrationTol;
      if (overlap && std::abs(a.pos[2] - b.pos[2]) < reach - kPenetrationTol) {
        msg << "objects " << i << " and " << j << " interpenetrate";
        return msg.str();
      }
    }
  }
  return {};
}

Observation WorldModel::transition(const Observation& obs, std::span<const double> flat) const {
  if (flat.empty() || flat.size() % kActionDim != 0) {
    throw ShapeError("flattened action length must be a positive multiple of 4");
  }
  Observation cur = obs;
  for (std::size_t i = 0; i < flat.size(); i += kActionDim) {
    cur = transition_one(cur, unflatten_action(flat.subspan(i, kActionDim)));
  }
  return cur;
}

Observation PerfectModel::transition_one(const Observation& obs, const Action& action) const {
  return step(obs, action, bounds_);
}

NoisyModel::NoisyModel(double epsilon, std::uint64_t model_seed, ActionBounds bounds)
    : epsilon_(epsilon), model_seed_(model_seed), bounds_(bounds) {
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
}

Observation NoisyModel::transition_one(const Observation& obs, const Action& action) const {
  return imperfect_step(obs, action, epsilon_, model_seed_, bounds_);
}

}  // namespace reasoner
