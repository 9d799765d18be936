#include "reasoner/policy.hpp"

#include <algorithm>
#include <cmath>

#include "reasoner/error.hpp"

namespace reasoner {

namespace {

double distance3(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

double horizontal(const Vec3& a, const Vec3& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Scales the offset uniformly so no component exceeds the per-step limit.
std::array<double, 3> toward(const Vec3& from, const Vec3& to, const ActionBounds& bounds) {
  std::array<double, 3> d{to[0] - from[0], to[1] - from[1], to[2] - from[2]};
  double m = 0.0;
  for (double c : d) m = std::max(m, std::abs(c));
  if (m > bounds.delta_limit) {
    const double s = bounds.delta_limit / m;
    for (double& c : d) c = std::clamp(c * s, -bounds.delta_limit, bounds.delta_limit);
  }
  return d;
}

struct Plan {
  Vec3 waypoint;
  double grip;  // command to emit
};

Plan plan(const Observation& obs, const ExpertParams& p) {
  const auto& task = *obs.task;
  const Vec3& g = obs.gripper_pos;
  if (const auto* circle = std::get_if<FollowCircleGoal>(&task.goal)) {
    const int next = std::min(obs.waypoints_reached, circle->n_waypoints - 1);
    return {circle_waypoint(*circle, next), 0.0};
  }

  int src = 0;
  Vec3 place{};
  if (const auto* stack = std::get_if<StackGoal>(&task.goal)) {
    src = stack->src;
    const auto& dst = obs.objects[static_cast<std::size_t>(stack->dst)];
    const double hs = obs.objects[static_cast<std::size_t>(src)].half_size;
    place = {dst.pos[0], dst.pos[1], dst.pos[2] + dst.half_size + hs};
  } else {
    const auto& pp = std::get<PickPlaceGoal>(task.goal);
    src = pp.src;
    const double hs = obs.objects[static_cast<std::size_t>(src)].half_size;
    place = {pp.zone_center[0], pp.zone_center[1], hs};
  }
  const auto& s = obs.objects[static_cast<std::size_t>(src)].pos;

  if (obs.held_object && *obs.held_object == src) {
    const double off = horizontal(g, place);
    if (off > p.coarse_tol) return {{place[0], place[1], std::max(p.carry_height, place[2])}, 1.0};
    if (off > p.align_tol) return {{place[0], place[1], std::max(g[2], place[2])}, 1.0};
    if (distance3(g, place) <= p.place_tol) return {place, 0.0};
    return {place, 1.0};
  }
  if (obs.grip_closed) return {g, 0.0};  // holding nothing useful: open first
  const double off = horizontal(g, s);
  if (off > p.coarse_tol) return {{s[0], s[1], s[2] + p.approach_height}, 0.0};
  if (off > p.align_tol) return {{s[0], s[1], std::max(g[2], s[2])}, 0.0};
  if (distance3(g, s) <= p.grasp_tol) return {s, 1.0};
  return {s, 0.0};
}

Vec3 unit_direction(Rng& rng) {
  for (;;) {
    Vec3 u{rng.normal(), rng.normal(), rng.normal()};
    const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    if (n > 1e-12) {
      for (double& c : u) c /= n;
      return u;
    }
  }
}

}  // namespace

Vec3 expert_waypoint(const Observation& obs, const ExpertParams& params) {
  return plan(obs, params).waypoint;
}

Action expert_action(const Observation& obs, const ExpertParams& params,
                     const ActionBounds& bounds) {
  const Plan pl = plan(obs, params);
  return Action{toward(obs.gripper_pos, pl.waypoint, bounds), pl.grip};
}

Policy::Policy(Kind kind, DriftParams drift, std::size_t chunk_len, ExpertParams params,
               ActionBounds bounds)
    : kind_(kind), drift_(drift), chunk_len_(chunk_len), params_(params), bounds_(bounds) {
  if (chunk_len_ < 1 || chunk_len_ > kMaxChunkLen) {
    throw ParameterError("chunk_len must lie in [1, 8]");
  }
  if (!(drift_.bias_rate >= 0.0) || !(drift_.noise_std >= 0.0)) {
    throw ParameterError("drift rates must be nonnegative");
  }
  reset(0);
}

Policy Policy::expert(std::size_t chunk_len, ExpertParams params, ActionBounds bounds) {
  return Policy(Kind::expert, DriftParams{0.0, 0.0, 0}, chunk_len, params, bounds);
}

Policy Policy::drift(DriftParams drift, std::size_t chunk_len, ExpertParams params,
                     ActionBounds bounds) {
  return Policy(Kind::drift, drift, chunk_len, params, bounds);
}

void Policy::reset(std::uint64_t episode_seed) {
  bias_ = {0.0, 0.0, 0.0};
  rng_ = Rng(mix_seed(episode_seed, mix_seed(drift_.seed, 0x647269667400ULL)));
}

ActionChunk Policy::propose(const Observation& obs) {
  ActionChunk chunk;
  chunk.reserve(chunk_len_);
  Observation imagined = obs;
  for (std::size_t i = 0; i < chunk_len_; ++i) {
    const Action planned = expert_action(imagined, params_, bounds_);
    Action emitted = planned;
    if (kind_ == Kind::drift) {
      for (std::size_t j = 0; j < 3; ++j) {
        emitted.delta[j] += bias_[j] + drift_.noise_std * rng_.normal();
      }
      const Vec3 u = unit_direction(rng_);
      for (std::size_t j = 0; j < 3; ++j) bias_[j] += drift_.bias_rate * u[j];
      emitted = clamp(emitted, bounds_);
    }
    chunk.push_back(emitted);
    // Later chunk entries are planned open loop from the expert's own
    // prediction of where its nominal actions lead.
    if (i + 1 < chunk_len_) imagined = step(imagined, planned, bounds_);
  }
  return chunk;
}

}  // namespace reasoner
