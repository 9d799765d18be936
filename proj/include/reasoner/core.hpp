#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace reasoner {

/// Components per action: three position deltas and one gripper channel.
inline constexpr std::size_t kActionDim = 4;
inline constexpr std::size_t kMaxChunkLen = 8;

/// Flattened action or action chunk.
using Vec = std::vector<double>;

struct ActionBounds {
  double delta_limit = 0.05;  // per-axis, per step
};

/// One control step: gripper displacement plus gripper command in [0,1]
/// (>= 0.5 closes).
struct Action {
  std::array<double, 3> delta{0.0, 0.0, 0.0};
  double grip = 0.0;

  bool closes() const noexcept { return grip >= 0.5; }
  friend bool operator==(const Action&, const Action&) = default;
};

/// Ordered sequence of 1..kMaxChunkLen actions emitted by one policy query.
using ActionChunk = std::vector<Action>;

bool is_finite(const Action& a) noexcept;
bool within_bounds(const Action& a, const ActionBounds& bounds) noexcept;

Action clamp(const Action& a, const ActionBounds& bounds) noexcept;

/// Clamps every kActionDim-block of a flattened chunk in place.
void clamp_flat(std::span<double> flat, const ActionBounds& bounds) noexcept;

/// alpha * vla + (1 - alpha) * reasoner, componentwise, then clamped.
Action blend_actions(const Action& vla, const Action& reasoner, double alpha,
                     const ActionBounds& bounds = {});

/// Same rule on flattened vectors of equal length (multiple of kActionDim).
Vec blend_flat(std::span<const double> vla, std::span<const double> reasoner, double alpha,
               const ActionBounds& bounds = {});

double euclidean_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

Vec flatten(const Action& a);
Action unflatten_action(std::span<const double> flat);

/// Concatenates the chunk in time order; result has kActionDim * size entries.
Vec flatten_chunk(const ActionChunk& chunk);
ActionChunk unflatten_chunk(std::span<const double> flat, std::size_t chunk_len);

void validate_chunk(const ActionChunk& chunk, std::size_t cap = kMaxChunkLen);

}  // namespace reasoner
