#include "reasoner/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reasoner/error.hpp"

namespace reasoner {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ShapeError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

bool is_finite(const Action& a) noexcept {
  return std::isfinite(a.delta[0]) && std::isfinite(a.delta[1]) && std::isfinite(a.delta[2]) &&
         std::isfinite(a.grip);
}

bool within_bounds(const Action& a, const ActionBounds& bounds) noexcept {
  if (!is_finite(a)) return false;
  for (double d : a.delta) {
    if (std::abs(d) > bounds.delta_limit) return false;
  }
  return a.grip >= 0.0 && a.grip <= 1.0;
}

Action clamp(const Action& a, const ActionBounds& bounds) noexcept {
  Action out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.delta[i] = std::clamp(a.delta[i], -bounds.delta_limit, bounds.delta_limit);
  }
  out.grip = std::clamp(a.grip, 0.0, 1.0);
  return out;
}

void clamp_flat(std::span<double> flat, const ActionBounds& bounds) noexcept {
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (i % kActionDim == kActionDim - 1) {
      flat[i] = std::clamp(flat[i], 0.0, 1.0);
    } else {
      flat[i] = std::clamp(flat[i], -bounds.delta_limit, bounds.delta_limit);
    }
  }
}

Action blend_actions(const Action& vla, const Action& reasoner, double alpha,
                     const ActionBounds& bounds) {
  check_alpha(alpha);
  Action out;
  for (std::size_t i = 0; i < 3; ++i) {
    out.delta[i] = alpha * vla.delta[i] + (1.0 - alpha) * reasoner.delta[i];
  }
  out.grip = alpha * vla.grip + (1.0 - alpha) * reasoner.grip;
  return clamp(out, bounds);
}

Vec blend_flat(std::span<const double> vla, std::span<const double> reasoner, double alpha,
               const ActionBounds& bounds) {
  check_alpha(alpha);
  check_same_size(vla.size(), reasoner.size());
  Vec out(vla.size());
  for (std::size_t i = 0; i < vla.size(); ++i) {
    out[i] = alpha * vla[i] + (1.0 - alpha) * reasoner[i];
  }
  clamp_flat(out, bounds);
  return out;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

Vec flatten(const Action& a) { return {a.delta[0], a.delta[1], a.delta[2], a.grip}; }

Action unflatten_action(std::span<const double> flat) {
  check_same_size(flat.size(), kActionDim);
  return Action{{flat[0], flat[1], flat[2]}, flat[3]};
}

Vec flatten_chunk(const ActionChunk& chunk) {
  if (chunk.empty()) throw ParameterError("cannot flatten an empty chunk");
  Vec out;
  out.reserve(chunk.size() * kActionDim);
  for (const auto& a : chunk) {
    out.insert(out.end(), {a.delta[0], a.delta[1], a.delta[2], a.grip});
  }
  return out;
}

ActionChunk unflatten_chunk(std::span<const double> flat, std::size_t chunk_len) {
  if (chunk_len == 0) throw ParameterError("chunk length must be positive");
  check_same_size(flat.size(), chunk_len * kActionDim);
  ActionChunk chunk;
  chunk.reserve(chunk_len);
  for (std::size_t i = 0; i < chunk_len; ++i) {
    chunk.push_back(unflatten_action(flat.subspan(i * kActionDim, kActionDim)));
  }
  return chunk;
}

void validate_chunk(const ActionChunk& chunk, std::size_t cap) {
  if (chunk.empty() || chunk.size() > cap) {
    throw ParameterError("chunk length " + std::to_string(chunk.size()) + " outside [1, " +
                         std::to_string(cap) + "]");
  }
}

}  // namespace reasoner
