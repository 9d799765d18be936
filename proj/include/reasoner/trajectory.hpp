#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reasoner/core.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

struct Frame {
  Observation obs;
  Action action;
};

/// One recorded episode: the observation seen at each step and the action
/// executed from it.
struct Trajectory {
  std::string task_id;
  std::uint64_t seed = 0;
  bool success = false;
  std::vector<Frame> frames;
};

struct EpisodeResult {
  std::string task_id;
  std::uint64_t seed = 0;
  bool success = false;
  int steps_taken = 0;
  double final_reward = 0.0;
  double wall_time = 0.0;  // seconds; excluded from serialized reports
  std::string error;       // nonempty when a component error aborted the episode

  friend bool operator==(const EpisodeResult& a, const EpisodeResult& b) {
    return a.task_id == b.task_id && a.seed == b.seed && a.success == b.success &&
           a.steps_taken == b.steps_taken && a.final_reward == b.final_reward &&
           a.error == b.error;
  }
};

}  // namespace reasoner
