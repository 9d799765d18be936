#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reasoner/policy.hpp"
#include "reasoner/prior.hpp"
#include "reasoner/reward.hpp"
#include "reasoner/search.hpp"
#include "reasoner/trajectory.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

struct PolicyConfig {
  bool drift = true;  // false: unmodified expert
  DriftParams drift_params{};
  std::size_t chunk_len = 1;
  ExpertParams expert{};

  Policy make() const;
};

struct DataConfig {
  std::size_t n_demos = 50;
  std::size_t downsample_stride = 4;
  double ridge_lambda = 1e-4;
  BandwidthRule bandwidth = BandwidthRule::scott();
  // Optional artifact paths; models are rebuilt in memory when empty.
  std::string demos_path;
  std::string prior_path;
  std::string reward_path;
};

struct RunConfig {
  TaskSpec task = TaskSpec::stack();
  PolicyConfig policy{};
  SearchConfig search{};
  DataConfig data{};
  std::size_t n_episodes = 200;
  std::uint64_t base_seed = 0;
  std::vector<double> alphas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<double> epsilons{0.0, 0.005, 0.01, 0.02, 0.05};
  int threads = 0;  // 0: REASONER_THREADS or hardware concurrency

  void validate() const;
};

struct DemoSet {
  std::vector<Trajectory> kept;
  std::vector<Trajectory> failures;
  std::size_t attempted = 0;
};

/// Runs the unmodified expert on n seeded episodes and splits them by outcome.
/// Throws DataError when no episode succeeds.
DemoSet generate_demos(const std::shared_ptr<const TaskSpec>& task, std::size_t n,
                       std::uint64_t seed, const PolicyConfig& policy = {});

/// Prior support points: single actions, or sliding windows of chunk_len
/// consecutive actions flattened.
std::vector<Vec> demo_actions(const std::vector<Trajectory>& demos, std::size_t chunk_len);

/// Progress-labeled, downsampled frames of every demonstration.
std::vector<LabeledFrame> demo_labels(const std::vector<Trajectory>& demos, std::size_t stride);

struct Models {
  KdePrior prior;
  RewardModel reward;
  std::vector<LabeledFrame> bank;
  bool bandwidth_fallback = false;
  bool ridge_fallback = false;
};

Models fit_models(const RunConfig& config, const std::vector<Trajectory>& demos);

/// Loads models from the configured paths, generating and fitting whatever
/// is missing.
Models prepare_models(const RunConfig& config);

enum class RewardSource { regressor, nearest_frame };

/// One evaluation arm. Without a reasoner the raw policy is executed.
struct Arm {
  std::string name;
  bool use_reasoner = false;
  SearchConfig search{};
  RewardSource reward = RewardSource::regressor;
};

struct EpisodeOptions {
  bool record = false;  // keep the executed trajectory
};

struct EpisodeRun {
  EpisodeResult result;
  std::optional<Trajectory> trajectory;
};

EpisodeRun run_episode(const RunConfig& config, const Models& models, const Arm& arm,
                       std::uint64_t episode_seed, EpisodeOptions options = {});

struct BenchReport {
  std::string arm;
  double alpha = 1.0;
  double epsilon = 0.0;
  std::string sampling = "kde";
  std::string reward = "regressor";
  std::vector<EpisodeResult> episodes;  // sorted by episode index
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double wall_time = 0.0;  // not serialized
};

struct ExperimentReport {
  std::string experiment;
  RunConfig config;
  std::vector<BenchReport> arms;

  const BenchReport& arm(const std::string& name) const;
};

/// Seed of the i-th evaluation episode; identical across arms.
std::uint64_t episode_seed(const RunConfig& config, std::size_t index);

int resolve_threads(int requested);

BenchReport run_arm(const RunConfig& config, const Models& models, const Arm& arm);

Arm baseline_arm();
Arm reasoner_arm(const SearchConfig& search, std::string name = "reasoner");

/// Paired baseline vs reasoner over the same seeds.
ExperimentReport run_benchmark(const RunConfig& config, const Models& models);
ExperimentReport sweep_alpha(const RunConfig& config, const Models& models,
                             const std::vector<double>& alphas);
ExperimentReport ablate_sampling(const RunConfig& config, const Models& models);
ExperimentReport ablate_reward(const RunConfig& config, const Models& models);
ExperimentReport sweep_model_error(const RunConfig& config, const Models& models,
                                   const std::vector<double>& epsilons);

}  // namespace reasoner
