#include "reasoner/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "reasoner/error.hpp"
#include "reasoner/io.hpp"
#include "reasoner/rng.hpp"

namespace reasoner {

namespace {

constexpr std::uint64_t kDemoStream = 0x64656d6fULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;
constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;
constexpr std::uint64_t kSearchStream = 0x736561726368ULL;

std::unique_ptr<WorldModel> make_world(const RunConfig& config, double epsilon) {
  if (epsilon == 0.0) return std::make_unique<PerfectModel>();
  return std::make_unique<NoisyModel>(epsilon, mix_seed(config.base_seed, kModelStream));
}

std::unique_ptr<RewardFunction> make_reward(const Models& models, RewardSource source) {
  if (source == RewardSource::nearest_frame) {
    return std::make_unique<NearestFrameReward>(models.bank);
  }
  return std::make_unique<LinearReward>(models.reward);
}

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

BenchReport summarize(const Arm& arm, std::vector<EpisodeResult> episodes) {
  BenchReport report;
  report.arm = arm.name;
  report.alpha = arm.use_reasoner ? arm.search.alpha : 1.0;
  report.epsilon = arm.use_reasoner ? arm.search.epsilon_model : 0.0;
  report.sampling = sampling_name(arm.search.sampling);
  report.reward = arm.reward == RewardSource::regressor ? "regressor" : "nearest_frame";
  std::size_t successes = 0;
  double steps = 0.0;
  for (const auto& e : episodes) {
    successes += e.success ? 1 : 0;
    steps += e.steps_taken;
  }
  const auto n = static_cast<double>(episodes.size());
  report.success_rate = episodes.empty() ? 0.0 : static_cast<double>(successes) / n;
  report.mean_steps = episodes.empty() ? 0.0 : steps / n;
  report.episodes = std::move(episodes);
  return report;
}

}  // namespace

Policy PolicyConfig::make() const {
  if (drift) return Policy::drift(drift_params, chunk_len, expert);
  return Policy::expert(chunk_len, expert);
}

void RunConfig::validate() const {
  task.validate();
  search.validate();
  if (n_episodes < 1) throw ParameterError("n_episodes must be >= 1");
  if (policy.chunk_len < 1 || policy.chunk_len > kMaxChunkLen) {
    throw ParameterError("chunk_len must lie in [1, 8]");
  }
  if (data.n_demos < 1) throw ParameterError("n_demos must be >= 1");
  if (data.downsample_stride < 1) throw ParameterError("downsample_stride must be >= 1");
  if (!(data.ridge_lambda >= 0.0)) throw ParameterError("ridge_lambda must be nonnegative");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("alphas must lie in [0, 1]");
  }
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw ParameterError("epsilons must be nonnegative");
  }
}

DemoSet generate_demos(const std::shared_ptr<const TaskSpec>& task, std::size_t n,
                       std::uint64_t seed, const PolicyConfig& policy) {
  if (n < 1) throw ParameterError("demo count must be >= 1");
  DemoSet set;
  set.attempted = n;
  Policy expert = Policy::expert(1, policy.expert);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = mix_seed(seed, i);
    Trajectory traj;
    traj.task_id = task->kind_name();
    traj.seed = s;
    Observation obs = reset(task, s);
    expert.reset(s);
    for (int t = 0; t < task->horizon && !is_success(obs); ++t) {
      const Action a = expert.propose(obs).front();
      traj.frames.push_back({obs, a});
      obs = step(obs, a);
    }
    // Terminal observation closes the sequence with a no-op action.
    traj.frames.push_back({obs, Action{{0.0, 0.0, 0.0}, obs.grip_closed ? 1.0 : 0.0}});
    traj.success = is_success(obs);
    (traj.success ? set.kept : set.failures).push_back(std::move(traj));
  }
  if (set.kept.empty()) throw DataError("no successful demonstrations");
  return set;
}

std::vector<Vec> demo_actions(const std::vector<Trajectory>& demos, std::size_t chunk_len) {
  if (chunk_len < 1) throw ParameterError("chunk_len must be >= 1");
  std::vector<Vec> out;
  for (const auto& traj : demos) {
    // The terminal frame carries a placeholder action.
    const std::size_t n = traj.frames.size() > 0 ? traj.frames.size() - 1 : 0;
    if (n < chunk_len) continue;
    for (std::size_t i = 0; i + chunk_len <= n; ++i) {
      Vec v;
      v.reserve(chunk_len * kActionDim);
      for (std::size_t j = 0; j < chunk_len; ++j) {
        const Vec a = flatten(traj.frames[i + j].action);
        v.insert(v.end(), a.begin(), a.end());
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<LabeledFrame> demo_labels(const std::vector<Trajectory>& demos, std::size_t stride) {
  std::vector<LabeledFrame> out;
  for (const auto& traj : demos) {
    if (traj.frames.size() < 2) continue;
    auto labeled = label_progress(downsample(traj, stride));
    out.insert(out.end(), std::make_move_iterator(labeled.begin()),
               std::make_move_iterator(labeled.end()));
  }
  return out;
}

Models fit_models(const RunConfig& config, const std::vector<Trajectory>& demos) {
  if (demos.empty()) throw DataError("no demonstrations to fit on");
  KdePrior prior = fit_kde(demo_actions(demos, config.policy.chunk_len), config.data.bandwidth);
  const auto labels = demo_labels(demos, config.data.downsample_stride);
  RewardFit fit = fit_reward(labels, config.data.ridge_lambda, config.task.kind_name());
  const bool bw_fallback = prior.bandwidth_fallback();
  return Models{std::move(prior), std::move(fit.model), labels, bw_fallback, fit.ridge_fallback};
}

Models prepare_models(const RunConfig& config) {
  config.validate();
  const auto& d = config.data;
  const bool have_prior = !d.prior_path.empty() && std::filesystem::exists(d.prior_path);
  const bool have_reward = !d.reward_path.empty() && std::filesystem::exists(d.reward_path);

  std::vector<Trajectory> demos;
  if (!d.demos_path.empty() && std::filesystem::exists(d.demos_path)) {
    demos = read_trajectories(d.demos_path, config.task);
  } else {
    auto task = std::make_shared<const TaskSpec>(config.task);
    demos = generate_demos(task, d.n_demos, mix_seed(config.base_seed, kDemoStream),
                           config.policy)
                .kept;
  }
  Models models = fit_models(config, demos);
  if (have_prior) models.prior = read_prior(d.prior_path);
  if (have_reward) models.reward = read_reward_model(d.reward_path);
  return models;
}

std::uint64_t episode_seed(const RunConfig& config, std::size_t index) {
  return mix_seed(mix_seed(config.base_seed, kEvalStream), index);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("REASONER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

EpisodeRun run_episode(const RunConfig& config, const Models& models, const Arm& arm,
                       std::uint64_t seed, EpisodeOptions options) {
  const auto start = std::chrono::steady_clock::now();
  auto task = std::make_shared<const TaskSpec>(config.task);
  EpisodeRun run;
  run.result.task_id = task->kind_name();
  run.result.seed = seed;
  if (options.record) run.trajectory = Trajectory{task->kind_name(), seed, false, {}};

  const auto world = make_world(config, arm.search.epsilon_model);
  const auto reward = make_reward(models, arm.reward);
  Policy policy = config.policy.make();
  policy.reset(seed);
  Observation obs = reset(task, seed);
  int steps = 0;
  try {
    for (long query = 0; steps < task->horizon && !is_success(obs); ++query) {
      ActionChunk chunk;
      if (arm.use_reasoner) {
        chunk = act(obs, policy, models.prior, *world, *reward, arm.search, query,
                    mix_seed(mix_seed(seed, kSearchStream), static_cast<std::uint64_t>(query)))
                    .executed;
      } else {
        chunk = policy.propose(obs);
      }
      for (const Action& a : chunk) {
        if (run.trajectory) run.trajectory->frames.push_back({obs, a});
        obs = step(obs, a);
        ++steps;
        if (steps >= task->horizon || is_success(obs)) break;
      }
    }
  } catch (const Error& e) {
    run.result.error = std::string(e.name()) + ": " + e.what();
  }
  run.result.success = run.result.error.empty() && is_success(obs);
  run.result.steps_taken = steps;
  run.result.final_reward = predict_reward(models.reward, obs);
  if (run.trajectory) {
    run.trajectory->frames.push_back({obs, Action{{0.0, 0.0, 0.0}, obs.grip_closed ? 1.0 : 0.0}});
    run.trajectory->success = run.result.success;
  }
  run.result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

BenchReport run_arm(const RunConfig& config, const Models& models, const Arm& arm) {
  if (arm.use_reasoner) arm.search.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<EpisodeResult> results(config.n_episodes);
  parallel_for(config.n_episodes, resolve_threads(config.threads), [&](std::size_t i) {
    results[i] = run_episode(config, models, arm, episode_seed(config, i)).result;
  });
  BenchReport report = summarize(arm, std::move(results));
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

Arm baseline_arm() { return Arm{"baseline", false, SearchConfig{}, RewardSource::regressor}; }

Arm reasoner_arm(const SearchConfig& search, std::string name) {
  return Arm{std::move(name), true, search, RewardSource::regressor};
}

const BenchReport& ExperimentReport::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.arm == name) return a;
  }
  throw ParameterError("no arm named " + name);
}

ExperimentReport run_benchmark(const RunConfig& config, const Models& models) {
  config.validate();
  ExperimentReport report{"run", config, {}};
  report.arms.push_back(run_arm(config, models, baseline_arm()));
  report.arms.push_back(run_arm(config, models, reasoner_arm(config.search)));
  return report;
}

ExperimentReport sweep_alpha(const RunConfig& config, const Models& models,
                             const std::vector<double>& alphas) {
  config.validate();
  ExperimentReport report{"sweep-alpha", config, {}};
  report.arms.push_back(run_arm(config, models, baseline_arm()));
  for (double alpha : alphas) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
    SearchConfig s = config.search;
    s.alpha = alpha;
    report.arms.push_back(run_arm(config, models, reasoner_arm(s, "reasoner_alpha")));
  }
  return report;
}

ExperimentReport ablate_sampling(const RunConfig& config, const Models& models) {
  config.validate();
  ExperimentReport report{"ablate-sampling", config, {}};
  report.arms.push_back(run_arm(config, models, baseline_arm()));
  SearchConfig kde = config.search;
  kde.sampling = Sampling::kde;
  report.arms.push_back(run_arm(config, models, reasoner_arm(kde, "kde")));
  SearchConfig noise = config.search;
  noise.sampling = Sampling::gaussian_noise;
  report.arms.push_back(run_arm(config, models, reasoner_arm(noise, "gaussian_noise")));
  return report;
}

ExperimentReport ablate_reward(const RunConfig& config, const Models& models) {
  config.validate();
  ExperimentReport report{"ablate-reward", config, {}};
  report.arms.push_back(run_arm(config, models, baseline_arm()));
  report.arms.push_back(run_arm(config, models, reasoner_arm(config.search, "regressor")));
  Arm nearest = reasoner_arm(config.search, "nearest_frame");
  nearest.reward = RewardSource::nearest_frame;
  report.arms.push_back(run_arm(config, models, nearest));
  return report;
}

ExperimentReport sweep_model_error(const RunConfig& config, const Models& models,
                                   const std::vector<double>& epsilons) {
  config.validate();
  ExperimentReport report{"sweep-model-error", config, {}};
  report.arms.push_back(run_arm(config, models, baseline_arm()));
  for (double eps : epsilons) {
    if (!(eps >= 0.0)) throw ParameterError("epsilon must be nonnegative");
    SearchConfig s = config.search;
    s.epsilon_model = eps;
    report.arms.push_back(run_arm(config, models, reasoner_arm(s, "reasoner_epsilon")));
  }
  return report;
}

}  // namespace reasoner
