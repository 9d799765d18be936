#include <doctest.h>

#include <filesystem>

#include "reasoner/bench.hpp"
#include "reasoner/error.hpp"
#include "reasoner/io.hpp"
#include "support.hpp"

using namespace reasoner;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.n_episodes = 16;
  c.data.n_demos = 20;
  c.threads = 1;
  return c;
}

const Models& small_models() {
  static const Models m = prepare_models(small_config());
  return m;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("reasoner_bench_" + name)).string();
}

}  // namespace

TEST_CASE("expert demonstrations") {
  auto task = testing::stack_task();
  const DemoSet set = generate_demos(task, 50, 3);
  CHECK(set.attempted == 50);
  CHECK(set.kept.size() >= 45);
  CHECK(set.kept.size() + set.failures.size() == 50);
  for (const auto& t : set.kept) {
    CHECK(t.success);
    CHECK(is_success(t.frames.back().obs));
    for (std::size_t i = 0; i + 1 < t.frames.size(); ++i) {
      CHECK(step(t.frames[i].obs, t.frames[i].action) == t.frames[i + 1].obs);
    }
  }
  for (const auto& t : set.failures) CHECK_FALSE(t.success);

  const std::string a = temp_path("a.jsonl"), b = temp_path("b.jsonl");
  write_trajectories(a, generate_demos(task, 10, 8).kept);
  write_trajectories(b, generate_demos(task, 10, 8).kept);
  CHECK(read_text_file(a) == read_text_file(b));
  std::filesystem::remove(a);
  std::filesystem::remove(b);

  TaskSpec hopeless = TaskSpec::stack();
  hopeless.horizon = 2;
  CHECK_THROWS_AS(generate_demos(std::make_shared<const TaskSpec>(hopeless), 3, 0), DataError);
  CHECK_THROWS_AS(generate_demos(task, 0, 0), ParameterError);
}

TEST_CASE("demo action windows") {
  const DemoSet set = generate_demos(testing::stack_task(), 3, 1);
  std::size_t steps = 0;
  for (const auto& t : set.kept) steps += t.frames.size() - 1;
  CHECK(demo_actions(set.kept, 1).size() == steps);
  CHECK(demo_actions(set.kept, 4).size() == steps - 3 * set.kept.size());
  const auto windows = demo_actions(set.kept, 2);
  CHECK(windows.front().size() == 8);
  CHECK(Vec(windows[0].begin() + 4, windows[0].end()) == Vec(windows[1].begin(), windows[1].begin() + 4));
  CHECK(demo_actions(set.kept, 200).empty());
}

TEST_CASE("unaided expert and corrupted policy outcomes") {
  RunConfig c = small_config();
  c.policy.drift_params = {0.0, 0.0, 0};
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(run_episode(c, small_models(), baseline_arm(), episode_seed(c, i)).result.success);
  }
}

TEST_CASE("full strength reasoner equals the baseline seed by seed") {
  const RunConfig c = small_config();
  SearchConfig s = c.search;
  s.alpha = 1.0;
  const BenchReport base = run_arm(c, small_models(), baseline_arm());
  const BenchReport full = run_arm(c, small_models(), reasoner_arm(s));
  CHECK(base.episodes == full.episodes);
}

TEST_CASE("episodes are deterministic and recorded faithfully") {
  const RunConfig c = small_config();
  const Arm arm = reasoner_arm(c.search);
  const auto first = run_episode(c, small_models(), arm, 42, {true});
  const auto again = run_episode(c, small_models(), arm, 42, {true});
  CHECK(first.result == again.result);
  REQUIRE(first.trajectory.has_value());
  const auto& frames = first.trajectory->frames;
  CHECK(static_cast<int>(frames.size()) == first.result.steps_taken + 1);
  for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
    CHECK(step(frames[i].obs, frames[i].action) == frames[i + 1].obs);
  }
  CHECK(first.result.steps_taken <= c.task.horizon);
  CHECK(first.result.final_reward >= 0.0);
  CHECK(first.result.final_reward <= 1.0);
}

TEST_CASE("component errors are recorded on the episode") {
  RunConfig c = small_config();
  Models wrong = small_models();
  wrong.prior = KdePrior({Vec(8, 0.0), Vec(8, 0.01)}, 0.1);
  const auto run = run_episode(c, wrong, reasoner_arm(c.search), 1);
  CHECK_FALSE(run.result.success);
  CHECK(run.result.error.rfind("ShapeError", 0) == 0);
}

TEST_CASE("benchmark reports are consistent and paired") {
  const RunConfig c = small_config();
  const ExperimentReport r = run_benchmark(c, small_models());
  REQUIRE(r.arms.size() == 2);
  for (const auto& arm : r.arms) {
    CHECK(arm.episodes.size() == c.n_episodes);
    std::size_t wins = 0;
    for (std::size_t i = 0; i < arm.episodes.size(); ++i) {
      wins += arm.episodes[i].success ? 1 : 0;
      CHECK(arm.episodes[i].seed == episode_seed(c, i));
    }
    CHECK(arm.success_rate == static_cast<double>(wins) / c.n_episodes);
  }
  CHECK(r.arm("baseline").alpha == 1.0);
  CHECK_THROWS_AS(r.arm("missing"), ParameterError);
}

TEST_CASE("worker count does not change results") {
  RunConfig c = small_config();
  const Arm arm = reasoner_arm(c.search);
  const BenchReport one = run_arm(c, small_models(), arm);
  c.threads = 4;
  const BenchReport four = run_arm(c, small_models(), arm);
  CHECK(one.episodes == four.episodes);
  CHECK(one.success_rate == four.success_rate);
}

TEST_CASE("experiment protocols") {
  RunConfig c = small_config();
  c.n_episodes = 8;
  const Models& m = small_models();

  const auto sweep = sweep_alpha(c, m, {0.0, 1.0});
  REQUIRE(sweep.arms.size() == 3);
  CHECK(sweep.arms[2].alpha == 1.0);
  CHECK(sweep.arms[2].episodes == sweep.arms[0].episodes);
  CHECK_THROWS_AS(sweep_alpha(c, m, {1.5}), ParameterError);

  const auto sampling = ablate_sampling(c, m);
  CHECK(sampling.arm("kde").sampling == "kde");
  CHECK(sampling.arm("gaussian_noise").sampling == "gaussian_noise");

  const auto rewards = ablate_reward(c, m);
  CHECK(rewards.arm("nearest_frame").reward == "nearest_frame");
  CHECK(rewards.arm("regressor").episodes == run_benchmark(c, m).arm("reasoner").episodes);

  const auto eps = sweep_model_error(c, m, {0.0, 0.02});
  CHECK(eps.arms[1].episodes == run_benchmark(c, m).arm("reasoner").episodes);
  CHECK(eps.arms[2].epsilon == 0.02);
  CHECK_THROWS_AS(sweep_model_error(c, m, {-0.1}), ParameterError);
}

TEST_CASE("run configuration validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_episodes = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.policy.chunk_len = 9;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.alphas = {0.5, -0.1};
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = {};
  c.search.k = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}

TEST_CASE("models load from saved artifacts") {
  RunConfig c = small_config();
  const std::string prior_path = temp_path("prior.json");
  const std::string reward_path = temp_path("reward.json");
  const KdePrior custom({{0.0, 0.0, 0.0, 0.0}, {0.01, 0.0, 0.0, 1.0}}, 0.05);
  write_prior(prior_path, custom);
  write_reward_model(reward_path, small_models().reward);
  c.data.prior_path = prior_path;
  c.data.reward_path = reward_path;
  const Models loaded = prepare_models(c);
  CHECK(loaded.prior.points() == custom.points());
  CHECK(loaded.prior.bandwidth() == 0.05);
  CHECK(loaded.reward == small_models().reward);
  std::filesystem::remove(prior_path);
  std::filesystem::remove(reward_path);
}
