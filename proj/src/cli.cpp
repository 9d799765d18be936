#include "reasoner/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "reasoner/bench.hpp"
#include "reasoner/error.hpp"
#include "reasoner/io.hpp"
#include "reasoner/rng.hpp"

namespace reasoner {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

std::string fmt_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string path_in(const Options& o, const std::string& name) {
  return (fs::path(o.out_dir) / name).string();
}

RunConfig load_config(const Options& o) {
  RunConfig config = read_run_config(o.config_path);
  if (o.seed) config.base_seed = *o.seed;
  // Artifacts from earlier subcommands in the same output directory are
  // picked up unless the config names its own.
  auto adopt = [&](std::string& slot, const char* name) {
    if (slot.empty() && fs::exists(path_in(o, name))) slot = path_in(o, name);
  };
  adopt(config.data.demos_path, "demos.jsonl");
  adopt(config.data.prior_path, "prior.json");
  adopt(config.data.reward_path, "reward.json");
  return config;
}

std::vector<Trajectory> load_or_generate_demos(const RunConfig& config) {
  if (!config.data.demos_path.empty()) {
    auto demos = read_trajectories(config.data.demos_path, config.task);
    std::erase_if(demos, [](const Trajectory& t) { return !t.success; });
    if (demos.empty()) throw DataError("no successful demonstrations in " + config.data.demos_path);
    return demos;
  }
  auto task = std::make_shared<const TaskSpec>(config.task);
  return generate_demos(task, config.data.n_demos, mix_seed(config.base_seed, 0x64656d6fULL),
                        config.policy)
      .kept;
}

void warn(const Options& o, std::ostream& err, const std::string& msg) {
  if (!o.quiet) err << "warning: " << msg << "\n";
}

void write_report(const Options& o, const ExperimentReport& report) {
  write_text_file(path_in(o, report.experiment + ".json"), report_to_json(report).dump(2) + "\n");
  write_text_file(path_in(o, report.experiment + ".csv"), report_to_csv(report));
}

std::string summarize(const ExperimentReport& report) {
  std::string s;
  for (const auto& a : report.arms) {
    if (!s.empty()) s += " ";
    s += a.arm;
    if (report.experiment == "sweep-alpha" && a.arm != "baseline") s += "@" + fmt_rate(a.alpha);
    if (report.experiment == "sweep-model-error" && a.arm != "baseline") {
      s += "@" + fmt_rate(a.epsilon);
    }
    s += "=" + fmt_rate(a.success_rate);
  }
  return s;
}

int dispatch(const std::string& cmd, const Options& o, std::ostream& out, std::ostream& err) {
  fs::create_directories(o.out_dir);
  const RunConfig config = load_config(o);

  if (cmd == "gen-data") {
    auto task = std::make_shared<const TaskSpec>(config.task);
    const DemoSet set = generate_demos(task, config.data.n_demos,
                                       mix_seed(config.base_seed, 0x64656d6fULL), config.policy);
    write_trajectories(path_in(o, "demos.jsonl"), set.kept);
    write_trajectories(path_in(o, "failures.jsonl"), set.failures);
    out << "kept " << set.kept.size() << "/" << set.attempted << " demos -> "
        << path_in(o, "demos.jsonl") << ", " << path_in(o, "failures.jsonl") << "\n";
    return 0;
  }
  if (cmd == "fit-prior") {
    const auto demos = load_or_generate_demos(config);
    const KdePrior prior =
        fit_kde(demo_actions(demos, config.policy.chunk_len), config.data.bandwidth);
    if (prior.bandwidth_fallback()) warn(o, err, "degenerate bandwidth; using minimum 1e-3");
    write_prior(path_in(o, "prior.json"), prior);
    out << "prior: " << prior.size() << " points, dim " << prior.dim() << ", bandwidth "
        << prior.bandwidth() << " -> " << path_in(o, "prior.json") << "\n";
    return 0;
  }
  if (cmd == "fit-reward") {
    const auto demos = load_or_generate_demos(config);
    const auto labels = demo_labels(demos, config.data.downsample_stride);
    const RewardFit fit = fit_reward(labels, config.data.ridge_lambda, config.task.kind_name());
    if (fit.ridge_fallback) warn(o, err, "singular reward design; ridge fallback 1e-6");
    write_reward_model(path_in(o, "reward.json"), fit.model);
    out << "reward: " << labels.size() << " frames, train mse " << fit.train_mse << " -> "
        << path_in(o, "reward.json") << "\n";
    return 0;
  }

  const Models models = prepare_models(config);
  if (models.bandwidth_fallback) warn(o, err, "degenerate bandwidth; using minimum 1e-3");
  if (models.ridge_fallback) warn(o, err, "singular reward design; ridge fallback 1e-6");
  ExperimentReport report;
  if (cmd == "run") {
    report = run_benchmark(config, models);
  } else if (cmd == "sweep-alpha") {
    report = sweep_alpha(config, models, config.alphas);
  } else if (cmd == "ablate-sampling") {
    report = ablate_sampling(config, models);
  } else if (cmd == "ablate-reward") {
    report = ablate_reward(config, models);
  } else {
    report = sweep_model_error(config, models, config.epsilons);
  }
  write_report(o, report);
  out << summarize(report) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Test-time tree search around a step-wise action policy", "reasoner"};
  app.require_subcommand(1);
  Options opts;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "Record scripted expert demonstrations"},
      {"fit-prior", "Fit the action KDE prior"},
      {"fit-reward", "Fit the progress reward regressor"},
      {"run", "Paired baseline vs reasoner benchmark"},
      {"sweep-alpha", "Benchmark across injection strengths"},
      {"ablate-sampling", "KDE vs Gaussian-noise expansion"},
      {"ablate-reward", "Regressor vs nearest-frame reward"},
      {"sweep-model-error", "Benchmark across world-model error levels"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opts](const std::uint64_t& s) { opts.seed = s; }, "Override base seed");
    sub->add_flag("--quiet", opts.quiet, "Suppress warnings");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    return dispatch(chosen, opts, out, err);
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "DataError: " << e.what() << "\n";
    return 1;
  }
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace reasoner
