#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "reasoner/bench.hpp"
#include "reasoner/prior.hpp"
#include "reasoner/reward.hpp"
#include "reasoner/search.hpp"
#include "reasoner/trajectory.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

using Json = nlohmann::ordered_json;

Json task_to_json(const TaskSpec& task);
TaskSpec task_from_json(const Json& j);

Json observation_to_json(const Observation& obs);
Observation observation_from_json(const Json& j, std::shared_ptr<const TaskSpec> task);

/// One trajectory per line: {"task_id","seed","success","frames":[{"obs","action"}]}.
std::string trajectory_to_line(const Trajectory& traj);
Trajectory trajectory_from_line(const std::string& line, std::shared_ptr<const TaskSpec> task);
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(const std::string& path, const TaskSpec& task);

Json prior_to_json(const KdePrior& prior);
KdePrior prior_from_json(const Json& j);
void write_prior(const std::string& path, const KdePrior& prior);
KdePrior read_prior(const std::string& path);

Json reward_model_to_json(const RewardModel& model);
RewardModel reward_model_from_json(const Json& j);
void write_reward_model(const std::string& path, const RewardModel& model);
RewardModel read_reward_model(const std::string& path);

Json trace_to_json(const SearchTrace& trace);

Json search_config_to_json(const SearchConfig& config);
SearchConfig search_config_from_json(const Json& j, SearchConfig base = {});

/// Every field is optional; missing fields keep their defaults.
Json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const Json& j);
RunConfig read_run_config(const std::string& path);

Json report_to_json(const ExperimentReport& report);
/// Header plus one row per arm: arm,alpha,epsilon,success_rate,n,mean_steps.
std::string report_to_csv(const ExperimentReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace reasoner
