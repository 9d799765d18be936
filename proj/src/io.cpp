#include "reasoner/io.hpp"

#include <fstream>
#include <sstream>

#include "reasoner/error.hpp"

namespace reasoner {

namespace {

Json vec3_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string number(double v) { return Json(v).dump(); }

template <typename Fn>
auto wrap_json_errors(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw DataError("malformed " + what + ": " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

Json task_to_json(const TaskSpec& task) {
  Json j;
  j["kind"] = task.kind_name();
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, StackGoal>) {
          j["src"] = g.src;
          j["dst"] = g.dst;
        } else if constexpr (std::is_same_v<G, PickPlaceGoal>) {
          j["src"] = g.src;
          j["zone_center"] = vec3_json(g.zone_center);
          j["zone_radius"] = g.zone_radius;
        } else {
          j["center"] = vec3_json(g.center);
          j["radius"] = g.radius;
          j["n_waypoints"] = g.n_waypoints;
        }
      },
      task.goal);
  j["horizon"] = task.horizon;
  j["tolerance"] = task.tolerance;
  j["grasp_radius"] = task.grasp_radius;
  j["jitter"] = task.jitter;
  j["home"] = vec3_json(task.home);
  Json objects = Json::array();
  for (const auto& o : task.objects) {
    objects.push_back(Json{{"pos", vec3_json(o.pos)}, {"half_size", o.half_size}});
  }
  j["objects"] = objects;
  return j;
}

TaskSpec task_from_json(const Json& j) {
  return wrap_json_errors("task", [&] {
    const std::string kind = j.value("kind", std::string("stack"));
    TaskSpec t;
    if (kind == "stack") {
      t = TaskSpec::stack();
      auto g = std::get<StackGoal>(t.goal);
      read_opt(j, "src", g.src);
      read_opt(j, "dst", g.dst);
      t.goal = g;
    } else if (kind == "pick_place") {
      t = TaskSpec::pick_place();
      auto g = std::get<PickPlaceGoal>(t.goal);
      read_opt(j, "src", g.src);
      if (j.contains("zone_center")) g.zone_center = vec3_from(j.at("zone_center"));
      read_opt(j, "zone_radius", g.zone_radius);
      t.goal = g;
    } else if (kind == "follow_circle") {
      t = TaskSpec::follow_circle();
      auto g = std::get<FollowCircleGoal>(t.goal);
      if (j.contains("center")) g.center = vec3_from(j.at("center"));
      read_opt(j, "radius", g.radius);
      read_opt(j, "n_waypoints", g.n_waypoints);
      t.goal = g;
    } else {
      throw ParameterError("unknown task kind: " + kind);
    }
    read_opt(j, "horizon", t.horizon);
    read_opt(j, "tolerance", t.tolerance);
    read_opt(j, "grasp_radius", t.grasp_radius);
    read_opt(j, "jitter", t.jitter);
    if (j.contains("home")) t.home = vec3_from(j.at("home"));
    if (j.contains("objects")) {
      t.objects.clear();
      for (const auto& o : j.at("objects")) {
        t.objects.push_back(ObjectState{vec3_from(o.at("pos")), o.at("half_size").get<double>()});
      }
    }
    t.validate();
    return t;
  });
}

Json observation_to_json(const Observation& obs) {
  Json j;
  j["gripper_pos"] = vec3_json(obs.gripper_pos);
  j["grip_closed"] = obs.grip_closed;
  j["held_object"] = obs.held_object ? Json(*obs.held_object) : Json(nullptr);
  Json objects = Json::array();
  for (const auto& o : obs.objects) {
    objects.push_back(Json{{"pos", vec3_json(o.pos)}, {"half_size", o.half_size}});
  }
  j["objects"] = objects;
  j["step_index"] = obs.step_index;
  j["waypoints_reached"] = obs.waypoints_reached;
  return j;
}

Observation observation_from_json(const Json& j, std::shared_ptr<const TaskSpec> task) {
  return wrap_json_errors("observation", [&] {
    Observation obs;
    obs.task = std::move(task);
    obs.gripper_pos = vec3_from(j.at("gripper_pos"));
    obs.grip_closed = j.at("grip_closed").get<bool>();
    if (!j.at("held_object").is_null()) obs.held_object = j.at("held_object").get<int>();
    for (const auto& o : j.at("objects")) {
      obs.objects.push_back(ObjectState{vec3_from(o.at("pos")), o.at("half_size").get<double>()});
    }
    obs.step_index = j.at("step_index").get<int>();
    obs.waypoints_reached = j.value("waypoints_reached", 0);
    return obs;
  });
}

std::string trajectory_to_line(const Trajectory& traj) {
  Json j;
  j["task_id"] = traj.task_id;
  j["seed"] = traj.seed;
  j["success"] = traj.success;
  Json frames = Json::array();
  for (const auto& f : traj.frames) {
    const auto& a = f.action;
    frames.push_back(Json{{"obs", observation_to_json(f.obs)},
                          {"action", Json::array({a.delta[0], a.delta[1], a.delta[2], a.grip})}});
  }
  j["frames"] = frames;
  return j.dump();
}

Trajectory trajectory_from_line(const std::string& line, std::shared_ptr<const TaskSpec> task) {
  return wrap_json_errors("trajectory", [&] {
    const Json j = Json::parse(line);
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.success = j.at("success").get<bool>();
    for (const auto& f : j.at("frames")) {
      const auto& a = f.at("action");
      if (!a.is_array() || a.size() != kActionDim) throw ShapeError("action must have 4 entries");
      t.frames.push_back({observation_from_json(f.at("obs"), task),
                          Action{{a[0].get<double>(), a[1].get<double>(), a[2].get<double>()},
                                 a[3].get<double>()}});
    }
    if (t.frames.empty()) throw DataError("trajectory has no frames");
    return t;
  });
}

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajs) {
  std::string text;
  for (const auto& t : trajs) {
    text += trajectory_to_line(t);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Trajectory> read_trajectories(const std::string& path, const TaskSpec& task) {
  auto shared = std::make_shared<const TaskSpec>(task);
  std::istringstream in(read_text_file(path));
  std::vector<Trajectory> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    out.push_back(trajectory_from_line(line, shared));
  }
  return out;
}

Json prior_to_json(const KdePrior& prior) {
  Json j;
  j["dim"] = prior.dim();
  j["bandwidth"] = prior.bandwidth();
  j["bandwidth_rule"] = prior.rule().name();
  Json points = Json::array();
  for (const auto& p : prior.points()) points.push_back(p);
  j["points"] = points;
  return j;
}

KdePrior prior_from_json(const Json& j) {
  return wrap_json_errors("prior", [&] {
    const auto dim = j.at("dim").get<std::size_t>();
    const double h = j.at("bandwidth").get<double>();
    const std::string rule = j.at("bandwidth_rule").get<std::string>();
    auto points = j.at("points").get<std::vector<Vec>>();
    for (const auto& p : points) {
      if (p.size() != dim) throw ShapeError("prior point dimension disagrees with dim");
    }
    return KdePrior(std::move(points), h, BandwidthRule::parse(rule, h));
  });
}

void write_prior(const std::string& path, const KdePrior& prior) {
  write_text_file(path, prior_to_json(prior).dump() + "\n");
}

KdePrior read_prior(const std::string& path) {
  return prior_from_json(wrap_json_errors("prior", [&] { return Json::parse(read_text_file(path)); }));
}

Json reward_model_to_json(const RewardModel& model) {
  Json j;
  j["task_kind"] = model.task_kind;
  j["ridge_lambda"] = model.ridge_lambda;
  j["weights"] = model.weights;
  return j;
}

RewardModel reward_model_from_json(const Json& j) {
  return wrap_json_errors("reward model", [&] {
    return RewardModel{j.at("task_kind").get<std::string>(), j.at("ridge_lambda").get<double>(),
                       j.at("weights").get<Vec>()};
  });
}

void write_reward_model(const std::string& path, const RewardModel& model) {
  write_text_file(path, reward_model_to_json(model).dump() + "\n");
}

RewardModel read_reward_model(const std::string& path) {
  return reward_model_from_json(
      wrap_json_errors("reward model", [&] { return Json::parse(read_text_file(path)); }));
}

Json trace_to_json(const SearchTrace& trace) {
  Json nodes = Json::array();
  for (const auto& n : trace.nodes) {
    nodes.push_back(Json{{"id", n.id},
                         {"parent", n.parent},
                         {"action", n.action},
                         {"r", n.r},
                         {"Q", n.q},
                         {"N", n.n},
                         {"depth", n.depth}});
  }
  return Json{{"nodes", nodes}};
}

Json search_config_to_json(const SearchConfig& c) {
  Json j;
  j["k"] = c.k;
  j["pool_size"] = c.pool_size;
  j["max_depth"] = c.max_depth;
  j["c"] = c.c;
  j["alpha"] = c.alpha;
  j["visit_budget"] = c.visit_budget;
  j["invoke_period"] = c.invoke_period;
  j["epsilon_model"] = c.epsilon_model;
  j["sampling"] = sampling_name(c.sampling);
  j["noise_sigma"] = c.noise_sigma;
  j["blend_whole_chunk"] = c.blend_whole_chunk;
  return j;
}

SearchConfig search_config_from_json(const Json& j, SearchConfig c) {
  return wrap_json_errors("search config", [&] {
    read_opt(j, "k", c.k);
    read_opt(j, "pool_size", c.pool_size);
    read_opt(j, "max_depth", c.max_depth);
    read_opt(j, "c", c.c);
    read_opt(j, "alpha", c.alpha);
    read_opt(j, "visit_budget", c.visit_budget);
    read_opt(j, "invoke_period", c.invoke_period);
    read_opt(j, "epsilon_model", c.epsilon_model);
    if (j.contains("sampling")) c.sampling = parse_sampling(j.at("sampling").get<std::string>());
    read_opt(j, "noise_sigma", c.noise_sigma);
    read_opt(j, "blend_whole_chunk", c.blend_whole_chunk);
    return c;
  });
}

Json run_config_to_json(const RunConfig& c) {
  Json j;
  j["task"] = task_to_json(c.task);
  const auto& p = c.policy;
  j["policy"] = Json{{"kind", p.drift ? "drift" : "expert"},
                     {"bias_rate", p.drift_params.bias_rate},
                     {"noise_std", p.drift_params.noise_std},
                     {"seed", p.drift_params.seed},
                     {"chunk_len", p.chunk_len},
                     {"expert",
                      Json{{"approach_height", p.expert.approach_height},
                           {"carry_height", p.expert.carry_height},
                           {"coarse_tol", p.expert.coarse_tol},
                           {"align_tol", p.expert.align_tol},
                           {"grasp_tol", p.expert.grasp_tol},
                           {"place_tol", p.expert.place_tol}}}};
  j["search"] = search_config_to_json(c.search);
  const auto& d = c.data;
  j["data"] = Json{{"n_demos", d.n_demos},
                   {"downsample_stride", d.downsample_stride},
                   {"ridge_lambda", d.ridge_lambda},
                   {"bandwidth_rule", d.bandwidth.name()},
                   {"bandwidth", d.bandwidth.fixed_h},
                   {"demos", d.demos_path},
                   {"prior", d.prior_path},
                   {"reward", d.reward_path}};
  j["bench"] = Json{{"n_episodes", c.n_episodes},
                    {"base_seed", c.base_seed},
                    {"alphas", c.alphas},
                    {"epsilons", c.epsilons}};
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  return wrap_json_errors("run config", [&] {
    RunConfig c;
    if (j.contains("task")) c.task = task_from_json(j.at("task"));
    if (j.contains("policy")) {
      const auto& p = j.at("policy");
      if (p.contains("kind")) {
        const auto kind = p.at("kind").get<std::string>();
        if (kind != "drift" && kind != "expert") throw ParameterError("unknown policy kind " + kind);
        c.policy.drift = kind == "drift";
      }
      read_opt(p, "bias_rate", c.policy.drift_params.bias_rate);
      read_opt(p, "noise_std", c.policy.drift_params.noise_std);
      read_opt(p, "seed", c.policy.drift_params.seed);
      read_opt(p, "chunk_len", c.policy.chunk_len);
      if (p.contains("expert")) {
        const auto& e = p.at("expert");
        read_opt(e, "approach_height", c.policy.expert.approach_height);
        read_opt(e, "carry_height", c.policy.expert.carry_height);
        read_opt(e, "coarse_tol", c.policy.expert.coarse_tol);
        read_opt(e, "align_tol", c.policy.expert.align_tol);
        read_opt(e, "grasp_tol", c.policy.expert.grasp_tol);
        read_opt(e, "place_tol", c.policy.expert.place_tol);
      }
    }
    if (j.contains("search")) c.search = search_config_from_json(j.at("search"));
    if (j.contains("data")) {
      const auto& d = j.at("data");
      read_opt(d, "n_demos", c.data.n_demos);
      read_opt(d, "downsample_stride", c.data.downsample_stride);
      read_opt(d, "ridge_lambda", c.data.ridge_lambda);
      double h = 0.0;
      read_opt(d, "bandwidth", h);
      if (d.contains("bandwidth_rule")) {
        c.data.bandwidth = BandwidthRule::parse(d.at("bandwidth_rule").get<std::string>(), h);
      }
      read_opt(d, "demos", c.data.demos_path);
      read_opt(d, "prior", c.data.prior_path);
      read_opt(d, "reward", c.data.reward_path);
    }
    if (j.contains("bench")) {
      const auto& b = j.at("bench");
      read_opt(b, "n_episodes", c.n_episodes);
      read_opt(b, "base_seed", c.base_seed);
      read_opt(b, "alphas", c.alphas);
      read_opt(b, "epsilons", c.epsilons);
      read_opt(b, "threads", c.threads);
    }
    c.validate();
    return c;
  });
}

RunConfig read_run_config(const std::string& path) {
  return run_config_from_json(
      wrap_json_errors("run config", [&] { return Json::parse(read_text_file(path)); }));
}

Json report_to_json(const ExperimentReport& report) {
  Json j;
  j["experiment"] = report.experiment;
  j["config"] = run_config_to_json(report.config);
  Json arms = Json::array();
  for (const auto& a : report.arms) {
    Json episodes = Json::array();
    for (const auto& e : a.episodes) {
      Json ej{{"task_id", e.task_id},
              {"seed", e.seed},
              {"success", e.success},
              {"steps_taken", e.steps_taken},
              {"final_reward", e.final_reward}};
      if (!e.error.empty()) ej["error"] = e.error;
      episodes.push_back(ej);
    }
    arms.push_back(Json{{"arm", a.arm},
                        {"alpha", a.alpha},
                        {"epsilon", a.epsilon},
                        {"sampling", a.sampling},
                        {"reward", a.reward},
                        {"success_rate", a.success_rate},
                        {"n", a.episodes.size()},
                        {"mean_steps", a.mean_steps},
                        {"episodes", episodes}});
  }
  j["arms"] = arms;
  if (report.arms.size() >= 2) {
    j["paired_difference"] = report.arms[1].success_rate - report.arms[0].success_rate;
  }
  return j;
}

std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "arm,alpha,epsilon,success_rate,n,mean_steps\n";
  for (const auto& a : report.arms) {
    out += a.arm + "," + number(a.alpha) + "," + number(a.epsilon) + "," +
           number(a.success_rate) + "," + std::to_string(a.episodes.size()) + "," +
           number(a.mean_steps) + "\n";
  }
  return out;
}

}  // namespace reasoner
