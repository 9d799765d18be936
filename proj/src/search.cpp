#include "reasoner/search.hpp"

#include <cmath>
#include <limits>

#include "reasoner/error.hpp"
#include "reasoner/rng.hpp"

namespace reasoner {

std::string sampling_name(Sampling s) { return s == Sampling::kde ? "kde" : "gaussian_noise"; }

Sampling parse_sampling(const std::string& name) {
  if (name == "kde") return Sampling::kde;
  if (name == "gaussian_noise" || name == "noise") return Sampling::gaussian_noise;
  throw ParameterError("unknown sampling mode: " + name);
}

void SearchConfig::validate() const {
  if (k < 1 || k > pool_size) throw ParameterError("k must lie in [1, pool_size]");
  if (max_depth < 1) throw ParameterError("max_depth must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  if (!(c >= 0.0)) throw ParameterError("exploration constant must be nonnegative");
  if (invoke_period < 1) throw ParameterError("invoke_period must be >= 1");
  if (visit_budget < static_cast<int>(k)) throw ParameterError("visit_budget must be >= k");
  if (!(epsilon_model >= 0.0)) throw ParameterError("epsilon_model must be nonnegative");
}

SearchTrace make_root(const Observation& obs, Vec proposal, const RewardFunction& reward) {
  SearchTrace trace;
  SearchNode root;
  root.action = std::move(proposal);
  root.obs = obs;
  root.r = reward(obs);
  root.q = root.r;
  root.simulated = true;
  trace.nodes.push_back(std::move(root));
  return trace;
}

std::vector<int> expand(SearchTrace& trace, int node, const KdePrior& prior,
                        const SearchConfig& config, std::uint64_t search_seed,
                        const ActionBounds& bounds) {
  SearchNode& parent = trace.at(node);
  if (parent.expanded) throw StateError("node already expanded");
  if (!parent.simulated) throw StateError("cannot expand an unsimulated node");
  if (parent.action.size() != prior.dim()) {
    throw ShapeError("anchor dimension does not match the prior");
  }

  std::uint64_t seed = mix_seed(search_seed, static_cast<std::uint64_t>(parent.depth));
  for (int step : parent.path) seed = mix_seed(seed, static_cast<std::uint64_t>(step) + 1);
  Rng rng(seed);

  SamplePool pool;
  pool.anchor = parent.action;
  if (config.sampling == Sampling::kde) {
    pool.candidates = sample(prior, config.pool_size, rng, &bounds);
  } else {
    const double sigma = config.noise_sigma > 0.0 ? config.noise_sigma : prior.bandwidth();
    pool.candidates = noise_sample(pool.anchor, config.pool_size, sigma, rng, &bounds);
  }

  std::vector<Vec> chosen;
  chosen.reserve(config.k);
  chosen.push_back(pool.anchor);
  bool anchor_drawn = false;
  for (const auto& cand : top_k_near(pool, config.k)) {
    if (!anchor_drawn && cand == pool.anchor) {
      anchor_drawn = true;
      continue;
    }
    if (chosen.size() < config.k) chosen.push_back(cand);
  }

  const std::vector<int> weights = visit_weights(prior, chosen, config.visit_budget);
  std::vector<int> ids;
  ids.reserve(chosen.size());
  parent.expanded = true;
  const int parent_depth = parent.depth;
  const std::vector<int> parent_path = parent.path;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    SearchNode child;
    child.id = static_cast<int>(trace.nodes.size());
    child.parent = node;
    child.depth = parent_depth + 1;
    child.path = parent_path;
    child.path.push_back(static_cast<int>(i));
    child.action = std::move(chosen[i]);
    child.weight = weights[i];
    child.n = weights[i];
    trace.at(node).children.push_back(child.id);
    ids.push_back(child.id);
    trace.nodes.push_back(std::move(child));
  }
  return ids;
}

void simulate(SearchTrace& trace, int node, const WorldModel& world, const RewardFunction& reward) {
  SearchNode& n = trace.at(node);
  if (n.parent < 0) throw StateError("the root is not simulated");
  Observation next = world.transition(trace.at(n.parent).obs, n.action);
  SearchNode& target = trace.at(node);
  target.r = reward(next);
  target.obs = std::move(next);
  target.q = target.r;
  target.n = target.weight;
  target.simulated = true;
}

void update_value(SearchTrace& trace, int node) {
  SearchNode& n = trace.at(node);
  long total = 0;
  double weighted = 0.0;
  for (int c : n.children) {
    const SearchNode& child = trace.at(c);
    if (!child.simulated) continue;
    total += child.n;
    weighted += static_cast<double>(child.n) * child.q;
  }
  if (total == 0) {
    n.n = n.weight;
    n.q = n.r;
    return;
  }
  n.n = total;
  const double own = static_cast<double>(n.n);
  n.q = (own * n.r + weighted) / (own + static_cast<double>(total));
}

void backpropagate(SearchTrace& trace, int leaf) {
  const SearchNode& start = trace.at(leaf);
  if (!start.simulated) throw StateError("backpropagating an unsimulated node");
  for (int cur = start.parent; cur >= 0; cur = trace.at(cur).parent) update_value(trace, cur);
}

double ucb_score(double q_child, long n_child, long n_parent, double c) {
  const double log_n = std::log(static_cast<double>(std::max<long>(n_parent, 1)));
  return q_child + c * std::sqrt(log_n / (1.0 + static_cast<double>(n_child)));
}

int select_ucb(const SearchTrace& trace, int node, double c) {
  const SearchNode& n = trace.at(node);
  if (!n.expanded || n.children.empty()) throw StateError("selecting from an unexpanded node");
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int id : n.children) {
    const SearchNode& child = trace.at(id);
    if (!child.simulated) throw StateError("selecting among unsimulated children");
    const double s = ucb_score(child.q, child.n, n.n, c);
    if (best < 0 || s > best_score) {
      best = id;
      best_score = s;
    }
  }
  return best;
}

int best_root_child(const SearchTrace& trace) {
  const SearchNode& root = trace.root();
  if (root.children.empty()) throw StateError("root has no children");
  int best = root.children.front();
  for (int id : root.children) {
    if (trace.at(id).q > trace.at(best).q) best = id;
  }
  return best;
}

SearchResult run_search(const Observation& obs, const ActionChunk& proposal, const KdePrior& prior,
                        const WorldModel& world, const RewardFunction& reward,
                        const SearchConfig& config, std::uint64_t seed,
                        const ActionBounds& bounds) {
  config.validate();
  SearchResult result;
  result.trace = make_root(obs, flatten_chunk(proposal), reward);
  SearchTrace& trace = result.trace;

  int current = 0;
  for (int depth = 0; depth < config.max_depth; ++depth) {
    const std::vector<int> children = expand(trace, current, prior, config, seed, bounds);
    for (int child : children) {
      simulate(trace, child, world, reward);
      backpropagate(trace, child);
    }
    current = select_ucb(trace, current, config.c);
  }
  result.action = trace.at(best_root_child(trace)).action;
  return result;
}

ActResult act(const Observation& obs, Policy& policy, const KdePrior& prior,
              const WorldModel& world, const RewardFunction& reward, const SearchConfig& config,
              long step_counter, std::uint64_t seed, const ActionBounds& bounds) {
  ActResult out;
  out.proposed = policy.propose(obs);
  if (step_counter % config.invoke_period != 0) {
    out.executed = out.proposed;
    return out;
  }
  out.searched = true;
  out.reasoner = run_search(obs, out.proposed, prior, world, reward, config, seed, bounds).action;
  if (config.blend_whole_chunk) {
    out.executed =
        unflatten_chunk(blend_flat(flatten_chunk(out.proposed), out.reasoner, config.alpha, bounds),
                        out.proposed.size());
  } else {
    out.executed = out.proposed;
    const Action searched =
        unflatten_action(std::span<const double>(out.reasoner).subspan(0, kActionDim));
    out.executed.front() = blend_actions(out.proposed.front(), searched, config.alpha, bounds);
  }
  return out;
}

}  // namespace reasoner
