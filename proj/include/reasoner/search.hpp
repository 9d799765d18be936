#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "reasoner/core.hpp"
#include "reasoner/policy.hpp"
#include "reasoner/prior.hpp"
#include "reasoner/reward.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

enum class Sampling { kde, gaussian_noise };

std::string sampling_name(Sampling s);
Sampling parse_sampling(const std::string& name);

struct SearchConfig {
  std::size_t k = 8;            // expansion width
  std::size_t pool_size = 256;  // prior draws per expansion
  int max_depth = 3;
  double c = 1.0 / std::numbers::sqrt2;  // exploration constant
  double alpha = 0.6;                    // injection strength
  int visit_budget = 64;                 // soft visits spread over one expansion
  int invoke_period = 1;                 // search every m policy queries
  double epsilon_model = 0.0;            // world-model error used in simulation
  Sampling sampling = Sampling::kde;
  double noise_sigma = 0.0;  // gaussian_noise pool spread; <= 0 matches the prior bandwidth
  bool blend_whole_chunk = false;

  void validate() const;
};

struct SearchNode {
  int id = 0;
  int parent = -1;
  int depth = 0;  // root 0
  std::vector<int> path;  // child indices from the root
  Vec action;             // incoming action; the root holds the policy proposal
  Observation obs;
  double r = 0.0;
  double q = 0.0;
  long n = 0;       // aggregated visit count
  int weight = 0;   // soft visit count assigned at expansion
  bool simulated = false;
  bool expanded = false;
  std::vector<int> children;
};

/// Arena of search nodes; index 0 is the root.
struct SearchTrace {
  std::vector<SearchNode> nodes;

  SearchNode& at(int id) { return nodes.at(static_cast<std::size_t>(id)); }
  const SearchNode& at(int id) const { return nodes.at(static_cast<std::size_t>(id)); }
  const SearchNode& root() const { return nodes.front(); }
};

/// Creates the root node holding the live observation and the policy proposal.
SearchTrace make_root(const Observation& obs, Vec proposal, const RewardFunction& reward);

/// Draws a seeded pool, keeps the k candidates nearest the node's action
/// (the action itself always included) and attaches them as unsimulated
/// children weighted by prior density. Returns the new child ids.
std::vector<int> expand(SearchTrace& trace, int node, const KdePrior& prior,
                        const SearchConfig& config, std::uint64_t search_seed,
                        const ActionBounds& bounds = {});

/// Rolls the parent's observation forward under the node's action and scores it.
void simulate(SearchTrace& trace, int node, const WorldModel& world, const RewardFunction& reward);

/// Recomputes (N, Q) on every ancestor of `leaf`, bottom-up.
void backpropagate(SearchTrace& trace, int leaf);

/// Recomputes one node's (N, Q) from its simulated children.
void update_value(SearchTrace& trace, int node);

double ucb_score(double q_child, long n_child, long n_parent, double c);

/// Child maximizing Q + c * sqrt(ln N(parent) / (1 + N(child))).
int select_ucb(const SearchTrace& trace, int node, double c);

/// Root child with maximal Q (ties: lowest index).
int best_root_child(const SearchTrace& trace);

struct SearchResult {
  Vec action;
  SearchTrace trace;
};

/// One depth-limited descend-and-expand pass from the live observation.
SearchResult run_search(const Observation& obs, const ActionChunk& proposal, const KdePrior& prior,
                        const WorldModel& world, const RewardFunction& reward,
                        const SearchConfig& config, std::uint64_t seed,
                        const ActionBounds& bounds = {});

struct ActResult {
  ActionChunk executed;
  ActionChunk proposed;
  bool searched = false;
  Vec reasoner;  // searched action when `searched`
};

/// Queries the policy and, on scheduled steps, injects the searched action
/// with strength alpha.
ActResult act(const Observation& obs, Policy& policy, const KdePrior& prior,
              const WorldModel& world, const RewardFunction& reward, const SearchConfig& config,
              long step_counter, std::uint64_t seed, const ActionBounds& bounds = {});

}  // namespace reasoner
