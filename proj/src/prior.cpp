#include "reasoner/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "reasoner/error.hpp"

namespace reasoner {

std::string BandwidthRule::name() const {
  switch (kind) {
    case Kind::scott:
      return "scott";
    case Kind::silverman:
      return "silverman";
    case Kind::fixed:
      return "fixed";
  }
  return "scott";
}

BandwidthRule BandwidthRule::parse(const std::string& name, double fixed_h) {
  if (name == "scott") return scott();
  if (name == "silverman") return silverman();
  if (name == "fixed") {
    if (!(fixed_h > 0.0)) throw ParameterError("fixed bandwidth must be positive");
    return fixed(fixed_h);
  }
  throw ParameterError("unknown bandwidth rule: " + name);
}

KdePrior::KdePrior(std::vector<Vec> points, double bandwidth, BandwidthRule rule)
    : points_(std::move(points)), bandwidth_(bandwidth), rule_(rule) {
  if (points_.empty()) throw DataError("KDE needs at least one support point");
  dim_ = points_.front().size();
  if (dim_ == 0) throw ShapeError("KDE support points must be nonempty vectors");
  for (const auto& p : points_) {
    if (p.size() != dim_) throw ShapeError("KDE support points differ in dimension");
  }
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) {
    throw ParameterError("bandwidth must be positive");
  }
}

double KdePrior::log_density(std::span<const double> a) const {
  if (a.size() != dim_) throw ShapeError("query dimension does not match the prior");
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);
  double max_exponent = -std::numeric_limits<double>::infinity();
  std::vector<double> exponents(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    exponents[i] = -squared_distance(a, points_[i]) * inv_two_h2;
    max_exponent = std::max(max_exponent, exponents[i]);
  }
  double sum = 0.0;
  for (double e : exponents) sum += std::exp(e - max_exponent);
  const double d = static_cast<double>(dim_);
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - d * std::log(bandwidth_);
  return log_norm + max_exponent + std::log(sum / static_cast<double>(points_.size()));
}

double KdePrior::density(std::span<const double> a) const { return std::exp(log_density(a)); }

double KdePrior::peak() const {
  const double d = static_cast<double>(dim_);
  return std::pow(2.0 * std::numbers::pi, -0.5 * d) * std::pow(bandwidth_, -d);
}

KdePrior fit_kde(const std::vector<Vec>& actions, BandwidthRule rule) {
  if (actions.size() < 2) throw DataError("KDE fit needs at least 2 actions");
  const std::size_t dim = actions.front().size();
  for (const auto& a : actions) {
    if (a.size() != dim) throw ShapeError("KDE training actions differ in dimension");
  }
  if (rule.kind == BandwidthRule::Kind::fixed) {
    if (!(rule.fixed_h > 0.0)) throw ParameterError("fixed bandwidth must be positive");
    return KdePrior(actions, rule.fixed_h, rule);
  }

  const double n = static_cast<double>(actions.size());
  double mean_std = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (const auto& a : actions) mean += a[j];
    mean /= n;
    double ss = 0.0;
    for (const auto& a : actions) ss += (a[j] - mean) * (a[j] - mean);
    mean_std += std::sqrt(ss / (n - 1.0));
  }
  mean_std /= static_cast<double>(dim);

  const double d = static_cast<double>(dim);
  double factor = std::pow(n, -1.0 / (d + 4.0));
  if (rule.kind == BandwidthRule::Kind::silverman) {
    factor *= std::pow(4.0 / (d + 2.0), 1.0 / (d + 4.0));
  }
  const double h = factor * mean_std;
  if (!(h > 0.0) || !std::isfinite(h)) {
    KdePrior prior(actions, kMinBandwidth, rule);
    prior.mark_fallback();
    return prior;
  }
  return KdePrior(actions, h, rule);
}

std::vector<Vec> sample(const KdePrior& prior, std::size_t n, Rng& rng,
                        const ActionBounds* bounds) {
  if (n == 0) throw ParameterError("sample count must be >= 1");
  std::vector<Vec> out;
  out.reserve(n);
  const double h = prior.bandwidth();
  for (std::size_t s = 0; s < n; ++s) {
    Vec v = prior.points()[rng.index(prior.size())];
    for (double& c : v) c += h * rng.normal();
    if (bounds != nullptr) clamp_flat(v, *bounds);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vec> noise_sample(std::span<const double> anchor, std::size_t n, double sigma,
                              Rng& rng, const ActionBounds* bounds) {
  if (!(sigma > 0.0)) throw ParameterError("noise sigma must be positive");
  if (n == 0) throw ParameterError("sample count must be >= 1");
  std::vector<Vec> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Vec v(anchor.begin(), anchor.end());
    for (double& c : v) c += sigma * rng.normal();
    if (bounds != nullptr) clamp_flat(v, *bounds);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::size_t> top_k_indices(const SamplePool& pool, std::size_t k) {
  if (k > pool.candidates.size()) {
    throw ParameterError("k exceeds the number of candidates");
  }
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(pool.candidates.size());
  for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
    keyed.emplace_back(squared_distance(pool.candidates[i], pool.anchor), i);
  }
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end());
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = keyed[i].second;
  return idx;
}

std::vector<Vec> top_k_near(const SamplePool& pool, std::size_t k) {
  std::vector<Vec> out;
  for (std::size_t i : top_k_indices(pool, k)) out.push_back(pool.candidates[i]);
  return out;
}

std::vector<int> visit_weights_from_log_density(std::span<const double> log_p, int total_budget) {
  const auto m = static_cast<int>(log_p.size());
  if (m == 0) throw ParameterError("visit weights need at least one action");
  if (total_budget < m) throw ParameterError("visit budget smaller than the action count");
  const double max_log = *std::max_element(log_p.begin(), log_p.end());
  std::vector<double> rel(log_p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    rel[i] = std::exp(log_p[i] - max_log);
    total += rel[i];
  }
  const double spare = static_cast<double>(total_budget - m);
  std::vector<int> weights(log_p.size());
  for (std::size_t i = 0; i < log_p.size(); ++i) {
    weights[i] = 1 + static_cast<int>(std::lround(spare * rel[i] / total));
  }
  return weights;
}

std::vector<int> visit_weights(const KdePrior& prior, const std::vector<Vec>& actions,
                               int total_budget) {
  if (actions.empty()) throw ParameterError("visit weights need at least one action");
  std::vector<double> log_p;
  log_p.reserve(actions.size());
  for (const auto& a : actions) log_p.push_back(prior.log_density(a));
  return visit_weights_from_log_density(log_p, total_budget);
}

}  // namespace reasoner
