#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reasoner/core.hpp"
#include "reasoner/rng.hpp"

namespace reasoner {

struct BandwidthRule {
  enum class Kind { scott, silverman, fixed };
  Kind kind = Kind::scott;
  double fixed_h = 0.0;  // used when kind == fixed

  static BandwidthRule scott() { return {Kind::scott, 0.0}; }
  static BandwidthRule silverman() { return {Kind::silverman, 0.0}; }
  static BandwidthRule fixed(double h) { return {Kind::fixed, h}; }

  std::string name() const;
  static BandwidthRule parse(const std::string& name, double fixed_h = 0.0);
};

/// Bandwidth used when a rule-based estimate degenerates to zero.
inline constexpr double kMinBandwidth = 1e-3;

/// Gaussian kernel density over demonstration actions (or flattened chunks).
/// Immutable after fitting.
class KdePrior {
public:
  KdePrior(std::vector<Vec> points, double bandwidth, BandwidthRule rule = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return points_.size(); }
  double bandwidth() const noexcept { return bandwidth_; }
  const BandwidthRule& rule() const noexcept { return rule_; }
  const std::vector<Vec>& points() const noexcept { return points_; }

  /// Set when a rule-based bandwidth collapsed and kMinBandwidth was used.
  bool bandwidth_fallback() const noexcept { return fallback_; }
  void mark_fallback() noexcept { fallback_ = true; }

  /// (1/N) sum_i K_h(a - a_i) with the isotropic Gaussian kernel.
  double density(std::span<const double> a) const;
  double log_density(std::span<const double> a) const;
  /// Kernel value at zero offset.
  double peak() const;

private:
  std::vector<Vec> points_;
  std::size_t dim_ = 0;
  double bandwidth_ = 0.0;
  BandwidthRule rule_;
  bool fallback_ = false;
};

KdePrior fit_kde(const std::vector<Vec>& actions, BandwidthRule rule = BandwidthRule::scott());

/// Support point chosen uniformly, plus N(0, h^2) per dimension. When
/// `bounds` is given the draws are clamped to valid actions.
std::vector<Vec> sample(const KdePrior& prior, std::size_t n, Rng& rng,
                        const ActionBounds* bounds = nullptr);

/// anchor + N(0, sigma^2) per dimension, optionally clamped.
std::vector<Vec> noise_sample(std::span<const double> anchor, std::size_t n, double sigma,
                              Rng& rng, const ActionBounds* bounds = nullptr);

struct SamplePool {
  Vec anchor;
  std::vector<Vec> candidates;
};

/// Indices of the k candidates nearest the anchor, ascending by distance with
/// ties broken by lower index.
std::vector<std::size_t> top_k_indices(const SamplePool& pool, std::size_t k);
std::vector<Vec> top_k_near(const SamplePool& pool, std::size_t k);

/// Integer soft visit counts: 1 + round((budget - m) * p_i / sum p).
std::vector<int> visit_weights_from_log_density(std::span<const double> log_p, int total_budget);
std::vector<int> visit_weights(const KdePrior& prior, const std::vector<Vec>& actions,
                               int total_budget);

}  // namespace reasoner
