#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "reasoner/core.hpp"
#include "reasoner/trajectory.hpp"
#include "reasoner/world.hpp"

namespace reasoner {

struct LabeledFrame {
  Vec features;
  double label = 0.0;  // task progress in [0, 1]
};

/// Linear reward head over render_features, bias last.
struct RewardModel {
  std::string task_kind;
  double ridge_lambda = 0.0;
  Vec weights;  // feature_length + 1

  double raw(std::span<const double> features) const;
  friend bool operator==(const RewardModel&, const RewardModel&) = default;
};

struct RewardFit {
  RewardModel model;
  double train_mse = 0.0;
  bool ridge_fallback = false;  // design was singular; solved with kFallbackRidge
};

inline constexpr double kFallbackRidge = 1e-6;

/// Frames 0, stride, 2*stride, ... and always the final frame.
std::vector<Observation> downsample(const Trajectory& traj, std::size_t stride);

/// Frame i of M gets label i / (M - 1).
std::vector<LabeledFrame> label_progress(const std::vector<Observation>& frames);

/// Ridge least squares on [features; 1] against the labels, solved through
/// the normal equations.
RewardFit fit_reward(const std::vector<LabeledFrame>& data, double ridge_lambda,
                     const std::string& task_kind = {});

/// psi . [render_features(obs); 1], clamped to [0, 1].
double predict_reward(const RewardModel& model, const Observation& obs);

/// Label of the bank frame nearest to obs in feature space (ties: lowest index).
double nearest_frame_reward(const std::vector<LabeledFrame>& bank, const Observation& obs);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Scalar state evaluator used by the search.
class RewardFunction {
public:
  virtual ~RewardFunction() = default;
  virtual double operator()(const Observation& obs) const = 0;
};

class LinearReward final : public RewardFunction {
public:
  explicit LinearReward(RewardModel model) : model_(std::move(model)) {}
  double operator()(const Observation& obs) const override { return predict_reward(model_, obs); }
  const RewardModel& model() const noexcept { return model_; }

private:
  RewardModel model_;
};

class NearestFrameReward final : public RewardFunction {
public:
  explicit NearestFrameReward(std::vector<LabeledFrame> bank);
  double operator()(const Observation& obs) const override {
    return nearest_frame_reward(bank_, obs);
  }

private:
  std::vector<LabeledFrame> bank_;
};

}  // namespace reasoner
