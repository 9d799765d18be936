#include "reasoner/reward.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reasoner/error.hpp"

namespace reasoner {

namespace {

using Matrix = std::vector<Vec>;

// Cholesky factor of a symmetric matrix; false when a pivot is not clearly
// positive relative to the largest diagonal entry.
bool cholesky(const Matrix& a, Matrix& l) {
  const std::size_t n = a.size();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i][i]));
  const double floor = 1e-12 * std::max(max_diag, 1e-300);
  l.assign(n, Vec(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j][j];
    for (std::size_t k = 0; k < j; ++k) diag -= l[j][k] * l[j][k];
    if (!(diag > floor)) return false;
    l[j][j] = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      l[i][j] = s / l[j][j];
    }
  }
  return true;
}

Vec cholesky_solve(const Matrix& l, const Vec& b) {
  const std::size_t n = l.size();
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k][i] * x[k];
    x[i] = s / l[i][i];
  }
  return x;
}

Vec with_bias(std::span<const double> features) {
  Vec row(features.begin(), features.end());
  row.push_back(1.0);
  return row;
}

Vec ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  Vec r(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double RewardModel::raw(std::span<const double> features) const {
  if (features.size() + 1 != weights.size()) {
    throw ShapeError("feature layout does not match the reward model");
  }
  double s = weights.back();
  for (std::size_t i = 0; i < features.size(); ++i) s += weights[i] * features[i];
  return s;
}

std::vector<Observation> downsample(const Trajectory& traj, std::size_t stride) {
  if (traj.frames.empty()) throw DataError("cannot downsample an empty trajectory");
  if (stride == 0) throw ParameterError("stride must be >= 1");
  std::vector<Observation> out;
  const std::size_t n = traj.frames.size();
  for (std::size_t i = 0; i < n; i += stride) out.push_back(traj.frames[i].obs);
  if ((n - 1) % stride != 0) out.push_back(traj.frames.back().obs);
  return out;
}

std::vector<LabeledFrame> label_progress(const std::vector<Observation>& frames) {
  if (frames.size() < 2) throw DataError("progress labels need at least 2 frames");
  const double last = static_cast<double>(frames.size() - 1);
  std::vector<LabeledFrame> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    out.push_back({render_features(frames[i]), static_cast<double>(i) / last});
  }
  return out;
}

RewardFit fit_reward(const std::vector<LabeledFrame>& data, double ridge_lambda,
                     const std::string& task_kind) {
  if (!(ridge_lambda >= 0.0)) throw ParameterError("ridge lambda must be nonnegative");
  if (data.empty()) throw DataError("reward fit needs labeled frames");
  const std::size_t d = data.front().features.size() + 1;
  if (data.size() < d) throw DataError("reward fit needs at least dim + 1 frames");
  for (const auto& f : data) {
    if (f.features.size() + 1 != d) throw ShapeError("labeled frames differ in feature length");
  }

  Matrix gram(d, Vec(d, 0.0));
  Vec rhs(d, 0.0);
  for (const auto& f : data) {
    const Vec x = with_bias(f.features);
    for (std::size_t i = 0; i < d; ++i) {
      rhs[i] += x[i] * f.label;
      for (std::size_t j = 0; j <= i; ++j) gram[i][j] += x[i] * x[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) gram[j][i] = gram[i][j];
  }

  RewardFit fit;
  double lambda = ridge_lambda;
  Matrix system;
  Matrix factor;
  auto build = [&](double lam) {
    system = gram;
    for (std::size_t i = 0; i < d; ++i) system[i][i] += lam;
    return cholesky(system, factor);
  };
  if (!build(lambda)) {
    if (lambda > 0.0) throw DataError("reward normal equations are not positive definite");
    lambda = kFallbackRidge;
    fit.ridge_fallback = true;
    if (!build(lambda)) throw DataError("reward normal equations are singular");
  }

  Vec psi = cholesky_solve(factor, rhs);
  // Two rounds of iterative refinement against the assembled system.
  for (int round = 0; round < 2; ++round) {
    Vec residual = rhs;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) residual[i] -= system[i][j] * psi[j];
    }
    const Vec correction = cholesky_solve(factor, residual);
    for (std::size_t i = 0; i < d; ++i) psi[i] += correction[i];
  }

  fit.model = RewardModel{task_kind, lambda, psi};
  double sse = 0.0;
  for (const auto& f : data) {
    const double e = fit.model.raw(f.features) - f.label;
    sse += e * e;
  }
  fit.train_mse = sse / static_cast<double>(data.size());
  return fit;
}

double predict_reward(const RewardModel& model, const Observation& obs) {
  return std::clamp(model.raw(render_features(obs)), 0.0, 1.0);
}

double nearest_frame_reward(const std::vector<LabeledFrame>& bank, const Observation& obs) {
  if (bank.empty()) throw DataError("nearest-frame reward needs a nonempty bank");
  const Vec f = render_features(obs);
  std::size_t best = 0;
  double best_d = squared_distance(bank[0].features, f);
  for (std::size_t i = 1; i < bank.size(); ++i) {
    const double d = squared_distance(bank[i].features, f);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return std::clamp(bank[best].label, 0.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman inputs differ in length");
  if (x.size() < 2) throw DataError("spearman needs at least 2 points");
  const Vec rx = ranks(x);
  const Vec ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

NearestFrameReward::NearestFrameReward(std::vector<LabeledFrame> bank) : bank_(std::move(bank)) {
  if (bank_.empty()) throw DataError("nearest-frame reward needs a nonempty bank");
}

}  // namespace reasoner
