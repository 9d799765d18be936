#pragma once

#include <cmath>
#include <memory>

#include "reasoner/core.hpp"
#include "reasoner/rng.hpp"
#include "reasoner/world.hpp"

namespace testing {

inline reasoner::Action random_action(reasoner::Rng& rng, double limit = 0.05) {
  reasoner::Action a;
  for (double& d : a.delta) d = rng.uniform(-limit, limit);
  a.grip = rng.uniform();
  return a;
}

inline std::shared_ptr<const reasoner::TaskSpec> stack_task() {
  return std::make_shared<const reasoner::TaskSpec>(reasoner::TaskSpec::stack());
}

// Standard normal density.
inline double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Upper tail of the chi-square distribution via the Wilson-Hilferty cube-root
// approximation; accurate to a few parts in a thousand for dof >= 10.
inline double chi_square_upper(double stat, double dof) {
  const double v = 2.0 / (9.0 * dof);
  const double z = (std::cbrt(stat / dof) - (1.0 - v)) / std::sqrt(v);
  return 1.0 - normal_cdf(z);
}

}  // namespace testing
