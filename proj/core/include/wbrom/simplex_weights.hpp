#pragma once

#include <cmath>

#include <Eigen/Core>

namespace wbrom {

/// Point of the probability simplex: nonnegative entries summing to one.
struct SimplexWeights {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }

  /// True when every entry is >= -tol and the entries sum to 1 within tol.
  bool on_simplex(double tol = 1e-10) const {
    return values.size() > 0 && values.minCoeff() >= -tol &&
           std::abs(values.sum() - 1.0) <= tol;
  }

  static SimplexWeights vertex(Eigen::Index n, Eigen::Index i) {
    return {Eigen::VectorXd::Unit(n, i)};
  }
  static SimplexWeights uniform(Eigen::Index n) {
    return {Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))};
  }
};

}  // namespace wbrom
