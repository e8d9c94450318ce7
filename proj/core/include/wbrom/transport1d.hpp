#pragma once

// Exact one-dimensional optimal transport on a uniform grid of the reference
// domain [0, 1]. A nonnegative profile is turned into a probability density,
// its cdf, and a discrete inverse cdf (quantile function). In this
// representation W2 is an L2 distance and Wasserstein barycenters are convex
// combinations.

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "wbrom/simplex_weights.hpp"

namespace wbrom {

/// Normalised augmented profile (length N + 2). Entry 0 is the prepended
/// empty cell and entry 1 the prepended unit inflow cell.
struct AugmentedDensity {
  Eigen::VectorXd values;
  double mass_original = 0.0;  // m(s) of the raw snapshot
};

/// Nondecreasing values on the spatial points x_1 = x_min, ..., x_K = x_max.
struct DiscreteCdf {
  Eigen::VectorXd values;
};

/// Nondecreasing values on the probability points p_1 = 0, ..., p_M = 1.
struct DiscreteIcdf {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
};

/// Uniform grid of `count` points from a to b inclusive.
Eigen::VectorXd uniform_points(std::size_t count, double a = 0.0, double b = 1.0);

/// Prepend (0, 1) to a raw N-cell profile.
Eigen::VectorXd augment(const Eigen::VectorXd& raw);

/// Scale `aug` to unit sum. Throws Error(ZeroMass) on a zero vector and
/// Error(Domain) on negative entries.
AugmentedDensity normalize(const Eigen::VectorXd& aug, double mass_original = 0.0);

DiscreteCdf cdf(const AugmentedDensity& u);

/// Generalised inverse of a piecewise-linear cdf on M probability points.
/// Flat cdf segments resolve to their left end.
DiscreteIcdf icdf(const DiscreteCdf& c, std::size_t m, double x_min = 0.0, double x_max = 1.0);

/// Re-inverts an icdf back to a cdf on `n_out` spatial points.
DiscreteCdf invert_icdf(const DiscreteIcdf& ic, std::size_t n_out, double x_min = 0.0,
                        double x_max = 1.0);

/// Backward differences; the result sums to cdf.back().
Eigen::VectorXd pdf_from_cdf(const DiscreteCdf& c);

/// Rectangle-rule L2([0,1]) distance between two icdfs (weight 1/M per node).
double w2_distance(const DiscreteIcdf& a, const DiscreteIcdf& b);

/// Pointwise convex combination of atom icdfs.
DiscreteIcdf barycenter(std::span<const DiscreteIcdf> atoms, const SimplexWeights& w);

/// augment -> normalize -> cdf -> icdf with M = N + 2.
DiscreteIcdf snapshot_icdf(const Eigen::VectorXd& raw);

/// Discrete L2 error (rectangle rule) between two vectors of equal length.
double discrete_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace wbrom
