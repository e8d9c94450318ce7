#pragma once

// Simplex-constrained least squares:
//
//   min_{w in simplex}  h * || A w - f ||^2
//
// where the columns of A are atom icdfs, f is a target icdf and h = 1/M is the
// rectangle-rule weight, so the optimal value equals the squared W2 distance
// between f and the best barycenter of the atoms.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "wbrom/simplex_weights.hpp"

namespace wbrom {

/// Euclidean projection onto the probability simplex (sort and threshold).
SimplexWeights project_to_simplex(const Eigen::VectorXd& v);

/// Start point inversely proportional to the atom-target distances. Atoms at
/// distance exactly zero share the whole mass.
SimplexWeights init_weights(const Eigen::VectorXd& distances);

struct QpProblem {
  Eigen::MatrixXd atoms_matrix;  // M x n, one atom per column
  Eigen::VectorXd target;        // M
  double quadrature_weight = 0.0;

  /// Builds a problem with the default weight 1/M.
  static QpProblem from(Eigen::MatrixXd atoms, Eigen::VectorXd target);
};

struct QpSettings {
  double tol = 1e-10;
  std::size_t max_iter = 50000;
  bool record_trace = false;
};

struct QpResult {
  SimplexWeights weights;
  double objective = 0.0;  // h * ||A w - f||^2, i.e. W2^2
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective of every accepted iterate, if requested
};

/// Accelerated projected gradient solver for a fixed atom matrix. The Gram
/// matrix and the Lipschitz constant are assembled once and reused for every
/// target.
class SimplexLeastSquares {
 public:
  SimplexLeastSquares(Eigen::MatrixXd atoms, double quadrature_weight);

  Eigen::Index n_atoms() const { return atoms_.cols(); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  double lipschitz() const { return lipschitz_; }

  QpResult solve(const Eigen::VectorXd& target, const SimplexWeights& init,
                 const QpSettings& settings = {}) const;

  /// h * ||A w - f||^2 evaluated directly from the atom columns.
  double objective(const Eigen::VectorXd& target, const Eigen::VectorXd& w) const;

  /// Atom-target distances sqrt(h) * ||a_i - f||.
  Eigen::VectorXd distances(const Eigen::VectorXd& target) const;

 private:
  Eigen::MatrixXd atoms_;
  double weight_;
  Eigen::MatrixXd gram_;  // h * A^T A
  double lipschitz_;
};

QpResult solve(const QpProblem& problem, const SimplexWeights& init,
               const QpSettings& settings = {});

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration.
double power_iteration(const Eigen::MatrixXd& sym, std::size_t max_iter = 500, double tol = 1e-13);

/// Condition number of the weighted Gram matrix; +inf when it is
/// numerically singular. The QpProblem overload goes through atoms_condition().
double gram_condition(const QpProblem& problem);
double gram_condition(const Eigen::MatrixXd& gram);

/// Condition number of A^T A computed as cond(A)^2 from the singular values
/// of the atom matrix, which stays accurate well past 1/eps.
double atoms_condition(const Eigen::MatrixXd& atoms);

}  // namespace wbrom
