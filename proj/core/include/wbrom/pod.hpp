#pragma once

// Linear POD baseline. Modes are left singular vectors of the raw (not
// mean-centred) snapshot matrix, obtained by the method of snapshots.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace wbrom {

struct PodBasis {
  Eigen::MatrixXd modes;            // N x r, orthonormal columns
  Eigen::VectorXd singular_values;  // all K values, nonincreasing

  Eigen::Index rank() const { return modes.cols(); }
};

/// Modes with singular value below rank_tol * sigma_1 are discarded.
PodBasis compute_pod(const Eigen::MatrixXd& snapshots, double rank_tol = 1e-10);

/// Orthogonal projection of s onto the first n modes.
Eigen::VectorXd pod_reconstruct(const PodBasis& basis, const Eigen::VectorXd& s, std::size_t n);

/// Mean and max relative L1 error over the snapshot columns, for every mode
/// count n = 1 .. rank (entry n - 1).
struct PodErrorCurve {
  std::vector<double> mean;
  std::vector<double> max;
};
PodErrorCurve pod_error_curve(const PodBasis& basis, const Eigen::MatrixXd& snapshots);

/// Smallest n whose mean relative L1 training error is below eps; empty when
/// no available mode count reaches it.
std::optional<std::size_t> modes_for_tolerance(const PodBasis& basis, const Eigen::MatrixXd& snapshots,
                                               double eps);
std::optional<std::size_t> modes_for_tolerance(const PodErrorCurve& curve, double eps);

}  // namespace wbrom
