#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wbrom/parameters.hpp"

namespace wbrom {

/// Saturation profile on the N-cell grid with its parameter point. The mass
/// is m(s) = sum_i s_i / N, the integral over the reference domain (0, 1).
struct Snapshot {
  ParameterPoint z;
  Eigen::VectorXd values;
  double mass = 0.0;

  static double mass_of(const Eigen::VectorXd& values) {
    return values.size() == 0 ? 0.0 : values.sum() / static_cast<double>(values.size());
  }
};

struct SnapshotSet {
  std::vector<std::string> parameter_names;  // names of the y components
  std::size_t n_cells = 0;
  std::vector<Snapshot> snapshots;

  std::size_t size() const { return snapshots.size(); }
  Eigen::MatrixXd matrix() const;  // N x K
  std::vector<ParameterPoint> params() const;
  std::vector<double> masses() const;
};

}  // namespace wbrom
