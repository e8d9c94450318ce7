#pragma once

// Online reconstruction: multilinear interpolation of the offline optimal
// barycentric weights and masses over the training tensor grid, followed by
// simplex projection and inversion of the barycenter icdf.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "wbrom/greedy.hpp"
#include "wbrom/parameters.hpp"
#include "wbrom/simplex_weights.hpp"

namespace wbrom {

enum class Extrapolation { Error, Clamp };

/// Tensor-product grid over (t, y_1, ..., y_p); the last axis varies fastest
/// in flattened node order.
struct TensorGrid {
  std::vector<std::vector<double>> axes;

  std::size_t dimension() const { return axes.size(); }
  std::size_t node_count() const;
  std::vector<double> node(std::size_t flat) const;
  /// Flat index of an exact node; throws Error(NonTensorGrid) if absent.
  std::size_t flat_index(const std::vector<double>& coords) const;

  /// Sorted unique coordinates per axis of the given points.
  static TensorGrid from_points(const std::vector<std::vector<double>>& points);
};

struct ReducedModel {
  Dictionary dictionary;
  TensorGrid grid;
  Eigen::MatrixXd weight_table;  // n_atoms x nodes
  Eigen::VectorXd mass_table;    // nodes
  std::size_t n_cells = 0;       // length of reconstructed profiles

  std::size_t n_atoms() const { return dictionary.size(); }
};

/// Tabulates weights and masses on the tensor grid spanned by `params`.
/// Throws Error(NonTensorGrid) listing missing nodes when the points do not
/// cover the full grid exactly once.
ReducedModel fit(Dictionary dictionary, const std::vector<ParameterPoint>& params,
                 const std::vector<SimplexWeights>& weights, const std::vector<double>& masses,
                 std::size_t n_cells);

struct RawEvaluation {
  Eigen::VectorXd weights;  // interpolated, not yet projected
  double mass = 0.0;
};

RawEvaluation evaluate_raw(const ReducedModel& model, const ParameterPoint& z,
                           Extrapolation mode = Extrapolation::Error);

/// Profile with mass `mass` whose normalised icdf is the barycenter of the
/// atoms with the given weights. The two augmentation cells are dropped and
/// the remaining density rescaled, so the output has `n_cells` entries and
/// sum(out) / n_cells == mass.
Eigen::VectorXd reconstruct_profile(std::span<const DiscreteIcdf> atoms, const SimplexWeights& weights,
                                    double mass, std::size_t n_cells);

struct Reconstruction {
  ParameterPoint z;
  SimplexWeights weights;  // projected
  double mass = 0.0;       // clamped at zero
  Eigen::VectorXd values;
};

Reconstruction reconstruct(const ReducedModel& model, const ParameterPoint& z,
                           Extrapolation mode = Extrapolation::Error);

/// ||a - b||_1 / ||a||_1 (absolute error when a vanishes).
double relative_l1(const Eigen::VectorXd& truth, const Eigen::VectorXd& approx);

}  // namespace wbrom
