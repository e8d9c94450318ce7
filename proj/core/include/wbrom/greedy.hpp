#pragma once

// Offline greedy selection of barycenter atoms from a training set of icdfs.
// Each iteration solves one simplex least-squares problem per training
// snapshot and adds the worst approximated snapshot to the dictionary.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wbrom/parameters.hpp"
#include "wbrom/simplex_qp.hpp"
#include "wbrom/transport1d.hpp"

namespace wbrom {

struct TrainingSet {
  Eigen::MatrixXd icdfs;               // M x K, one training icdf per column
  std::vector<ParameterPoint> params;  // K entries, or empty

  Eigen::Index size() const { return icdfs.cols(); }
  double quadrature_weight() const { return 1.0 / static_cast<double>(icdfs.rows()); }
  DiscreteIcdf icdf(Eigen::Index k) const { return {icdfs.col(k)}; }

  static TrainingSet from(std::span<const DiscreteIcdf> icdfs,
                          std::vector<ParameterPoint> params = {});
};

struct Dictionary {
  std::vector<std::size_t> indices;  // training indices, in selection order
  std::vector<DiscreteIcdf> atoms;
  std::vector<ParameterPoint> atom_params;
  Eigen::MatrixXd gram;  // h A^T A, kept in sync by add()

  std::size_t size() const { return atoms.size(); }
  Eigen::MatrixXd matrix() const;
  bool contains(std::size_t index) const;
  void add(std::size_t index, DiscreteIcdf atom, ParameterPoint z = {});
};

struct GreedySettings {
  double eps_abs = 0.0;
  std::optional<double> eps_rel;  // disabled when empty
  std::size_t n_max = 30;
  QpSettings qp;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

enum class Termination { Absolute, Relative, MaxAtoms, Exhausted };
std::string to_string(Termination t);

struct GreedyReport {
  std::vector<std::size_t> n_atoms;
  std::vector<double> delta;           // worst W2 error over the training set
  std::vector<double> avg_error;       // mean W2 error
  std::vector<double> condition;       // condition number of A^T A
  std::vector<double> simplex_volume;  // normalised Cayley-Menger volume
  std::vector<std::size_t> nonconverged;
  Termination termination = Termination::MaxAtoms;

  std::size_t iterations() const { return delta.size(); }
};

struct StepResult {
  std::optional<std::size_t> next;  // worst snapshot outside the dictionary
  double delta = 0.0;
  Eigen::VectorXd errors;               // W2 error per training snapshot
  std::vector<SimplexWeights> weights;  // optimal weights per training snapshot
  std::vector<std::size_t> nonconverged;
};

/// Pair of training indices at maximal L2 icdf distance; ties go to the
/// lexicographically smallest pair. Throws Error(TooFewSnapshots) for K < 2.
std::pair<std::size_t, std::size_t> init_pair(const TrainingSet& train);

/// Solves every training projection against the current dictionary. `warm`
/// (one entry per snapshot, sized to the dictionary) seeds the solver; an
/// unconverged warm start is retried from init_weights().
StepResult greedy_step(const Dictionary& dict, const TrainingSet& train,
                       const GreedySettings& settings,
                       const std::vector<SimplexWeights>* warm = nullptr);

using IterationCallback = std::function<void(const Dictionary&, const StepResult&)>;

struct GreedyResult {
  Dictionary dictionary;
  GreedyReport report;
  StepResult last;  // projections of the training set on the final dictionary
};

GreedyResult run_greedy(const TrainingSet& train, const GreedySettings& settings,
                        const IterationCallback& on_iteration = {});

/// Volume of the simplex spanned by the atoms (from the Cayley-Menger
/// determinant of squared W2 distances) divided by the volume of the regular
/// simplex of unit edge in the same dimension. Zero for degenerate simplices.
double cayley_menger_volume(std::span<const DiscreteIcdf> atoms);
double cayley_menger_volume(const Eigen::MatrixXd& squared_distances);

}  // namespace wbrom
