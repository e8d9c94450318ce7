#include "wbrom/greedy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wbrom/error.hpp"
#include "wbrom/parallel.hpp"

namespace wbrom {

TrainingSet TrainingSet::from(std::span<const DiscreteIcdf> icdfs, std::vector<ParameterPoint> params) {
  TrainingSet set;
  if (icdfs.empty()) return set;
  const Eigen::Index m = icdfs.front().size();
  set.icdfs.resize(m, static_cast<Eigen::Index>(icdfs.size()));
  for (std::size_t k = 0; k < icdfs.size(); ++k) {
    if (icdfs[k].size() != m) throw Error(ErrorKind::SizeMismatch, "training icdfs differ in length");
    set.icdfs.col(static_cast<Eigen::Index>(k)) = icdfs[k].values;
  }
  if (!params.empty() && params.size() != icdfs.size())
    throw Error(ErrorKind::SizeMismatch, "parameter list does not match the training set");
  set.params = std::move(params);
  return set;
}

Eigen::MatrixXd Dictionary::matrix() const {
  if (atoms.empty()) return {};
  Eigen::MatrixXd a(atoms.front().size(), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = atoms[i].values;
  return a;
}

bool Dictionary::contains(std::size_t index) const {
  return std::find(indices.begin(), indices.end(), index) != indices.end();
}

void Dictionary::add(std::size_t index, DiscreteIcdf atom, ParameterPoint z) {
  if (!atoms.empty() && atom.size() != atoms.front().size())
    throw Error(ErrorKind::SizeMismatch, "atom length differs from the dictionary");
  if (contains(index)) throw Error(ErrorKind::Domain, "snapshot is already a dictionary atom");
  const auto n = static_cast<Eigen::Index>(atoms.size());
  const double h = 1.0 / static_cast<double>(atom.size());
  Eigen::MatrixXd grown(n + 1, n + 1);
  grown.topLeftCorner(n, n) = gram;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = h * atoms[static_cast<std::size_t>(i)].values.dot(atom.values);
    grown(i, n) = g;
    grown(n, i) = g;
  }
  grown(n, n) = h * atom.values.squaredNorm();
  gram = std::move(grown);
  indices.push_back(index);
  atoms.push_back(std::move(atom));
  atom_params.push_back(std::move(z));
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Absolute: return "absolute";
    case Termination::Relative: return "relative";
    case Termination::MaxAtoms: return "max_atoms";
    case Termination::Exhausted: return "exhausted";
  }
  return "unknown";
}

std::pair<std::size_t, std::size_t> init_pair(const TrainingSet& train) {
  const Eigen::Index k = train.size();
  if (k < 2) throw Error(ErrorKind::TooFewSnapshots, "the greedy algorithm needs at least two snapshots");
  double best = -1.0;
  std::pair<std::size_t, std::size_t> pair{0, 1};
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double d = (train.icdfs.col(i) - train.icdfs.col(j)).squaredNorm();
      if (d > best) {
        best = d;
        pair = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
      }
    }
  }
  return pair;
}

StepResult greedy_step(const Dictionary& dict, const TrainingSet& train, const GreedySettings& settings,
                       const std::vector<SimplexWeights>* warm) {
  if (dict.size() < 2) throw Error(ErrorKind::Domain, "greedy step needs at least two atoms");
  const Eigen::Index k = train.size();
  if (warm && static_cast<Eigen::Index>(warm->size()) != k)
    throw Error(ErrorKind::SizeMismatch, "warm start list does not match the training set");

  const SimplexLeastSquares solver(dict.matrix(), train.quadrature_weight());
  StepResult step;
  step.errors.resize(k);
  step.weights.resize(static_cast<std::size_t>(k));
  std::vector<char> failed(static_cast<std::size_t>(k), 0);

  parallel_for(static_cast<std::size_t>(k), settings.threads, [&](std::size_t s) {
    const Eigen::VectorXd target = train.icdfs.col(static_cast<Eigen::Index>(s));
    QpResult res;
    const bool have_warm = warm && (*warm)[s].size() == solver.n_atoms();
    if (have_warm) res = solver.solve(target, (*warm)[s], settings.qp);
    if (!have_warm || !res.converged) {
      QpResult fresh = solver.solve(target, init_weights(solver.distances(target)), settings.qp);
      if (!have_warm || fresh.objective < res.objective || (fresh.converged && !res.converged &&
                                                           fresh.objective <= res.objective))
        res = std::move(fresh);
    }
    step.errors[static_cast<Eigen::Index>(s)] = std::sqrt(res.objective);
    step.weights[s] = std::move(res.weights);
    failed[s] = res.converged ? 0 : 1;
  });

  for (Eigen::Index s = 0; s < k; ++s) {
    if (failed[static_cast<std::size_t>(s)]) step.nonconverged.push_back(static_cast<std::size_t>(s));
  }
  step.delta = step.errors.maxCoeff();
  double worst = -1.0;
  for (Eigen::Index s = 0; s < k; ++s) {
    const auto idx = static_cast<std::size_t>(s);
    if (dict.contains(idx)) continue;
    if (step.errors[s] > worst) {
      worst = step.errors[s];
      step.next = idx;
    }
  }
  return step;
}

GreedyResult run_greedy(const TrainingSet& train, const GreedySettings& settings,
                        const IterationCallback& on_iteration) {
  if (settings.eps_abs < 0.0) throw Error(ErrorKind::Domain, "eps_abs must be nonnegative");
  if (settings.eps_rel && !(*settings.eps_rel >= 0.0 && *settings.eps_rel < 1.0))
    throw Error(ErrorKind::Domain, "eps_rel must lie in [0, 1)");
  if (settings.n_max < 2) throw Error(ErrorKind::Domain, "n_max must be at least 2");

  const auto param_of = [&](std::size_t i) {
    return train.params.empty() ? ParameterPoint{} : train.params[i];
  };

  GreedyResult out;
  auto& dict = out.dictionary;
  auto& report = out.report;
  const auto [first, second] = init_pair(train);
  dict.add(first, train.icdf(static_cast<Eigen::Index>(first)), param_of(first));
  dict.add(second, train.icdf(static_cast<Eigen::Index>(second)), param_of(second));

  std::vector<SimplexWeights> warm;
  while (true) {
    StepResult step = greedy_step(dict, train, settings, warm.empty() ? nullptr : &warm);
    report.n_atoms.push_back(dict.size());
    report.delta.push_back(step.delta);
    report.avg_error.push_back(step.errors.mean());
    report.condition.push_back(atoms_condition(dict.matrix()));
    report.simplex_volume.push_back(cayley_menger_volume(dict.atoms));
    report.nonconverged.push_back(step.nonconverged.size());
    if (on_iteration) on_iteration(dict, step);

    const std::size_t it = report.delta.size();
    bool stop = true;
    if (step.delta < settings.eps_abs) {
      report.termination = Termination::Absolute;
    } else if (settings.eps_rel && it >= 2 &&
               report.delta[it - 2] - step.delta < *settings.eps_rel * report.delta[it - 2]) {
      report.termination = Termination::Relative;
    } else if (dict.size() >= settings.n_max) {
      report.termination = Termination::MaxAtoms;
    } else if (!step.next) {
      report.termination = Termination::Exhausted;
    } else {
      stop = false;
    }
    if (stop) {
      out.last = std::move(step);
      break;
    }

    const auto n = static_cast<Eigen::Index>(dict.size());
    warm.resize(step.weights.size());
    for (std::size_t s = 0; s < step.weights.size(); ++s) {
      warm[s].values = Eigen::VectorXd::Zero(n + 1);
      warm[s].values.head(n) = step.weights[s].values;
    }
    const std::size_t next = *step.next;
    dict.add(next, train.icdf(static_cast<Eigen::Index>(next)), param_of(next));
  }
  return out;
}

double cayley_menger_volume(const Eigen::MatrixXd& d2) {
  const Eigen::Index n = d2.rows();
  if (n < 2 || d2.cols() != n) throw Error(ErrorKind::Domain, "Cayley-Menger volume needs at least two points");
  const Eigen::Index size = n + 1;
  std::vector<long double> m(static_cast<std::size_t>(size * size));
  auto at = [&](Eigen::Index r, Eigen::Index c) -> long double& {
    return m[static_cast<std::size_t>(r * size + c)];
  };
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      if (r == 0 && c == 0) at(r, c) = 0.0L;
      else if (r == 0 || c == 0) at(r, c) = 1.0L;
      else at(r, c) = static_cast<long double>(d2(r - 1, c - 1));
    }
  }
  // Gaussian elimination with partial pivoting in extended precision.
  long double det = 1.0L;
  for (Eigen::Index col = 0; col < size; ++col) {
    Eigen::Index piv = col;
    for (Eigen::Index r = col + 1; r < size; ++r)
      if (std::fabs(at(r, col)) > std::fabs(at(piv, col))) piv = r;
    if (at(piv, col) == 0.0L) return 0.0;
    if (piv != col) {
      for (Eigen::Index c = 0; c < size; ++c) std::swap(at(piv, c), at(col, c));
      det = -det;
    }
    det *= at(col, col);
    for (Eigen::Index r = col + 1; r < size; ++r) {
      const long double f = at(r, col) / at(col, col);
      for (Eigen::Index c = col; c < size; ++c) at(r, c) -= f * at(col, c);
    }
  }
  // (-1)^(k+1) det / (k + 1) is the squared volume ratio for dimension k = n - 1.
  const Eigen::Index k = n - 1;
  const long double ratio2 = ((k + 1) % 2 == 0 ? det : -det) / static_cast<long double>(k + 1);
  if (!(ratio2 > 0.0L)) return 0.0;
  return static_cast<double>(std::sqrt(ratio2));
}

double cayley_menger_volume(std::span<const DiscreteIcdf> atoms) {
  const auto n = static_cast<Eigen::Index>(atoms.size());
  if (n < 2) return n == 1 ? 1.0 : 0.0;
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double w = w2_distance(atoms[static_cast<std::size_t>(i)], atoms[static_cast<std::size_t>(j)]);
      d2(i, j) = d2(j, i) = w * w;
    }
  }
  return cayley_menger_volume(d2);
}

}  // namespace wbrom
