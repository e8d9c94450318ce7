#include "wbrom/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "wbrom/error.hpp"

namespace wbrom {

SimplexWeights project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw Error(ErrorKind::Domain, "cannot project an empty vector");
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  // rho = largest k with sorted[k] - (sum_{j<=k} sorted[j] - 1) / k > 0.
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return {(v.array() - tau).max(0.0).matrix()};
}

SimplexWeights init_weights(const Eigen::VectorXd& distances) {
  const Eigen::Index n = distances.size();
  if (n == 0) throw Error(ErrorKind::Domain, "no distances given");
  if (distances.minCoeff() < 0.0) throw Error(ErrorKind::Domain, "distances must be nonnegative");
  Eigen::VectorXd w(n);
  const auto zeros = (distances.array() == 0.0).count();
  if (zeros > 0) {
    w = (distances.array() == 0.0).cast<double>();
  } else {
    w = distances.array().inverse();
  }
  return {w / w.sum()};
}

QpProblem QpProblem::from(Eigen::MatrixXd atoms, Eigen::VectorXd target) {
  const double h = atoms.rows() > 0 ? 1.0 / static_cast<double>(atoms.rows()) : 0.0;
  return {std::move(atoms), std::move(target), h};
}

double power_iteration(const Eigen::MatrixXd& sym, std::size_t max_iter, double tol) {
  const Eigen::Index n = sym.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  double lambda = v.dot(sym * v);
  for (std::size_t it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = sym * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
    const double updated = v.dot(sym * v);
    const bool done = std::abs(updated - lambda) <= tol * std::abs(updated);
    lambda = updated;
    if (done) break;
  }
  return lambda;
}

SimplexLeastSquares::SimplexLeastSquares(Eigen::MatrixXd atoms, double quadrature_weight)
    : atoms_(std::move(atoms)), weight_(quadrature_weight) {
  if (atoms_.cols() == 0) throw Error(ErrorKind::Domain, "simplex least squares needs at least one atom");
  if (!(weight_ > 0.0)) throw Error(ErrorKind::Domain, "quadrature weight must be positive");
  gram_ = weight_ * (atoms_.transpose() * atoms_);
  // Power iteration approaches the top eigenvalue from below.
  lipschitz_ = power_iteration(gram_) * (1.0 + 1e-8);
}

double SimplexLeastSquares::objective(const Eigen::VectorXd& target, const Eigen::VectorXd& w) const {
  return weight_ * (atoms_ * w - target).squaredNorm();
}

Eigen::VectorXd SimplexLeastSquares::distances(const Eigen::VectorXd& target) const {
  return (std::sqrt(weight_) * (atoms_.colwise() - target).colwise().norm()).transpose();
}

namespace {

// Quadratic model q(w) = w^T G w - 2 b^T w + c of the weighted residual.
struct Quadratic {
  const Eigen::MatrixXd& g;
  Eigen::VectorXd b;
  double c;

  double value(const Eigen::VectorXd& w) const {
    return std::max(0.0, w.dot(g * w) - 2.0 * b.dot(w) + c);
  }
  Eigen::VectorXd half_gradient(const Eigen::VectorXd& w) const { return g * w - b; }
};

// Primal active-set refinement from a feasible point. Each round solves the
// equality-constrained problem on the current support; blocked steps drop an
// index, and negative multipliers release one. Returns true on a KKT point.
bool refine_active_set(const Quadratic& q, Eigen::VectorXd& x, double kkt_tol, std::size_t& rounds) {
  const Eigen::Index n = x.size();
  std::vector<bool> free(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) free[static_cast<std::size_t>(i)] = x[i] > 0.0;
  double fx = q.value(x);
  const std::size_t max_rounds = static_cast<std::size_t>(4 * n + 20);

  for (std::size_t round = 0; round < max_rounds; ++round, ++rounds) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (free[static_cast<std::size_t>(i)]) idx.push_back(i);
    const auto k = static_cast<Eigen::Index>(idx.size());
    if (k == 0) return false;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs(k + 1);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index c = 0; c < k; ++c) kkt(a, c) = q.g(idx[a], idx[c]);
      kkt(a, k) = 1.0;
      kkt(k, a) = 1.0;
      rhs[a] = q.b[idx[a]];
    }
    rhs[k] = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);

    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < k; ++a) d[idx[a]] = sol[a] - x[idx[a]];

    if (d.lpNorm<Eigen::Infinity>() <= 1e-14) {
      const Eigen::VectorXd grad = q.half_gradient(x);
      double common = 0.0;
      for (const auto i : idx) common += grad[i];
      common /= static_cast<double>(k);
      Eigen::Index release = -1;
      double worst = -kkt_tol;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (free[static_cast<std::size_t>(i)]) continue;
        const double slack = grad[i] - common;
        if (slack < worst) {
          worst = slack;
          release = i;
        }
      }
      if (release < 0) return true;
      free[static_cast<std::size_t>(release)] = true;
      continue;
    }

    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (const auto i : idx) {
      if (d[i] < 0.0) {
        const double ratio = -x[i] / d[i];
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
        }
      }
    }
    Eigen::VectorXd trial = x + alpha * d;
    if (blocking >= 0) {
      trial[blocking] = 0.0;
      free[static_cast<std::size_t>(blocking)] = false;
    }
    trial = trial.cwiseMax(0.0);
    trial /= trial.sum();
    const double ft = q.value(trial);
    if (ft > fx + 1e-15 * std::max(1.0, fx)) return false;  // ill-conditioned solve went uphill
    x = trial;
    fx = ft;
  }
  return false;
}

}  // namespace

QpResult SimplexLeastSquares::solve(const Eigen::VectorXd& target, const SimplexWeights& init,
                                    const QpSettings& settings) const {
  const Eigen::Index n = atoms_.cols();
  if (target.size() != atoms_.rows()) {
    std::ostringstream os;
    os << "target has " << target.size() << " entries, atoms have " << atoms_.rows();
    throw Error(ErrorKind::SizeMismatch, os.str());
  }
  if (init.size() != n) throw Error(ErrorKind::SizeMismatch, "initial weights do not match atom count");
  if (!(settings.tol > 0.0)) throw Error(ErrorKind::Domain, "solver tolerance must be positive");

  const Quadratic q{gram_, weight_ * (atoms_.transpose() * target), weight_ * target.squaredNorm()};

  QpResult result;
  if (n == 1) {
    result.weights = SimplexWeights::vertex(1, 0);
    result.objective = objective(target, result.weights.values);
    result.converged = true;
    if (settings.record_trace) result.trace.push_back(result.objective);
    return result;
  }

  Eigen::VectorXd x = project_to_simplex(init.values).values;
  double fx = q.value(x);
  if (settings.record_trace) result.trace.push_back(fx);

  bool converged = false;
  if (lipschitz_ <= 0.0) {
    converged = true;  // all atoms vanish: every point is optimal
  } else {
    const double step = 1.0 / lipschitz_;
    Eigen::VectorXd y = x;
    double t = 1.0;
    std::size_t it = 0;
    while (it < settings.max_iter) {
      ++it;
      const Eigen::VectorXd next = project_to_simplex(y - step * q.half_gradient(y)).values;
      const double fnext = q.value(next);
      if (fnext > fx) {
        if (t == 1.0) {
          converged = true;  // no descent left at round-off level
          break;
        }
        y = x;  // momentum overshoot: restart
        t = 1.0;
        continue;
      }
      const double decrease = fx - fnext;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next + ((t - 1.0) / t_next) * (next - x);
      x = next;
      fx = fnext;
      t = t_next;
      if (settings.record_trace) result.trace.push_back(fx);

      const Eigen::VectorXd pg =
          lipschitz_ * (x - project_to_simplex(x - step * q.half_gradient(x)).values);
      if (pg.norm() < settings.tol || decrease < settings.tol * std::max(1.0, fx)) {
        converged = true;
        break;
      }
    }
    result.iterations = it;
  }

  // Identify the optimal face exactly; accepted only if it does not go uphill.
  Eigen::VectorXd polished = x;
  std::size_t rounds = 0;
  const bool kkt = refine_active_set(q, polished, settings.tol, rounds);
  result.iterations += rounds;
  const double fp = q.value(polished);
  if (fp <= fx) {
    x = polished;
    if (settings.record_trace && fp < fx) result.trace.push_back(fp);
    fx = fp;
  }

  result.weights = {x};
  result.objective = objective(target, x);
  result.converged = converged || kkt;
  return result;
}

QpResult solve(const QpProblem& problem, const SimplexWeights& init, const QpSettings& settings) {
  if (problem.atoms_matrix.rows() != problem.target.size())
    throw Error(ErrorKind::SizeMismatch, "atom matrix and target differ in length");
  const SimplexLeastSquares solver(problem.atoms_matrix, problem.quadrature_weight);
  return solver.solve(problem.target, init, settings);
}

double gram_condition(const Eigen::MatrixXd& gram) {
  const Eigen::Index n = gram.rows();
  if (n == 0) throw Error(ErrorKind::Domain, "empty Gram matrix");
  if (n == 1) return 1.0;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double floor = std::max(1e-300, static_cast<double>(n) * std::numeric_limits<double>::epsilon() * hi);
  if (lo <= floor) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double atoms_condition(const Eigen::MatrixXd& atoms) {
  const Eigen::Index n = atoms.cols();
  if (n == 0 || atoms.rows() == 0) throw Error(ErrorKind::Domain, "empty atom matrix");
  if (n == 1) return 1.0;
  const Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(atoms);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double hi = sv[0];
  const double lo = sv[sv.size() - 1];
  const double floor = std::max(1e-300, static_cast<double>(std::max(atoms.rows(), n)) *
                                            std::numeric_limits<double>::epsilon() * hi);
  if (sv.size() < n || lo <= floor) return std::numeric_limits<double>::infinity();
  const double ratio = hi / lo;
  return ratio * ratio;
}

double gram_condition(const QpProblem& problem) { return atoms_condition(problem.atoms_matrix); }

}  // namespace wbrom
