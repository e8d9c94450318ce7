#include "wbrom/pod.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "wbrom/error.hpp"

namespace wbrom {

PodBasis compute_pod(const Eigen::MatrixXd& snapshots, double rank_tol) {
  if (snapshots.cols() == 0 || snapshots.rows() == 0)
    throw Error(ErrorKind::Domain, "POD of an empty snapshot set");
  const Eigen::MatrixXd gram = snapshots.transpose() * snapshots;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw Error(ErrorKind::Singular, "Gram eigen-decomposition failed");

  const Eigen::Index k = gram.rows();
  PodBasis basis;
  basis.singular_values.resize(k);
  // Eigen sorts ascending.
  for (Eigen::Index i = 0; i < k; ++i)
    basis.singular_values[i] = std::sqrt(std::max(0.0, eig.eigenvalues()[k - 1 - i]));

  const double sigma1 = basis.singular_values[0];
  Eigen::Index r = 0;
  while (r < k && sigma1 > 0.0 && basis.singular_values[r] > rank_tol * sigma1) ++r;

  basis.modes.resize(snapshots.rows(), r);
  for (Eigen::Index i = 0; i < r; ++i) {
    basis.modes.col(i) = snapshots * eig.eigenvectors().col(k - 1 - i) / basis.singular_values[i];
  }
  // Small singular values lose orthogonality in the method of snapshots;
  // two passes of modified Gram-Schmidt restore it without touching the
  // well-resolved leading modes.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < i; ++j)
        basis.modes.col(i) -= basis.modes.col(j).dot(basis.modes.col(i)) * basis.modes.col(j);
      basis.modes.col(i).normalize();
    }
  }
  // Singular values below sqrt(eps) * sigma_1 are not resolved by the Gram
  // eigenvalues. A Rayleigh-Ritz step on the orthonormal subspace recovers
  // them to working precision.
  if (r > 0) {
    const Eigen::MatrixXd reduced = basis.modes.transpose() * snapshots;  // r x K
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(reduced, Eigen::ComputeThinU);
    basis.modes = basis.modes * svd.matrixU();
    basis.singular_values.setZero();
    basis.singular_values.head(svd.singularValues().size()) = svd.singularValues();
    Eigen::Index kept = 0;
    const double top = basis.singular_values[0];
    while (kept < basis.modes.cols() && basis.singular_values[kept] > rank_tol * top) ++kept;
    basis.modes.conservativeResize(Eigen::NoChange, kept);
  }
  return basis;
}

Eigen::VectorXd pod_reconstruct(const PodBasis& basis, const Eigen::VectorXd& s, std::size_t n) {
  if (s.size() != basis.modes.rows()) throw Error(ErrorKind::SizeMismatch, "snapshot length differs from modes");
  if (n > static_cast<std::size_t>(basis.rank())) {
    std::ostringstream os;
    os << "requested " << n << " POD modes, only " << basis.rank() << " available";
    throw Error(ErrorKind::OutOfRange, os.str());
  }
  const auto psi = basis.modes.leftCols(static_cast<Eigen::Index>(n));
  return psi * (psi.transpose() * s);
}

PodErrorCurve pod_error_curve(const PodBasis& basis, const Eigen::MatrixXd& snapshots) {
  if (snapshots.rows() != basis.modes.rows()) throw Error(ErrorKind::SizeMismatch, "snapshot length differs from modes");
  const Eigen::Index k = snapshots.cols();
  const Eigen::Index r = basis.rank();
  const Eigen::MatrixXd coeff = basis.modes.transpose() * snapshots;  // r x K
  Eigen::VectorXd norms(k);
  for (Eigen::Index j = 0; j < k; ++j) norms[j] = snapshots.col(j).lpNorm<1>();

  PodErrorCurve curve;
  curve.mean.reserve(static_cast<std::size_t>(r));
  curve.max.reserve(static_cast<std::size_t>(r));
  Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(snapshots.rows(), k);
  for (Eigen::Index n = 0; n < r; ++n) {
    approx.noalias() += basis.modes.col(n) * coeff.row(n);
    double sum = 0.0;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double diff = (snapshots.col(j) - approx.col(j)).lpNorm<1>();
      const double rel = norms[j] > 0.0 ? diff / norms[j] : diff;
      sum += rel;
      worst = std::max(worst, rel);
    }
    curve.mean.push_back(sum / static_cast<double>(k));
    curve.max.push_back(worst);
  }
  return curve;
}

std::optional<std::size_t> modes_for_tolerance(const PodErrorCurve& curve, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::Domain, "tolerance must be positive");
  for (std::size_t n = 0; n < curve.mean.size(); ++n)
    if (curve.mean[n] < eps) return n + 1;
  return std::nullopt;
}

std::optional<std::size_t> modes_for_tolerance(const PodBasis& basis, const Eigen::MatrixXd& snapshots,
                                               double eps) {
  return modes_for_tolerance(pod_error_curve(basis, snapshots), eps);
}

}  // namespace wbrom
