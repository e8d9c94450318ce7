#include "wbrom/transport1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wbrom/error.hpp"

namespace wbrom {

namespace {

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": size mismatch (" << a << " vs " << b << ")";
    throw Error(ErrorKind::SizeMismatch, os.str());
  }
}

// Shared inversion kernel. `knots` holds nondecreasing function values at the
// uniform abscissae `from`; for every level in `levels` it returns the
// linearly interpolated abscissa of the first knot i >= 1 with knots[i] >= level.
Eigen::VectorXd invert_piecewise_linear(const Eigen::VectorXd& from, const Eigen::VectorXd& knots,
                                        const Eigen::VectorXd& levels) {
  const Eigen::Index k = knots.size();
  Eigen::VectorXd out(levels.size());
  Eigen::Index i = 1;
  for (Eigen::Index j = 0; j < levels.size(); ++j) {
    const double level = levels[j];
    while (i < k - 1 && knots[i] < level) ++i;
    if (knots[i] < level) {
      // Level above the last knot (round-off in the final cdf entry).
      out[j] = from[k - 1];
      continue;
    }
    const double lo = knots[i - 1];
    const double hi = knots[i];
    if (hi == lo) {
      out[j] = from[i - 1];
    } else {
      const double frac = std::clamp((level - lo) / (hi - lo), 0.0, 1.0);
      out[j] = from[i - 1] + (from[i] - from[i - 1]) * frac;
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd uniform_points(std::size_t count, double a, double b) {
  if (count < 2) throw Error(ErrorKind::Domain, "a uniform grid needs at least two points");
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(count), a, b);
}

Eigen::VectorXd augment(const Eigen::VectorXd& raw) {
  Eigen::VectorXd out(raw.size() + 2);
  out[0] = 0.0;
  out[1] = 1.0;
  out.tail(raw.size()) = raw;
  return out;
}

AugmentedDensity normalize(const Eigen::VectorXd& aug, double mass_original) {
  if (aug.size() == 0 || aug.minCoeff() < 0.0)
    throw Error(ErrorKind::Domain, "density entries must be nonnegative");
  const double total = aug.sum();
  if (!(total > 0.0)) throw Error(ErrorKind::ZeroMass, "cannot normalise a zero-mass profile");
  return {aug / total, mass_original};
}

DiscreteCdf cdf(const AugmentedDensity& u) {
  DiscreteCdf c{Eigen::VectorXd(u.values.size())};
  double running = 0.0;
  for (Eigen::Index i = 0; i < u.values.size(); ++i) {
    running += u.values[i];
    c.values[i] = running;
  }
  return c;
}

DiscreteIcdf icdf(const DiscreteCdf& c, std::size_t m, double x_min, double x_max) {
  if (c.values.size() < 2) throw Error(ErrorKind::Domain, "cdf needs at least two points");
  const Eigen::VectorXd x = uniform_points(static_cast<std::size_t>(c.values.size()), x_min, x_max);
  const Eigen::VectorXd p = uniform_points(m);
  return {invert_piecewise_linear(x, c.values, p)};
}

DiscreteCdf invert_icdf(const DiscreteIcdf& ic, std::size_t n_out, double x_min, double x_max) {
  if (ic.values.size() < 2) throw Error(ErrorKind::Domain, "icdf needs at least two points");
  const Eigen::VectorXd p = uniform_points(static_cast<std::size_t>(ic.values.size()));
  const Eigen::VectorXd x = uniform_points(n_out, x_min, x_max);
  return {invert_piecewise_linear(p, ic.values, x)};
}

Eigen::VectorXd pdf_from_cdf(const DiscreteCdf& c) {
  const Eigen::Index n = c.values.size();
  Eigen::VectorXd u(n);
  if (n == 0) return u;
  u[0] = c.values[0];
  for (Eigen::Index i = 1; i < n; ++i) u[i] = c.values[i] - c.values[i - 1];
  return u;
}

double discrete_l2(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require_same_size(a.size(), b.size(), "discrete_l2");
  if (a.size() == 0) return 0.0;
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

double w2_distance(const DiscreteIcdf& a, const DiscreteIcdf& b) {
  require_same_size(a.values.size(), b.values.size(), "w2_distance");
  return discrete_l2(a.values, b.values);
}

DiscreteIcdf barycenter(std::span<const DiscreteIcdf> atoms, const SimplexWeights& w) {
  require_same_size(static_cast<Eigen::Index>(atoms.size()), w.size(), "barycenter");
  if (atoms.empty()) throw Error(ErrorKind::Domain, "barycenter of an empty family");
  DiscreteIcdf out{Eigen::VectorXd::Zero(atoms.front().size())};
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    require_same_size(atoms[i].size(), out.size(), "barycenter atom");
    out.values += w[static_cast<Eigen::Index>(i)] * atoms[i].values;
  }
  return out;
}

DiscreteIcdf snapshot_icdf(const Eigen::VectorXd& raw) {
  const auto u = normalize(augment(raw));
  return icdf(cdf(u), static_cast<std::size_t>(u.values.size()));
}

}  // namespace wbrom
