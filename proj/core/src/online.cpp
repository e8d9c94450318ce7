#include "wbrom/online.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wbrom/error.hpp"
#include "wbrom/simplex_qp.hpp"
#include "wbrom/transport1d.hpp"

namespace wbrom {

namespace {

bool same_coordinate(double a, double b) {
  return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

std::string format_point(const std::vector<double>& c) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  os << ")";
  return os.str();
}

}  // namespace

std::size_t TensorGrid::node_count() const {
  std::size_t count = 1;
  for (const auto& a : axes) count *= a.size();
  return count;
}

std::vector<double> TensorGrid::node(std::size_t flat) const {
  std::vector<double> c(axes.size());
  for (std::size_t d = axes.size(); d-- > 0;) {
    c[d] = axes[d][flat % axes[d].size()];
    flat /= axes[d].size();
  }
  return c;
}

std::size_t TensorGrid::flat_index(const std::vector<double>& coords) const {
  if (coords.size() != axes.size())
    throw Error(ErrorKind::SizeMismatch, "parameter dimension does not match the grid");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    const auto& a = axes[d];
    const auto it = std::find_if(a.begin(), a.end(), [&](double v) { return same_coordinate(v, coords[d]); });
    if (it == a.end())
      throw Error(ErrorKind::NonTensorGrid, "point " + format_point(coords) + " is not a grid node");
    flat = flat * a.size() + static_cast<std::size_t>(it - a.begin());
  }
  return flat;
}

TensorGrid TensorGrid::from_points(const std::vector<std::vector<double>>& points) {
  TensorGrid grid;
  if (points.empty()) return grid;
  const std::size_t dim = points.front().size();
  grid.axes.resize(dim);
  for (const auto& p : points) {
    if (p.size() != dim) throw Error(ErrorKind::SizeMismatch, "parameter points differ in dimension");
    for (std::size_t d = 0; d < dim; ++d) grid.axes[d].push_back(p[d]);
  }
  for (auto& a : grid.axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end(), same_coordinate), a.end());
  }
  return grid;
}

ReducedModel fit(Dictionary dictionary, const std::vector<ParameterPoint>& params,
                 const std::vector<SimplexWeights>& weights, const std::vector<double>& masses,
                 std::size_t n_cells) {
  if (params.empty()) throw Error(ErrorKind::Domain, "cannot fit a model without training points");
  if (weights.size() != params.size() || masses.size() != params.size())
    throw Error(ErrorKind::SizeMismatch, "weights, masses and parameters differ in count");
  const auto n = static_cast<Eigen::Index>(dictionary.size());

  std::vector<std::vector<double>> points;
  points.reserve(params.size());
  for (const auto& z : params) points.push_back(z.coordinates());

  ReducedModel model;
  model.grid = TensorGrid::from_points(points);
  model.n_cells = n_cells;
  const std::size_t nodes = model.grid.node_count();
  model.weight_table = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(nodes));
  model.mass_table = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes));
  std::vector<char> seen(nodes, 0);

  for (std::size_t k = 0; k < params.size(); ++k) {
    if (weights[k].size() != n) throw Error(ErrorKind::SizeMismatch, "weight vector length differs from atom count");
    if (masses[k] < 0.0) throw Error(ErrorKind::Domain, "masses must be nonnegative");
    const std::size_t flat = model.grid.flat_index(points[k]);
    if (seen[flat]) throw Error(ErrorKind::NonTensorGrid, "duplicate training point " + format_point(points[k]));
    seen[flat] = 1;
    model.weight_table.col(static_cast<Eigen::Index>(flat)) = weights[k].values;
    model.mass_table[static_cast<Eigen::Index>(flat)] = masses[k];
  }
  std::ostringstream missing;
  std::size_t n_missing = 0;
  for (std::size_t f = 0; f < nodes; ++f) {
    if (seen[f]) continue;
    if (n_missing < 10) missing << (n_missing ? ", " : "") << format_point(model.grid.node(f));
    ++n_missing;
  }
  if (n_missing > 0) {
    std::ostringstream os;
    os << "training points do not form a tensor grid; " << n_missing << " missing node(s): " << missing.str()
       << (n_missing > 10 ? ", ..." : "");
    throw Error(ErrorKind::NonTensorGrid, os.str());
  }
  model.dictionary = std::move(dictionary);
  return model;
}

RawEvaluation evaluate_raw(const ReducedModel& model, const ParameterPoint& z, Extrapolation mode) {
  const auto coords = z.coordinates();
  const auto& axes = model.grid.axes;
  if (coords.size() != axes.size())
    throw Error(ErrorKind::SizeMismatch, "parameter dimension does not match the model");

  // Per axis: lower node index and the weight of the upper node.
  const std::size_t dim = axes.size();
  std::vector<std::size_t> lower(dim);
  std::vector<double> frac(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const auto& a = axes[d];
    double c = coords[d];
    if (a.size() == 1) {
      lower[d] = 0;
      frac[d] = 0.0;
      continue;
    }
    const double lo = a.front();
    const double hi = a.back();
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (c < lo - slack || c > hi + slack) {
      if (mode == Extrapolation::Error) {
        std::ostringstream os;
        os << "coordinate " << d << " = " << c << " lies outside the training range [" << lo << ", " << hi << "]";
        throw Error(ErrorKind::OutOfRange, os.str());
      }
    }
    c = std::clamp(c, lo, hi);
    const auto it = std::upper_bound(a.begin(), a.end(), c);
    std::size_t i = it == a.begin() ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
    i = std::min(i, a.size() - 2);
    lower[d] = i;
    frac[d] = (c - a[i]) / (a[i + 1] - a[i]);
  }

  RawEvaluation out;
  out.weights = Eigen::VectorXd::Zero(model.weight_table.rows());
  const std::size_t corners = std::size_t{1} << dim;
  for (std::size_t corner = 0; corner < corners; ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dim; ++d) {
      const bool up = (corner >> d) & 1U;
      if (axes[d].size() == 1 && up) {
        w = 0.0;
        break;
      }
      w *= up ? frac[d] : 1.0 - frac[d];
      flat = flat * axes[d].size() + lower[d] + (up ? 1 : 0);
    }
    if (w == 0.0) continue;
    out.weights += w * model.weight_table.col(static_cast<Eigen::Index>(flat));
    out.mass += w * model.mass_table[static_cast<Eigen::Index>(flat)];
  }
  return out;
}

Eigen::VectorXd reconstruct_profile(std::span<const DiscreteIcdf> atoms, const SimplexWeights& weights,
                                    double mass, std::size_t n_cells) {
  const auto n = static_cast<Eigen::Index>(n_cells);
  if (!(mass > 0.0)) return Eigen::VectorXd::Zero(n);
  const DiscreteIcdf bary = barycenter(atoms, weights);
  const Eigen::VectorXd u = pdf_from_cdf(invert_icdf(bary, n_cells + 2));
  Eigen::VectorXd body = u.tail(n).cwiseMax(0.0);
  const double total = body.sum();
  if (!(total > 0.0)) return Eigen::VectorXd::Zero(n);
  return body * (mass * static_cast<double>(n_cells) / total);
}

Reconstruction reconstruct(const ReducedModel& model, const ParameterPoint& z, Extrapolation mode) {
  const RawEvaluation raw = evaluate_raw(model, z, mode);
  Reconstruction r;
  r.z = z;
  r.weights = project_to_simplex(raw.weights);
  r.mass = std::max(0.0, raw.mass);
  r.values = reconstruct_profile(model.dictionary.atoms, r.weights, r.mass, model.n_cells);
  return r;
}

double relative_l1(const Eigen::VectorXd& truth, const Eigen::VectorXd& approx) {
  if (truth.size() != approx.size()) throw Error(ErrorKind::SizeMismatch, "relative_l1: size mismatch");
  const double diff = (truth - approx).lpNorm<1>();
  const double norm = truth.lpNorm<1>();
  return norm > 0.0 ? diff / norm : diff;
}

}  // namespace wbrom
