#include "wbrom/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "wbrom/csv.hpp"
#include "wbrom/error.hpp"

namespace wbrom {

namespace {

constexpr double kEdgeTol = 1e-13;

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

}  // namespace

std::vector<Eigen::Vector2d> regular_polygon(std::size_t n) {
  std::vector<Eigen::Vector2d> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 0.5 * std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    v[i] = {std::cos(angle), std::sin(angle)};
  }
  return v;
}

SimplexWeights wachspress_weights(const Eigen::Vector2d& x, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::Domain, "Wachspress coordinates need a polygon with at least 3 vertices");
  const auto v = regular_polygon(n);
  std::vector<double> area(n);  // area(x, v_i, v_{i+1})
  for (std::size_t i = 0; i < n; ++i) {
    area[i] = signed_area(x, v[i], v[(i + 1) % n]);
    if (area[i] < -kEdgeTol) {
      std::ostringstream os;
      os << "point (" << x.x() << ", " << x.y() << ") lies outside the regular " << n << "-gon";
      throw Error(ErrorKind::Domain, os.str());
    }
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (area[i] > kEdgeTol) continue;
    // On edge (i, i + 1): linear interpolation between the two vertices.
    const Eigen::Vector2d& a = v[i];
    const Eigen::Vector2d& b = v[(i + 1) % n];
    const double t = std::clamp((x - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    w[static_cast<Eigen::Index>(i)] = 1.0 - t;
    w[static_cast<Eigen::Index>((i + 1) % n)] += t;
    return {w};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const double corner = signed_area(v[prev], v[i], v[(i + 1) % n]);
    w[static_cast<Eigen::Index>(i)] = corner / (area[prev] * area[i]);
  }
  return {w / w.sum()};
}

Eigen::MatrixXd LandscapeGrid::raster() const {
  const auto res = static_cast<Eigen::Index>(resolution);
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(res, res, std::numeric_limits<double>::quiet_NaN());
  for (const auto& p : points) r(static_cast<Eigen::Index>(p.row), static_cast<Eigen::Index>(p.col)) = p.log10_w2;
  return r;
}

const LandscapePoint& LandscapeGrid::minimum() const {
  if (points.empty()) throw Error(ErrorKind::Domain, "empty landscape");
  return *std::min_element(points.begin(), points.end(),
                           [](const auto& a, const auto& b) { return a.log10_w2 < b.log10_w2; });
}

LandscapeGrid energy_landscape(std::span<const DiscreteIcdf> atoms, const DiscreteIcdf& target,
                               std::size_t resolution) {
  const std::size_t n = atoms.size();
  if (n < 3) throw Error(ErrorKind::Domain, "energy landscapes need at least three atoms");
  if (resolution < 2) throw Error(ErrorKind::Domain, "landscape resolution must be at least 2");
  const auto v = regular_polygon(n);
  LandscapeGrid grid;
  grid.n = n;
  grid.resolution = resolution;
  const double h = 2.0 / static_cast<double>(resolution);
  for (std::size_t row = 0; row < resolution; ++row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      const Eigen::Vector2d x{-1.0 + (static_cast<double>(col) + 0.5) * h, 1.0 - (static_cast<double>(row) + 0.5) * h};
      bool inside = true;
      for (std::size_t i = 0; i < n && inside; ++i) inside = signed_area(x, v[i], v[(i + 1) % n]) > kEdgeTol;
      if (!inside) continue;
      LandscapePoint p;
      p.position = x;
      p.weights = wachspress_weights(x, n);
      p.log10_w2 = std::log10(std::max(w2_distance(target, barycenter(atoms, p.weights)), 1e-300));
      p.row = row;
      p.col = col;
      grid.points.push_back(std::move(p));
    }
  }
  return grid;
}

std::size_t sublevel_components(const LandscapeGrid& grid, double threshold) {
  const Eigen::MatrixXd r = grid.raster();
  const Eigen::Index res = r.rows();
  Eigen::MatrixXi label = Eigen::MatrixXi::Zero(res, res);
  std::size_t components = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  const auto in_set = [&](Eigen::Index i, Eigen::Index j) {
    return i >= 0 && j >= 0 && i < res && j < res && !std::isnan(r(i, j)) && r(i, j) <= threshold;
  };
  for (Eigen::Index i = 0; i < res; ++i) {
    for (Eigen::Index j = 0; j < res; ++j) {
      if (!in_set(i, j) || label(i, j) != 0) continue;
      ++components;
      label(i, j) = static_cast<int>(components);
      stack.push_back({i, j});
      while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        for (Eigen::Index da = -1; da <= 1; ++da) {
          for (Eigen::Index db = -1; db <= 1; ++db) {
            if (in_set(a + da, b + db) && label(a + da, b + db) == 0) {
              label(a + da, b + db) = static_cast<int>(components);
              stack.push_back({a + da, b + db});
            }
          }
        }
      }
    }
  }
  return components;
}

DiagnosticSeries condition_curve(const GreedyReport& report) {
  if (report.n_atoms.empty()) throw Error(ErrorKind::Domain, "empty greedy report");
  return {report.n_atoms, report.condition};
}

DiagnosticSeries volume_curve(const GreedyReport& report) {
  if (report.n_atoms.empty()) throw Error(ErrorKind::Domain, "empty greedy report");
  return {report.n_atoms, report.simplex_volume};
}

std::string series_csv(const DiagnosticSeries& series, const std::string& value_name) {
  CsvWriter csv;
  csv.row({"n", value_name});
  for (std::size_t i = 0; i < series.values.size(); ++i)
    csv.row({format_number(static_cast<double>(series.n_atoms[i])), format_number(series.values[i])});
  return csv.str();
}

std::string landscape_csv(const LandscapeGrid& grid) {
  CsvWriter csv;
  std::vector<std::string> header{"x", "y"};
  for (std::size_t i = 1; i <= grid.n; ++i) header.push_back("lambda_" + std::to_string(i));
  header.push_back("log10_W2");
  csv.row(header);
  for (const auto& p : grid.points) {
    std::vector<std::string> row{format_number(p.position.x()), format_number(p.position.y())};
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) row.push_back(format_number(p.weights[i]));
    row.push_back(format_number(p.log10_w2));
    csv.row(row);
  }
  return csv.str();
}

}  // namespace wbrom
