#pragma once

// Plot data for analysing the weight optimisation: energy landscapes over
// generalised barycentric coordinates and per-iteration conditioning and
// simplex-volume series.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wbrom/greedy.hpp"
#include "wbrom/simplex_weights.hpp"
#include "wbrom/transport1d.hpp"

namespace wbrom {

/// Vertices of the regular n-gon inscribed in the unit circle, vertex 0 at 90 degrees.
std::vector<Eigen::Vector2d> regular_polygon(std::size_t n);

/// Wachspress coordinates of x in the regular n-gon (n >= 3). Points on an
/// edge get linear weights on its two vertices. Throws Error(Domain) for
/// points outside the polygon.
SimplexWeights wachspress_weights(const Eigen::Vector2d& x, std::size_t n);

struct LandscapePoint {
  Eigen::Vector2d position;
  SimplexWeights weights;
  double log10_w2 = 0.0;
  std::size_t row = 0;  // raster indices
  std::size_t col = 0;
};

struct LandscapeGrid {
  std::size_t n = 0;
  std::size_t resolution = 0;
  std::vector<LandscapePoint> points;  // pixels inside the polygon, row-major

  /// log10 W2 per raster pixel; NaN outside the polygon.
  Eigen::MatrixXd raster() const;
  const LandscapePoint& minimum() const;
};

/// Rasterises [-1, 1]^2 with `resolution` pixel centres per axis and evaluates
/// log10 W2(target, barycenter(atoms, wachspress(x))) at pixels inside the polygon.
LandscapeGrid energy_landscape(std::span<const DiscreteIcdf> atoms, const DiscreteIcdf& target,
                               std::size_t resolution);

/// Number of 8-connected components of the pixels with value <= threshold.
std::size_t sublevel_components(const LandscapeGrid& grid, double threshold);

struct DiagnosticSeries {
  std::vector<std::size_t> n_atoms;
  std::vector<double> values;
};

DiagnosticSeries condition_curve(const GreedyReport& report);
DiagnosticSeries volume_curve(const GreedyReport& report);

/// Writes "n,<value_name>" CSV text.
std::string series_csv(const DiagnosticSeries& series, const std::string& value_name);

/// Writes "x,y,lambda_1..lambda_n,log10_W2" CSV text.
std::string landscape_csv(const LandscapeGrid& grid);

}  // namespace wbrom
