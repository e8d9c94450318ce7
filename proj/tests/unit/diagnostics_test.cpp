#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "wbrom/diagnostics.hpp"
#include "wbrom/error.hpp"
#include "wbrom/simplex_qp.hpp"

namespace {

using namespace wbrom;

std::vector<DiscreteIcdf> synthetic_atoms() {
  const Eigen::VectorXd p = uniform_points(200);
  return {{0.3 * p}, {(0.2 + 0.5 * p.array().square()).matrix()}, {(0.6 + 0.4 * p.array().sqrt()).matrix()}};
}

TEST(Polygon, RegularVerticesOnUnitCircle) {
  const auto v = regular_polygon(5);
  ASSERT_EQ(v.size(), 5U);
  EXPECT_NEAR(v[0].x(), 0.0, 1e-15);
  EXPECT_NEAR(v[0].y(), 1.0, 1e-15);
  for (const auto& x : v) EXPECT_NEAR(x.norm(), 1.0, 1e-15);
  // Counter-clockwise: vertex 1 is to the upper left.
  EXPECT_LT(v[1].x(), 0.0);
}

TEST(Wachspress, CentroidIsUniform) {
  for (std::size_t n = 3; n <= 9; ++n) {
    const SimplexWeights w = wachspress_weights(Eigen::Vector2d::Zero(), n);
    for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], 1.0 / static_cast<double>(n), 1e-14);
  }
}

TEST(Wachspress, EdgeMidpoint) {
  const auto v = regular_polygon(4);
  const SimplexWeights w = wachspress_weights(0.5 * (v[0] + v[1]), 4);
  EXPECT_NEAR(w[0], 0.5, 1e-12);
  EXPECT_NEAR(w[1], 0.5, 1e-12);
  EXPECT_EQ(w[2], 0.0);
  EXPECT_EQ(w[3], 0.0);
}

TEST(Wachspress, VerticesAreUnitVectors) {
  const auto v = regular_polygon(6);
  for (std::size_t i = 0; i < 6; ++i) {
    const SimplexWeights w = wachspress_weights(v[i], 6);
    EXPECT_LE((w.values - Eigen::VectorXd::Unit(6, static_cast<Eigen::Index>(i))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Wachspress, TriangleMatchesAreaRatios) {
  const auto v = regular_polygon(3);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 200; ++k) {
    const Eigen::Vector3d lam = wbrom::testing::random_simplex_point(rng, 3);
    const Eigen::Vector2d x = lam[0] * v[0] + lam[1] * v[1] + lam[2] * v[2];
    const Eigen::Vector3d expected = wbrom::testing::triangle_barycentric(x, v[0], v[1], v[2]);
    EXPECT_LE((wachspress_weights(x, 3).values - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Wachspress, OutsidePointIsRejected) {
  try {
    wachspress_weights({0.0, 1.5}, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
  EXPECT_THROW(wachspress_weights({0.0, 0.0}, 2), Error);
}

TEST(Landscape, TargetAtomPutsMinimumAtItsVertex) {
  const auto atoms = synthetic_atoms();
  const auto v = regular_polygon(3);
  for (std::size_t i = 0; i < 3; ++i) {
    const LandscapeGrid g = energy_landscape(atoms, atoms[i], 101);
    const Eigen::Vector2d x = g.minimum().position;
    std::size_t nearest = 0;
    for (std::size_t j = 1; j < 3; ++j)
      if ((x - v[j]).norm() < (x - v[nearest]).norm()) nearest = j;
    EXPECT_EQ(nearest, i);
    EXPECT_LT((x - v[i]).norm(), 0.1);
  }
}

TEST(Landscape, GridMinimumMatchesQpSolution) {
  const auto atoms = synthetic_atoms();
  const Eigen::VectorXd p = uniform_points(200);
  // A target close to, but not on, the barycenter family.
  const DiscreteIcdf target{(0.25 + 0.35 * p.array() + 0.05 * p.array().cube()).matrix()};
  Eigen::MatrixXd a(200, 3);
  for (Eigen::Index i = 0; i < 3; ++i) a.col(i) = atoms[static_cast<std::size_t>(i)].values;
  const QpResult qp = solve(QpProblem::from(a, target.values), SimplexWeights::uniform(3));
  const auto oracle = wbrom::testing::exhaustive_simplex_ls(a, target.values, 1.0 / 200.0);
  ASSERT_NEAR(qp.objective, oracle.objective, 1e-10);

  const std::size_t res = 201;
  const LandscapeGrid g = energy_landscape(atoms, target, res);
  const auto v = regular_polygon(3);
  const Eigen::Vector2d best = qp.weights[0] * v[0] + qp.weights[1] * v[1] + qp.weights[2] * v[2];
  const double h = 2.0 / static_cast<double>(res);
  EXPECT_LE((g.minimum().position - best).norm(), std::sqrt(2.0) * h);
  const double floor = std::log10(std::sqrt(qp.objective));
  for (const auto& pt : g.points) ASSERT_GE(pt.log10_w2, floor - 1e-9);
  // Convex objective: every sublevel set is a single component.
  const double lo = g.minimum().log10_w2;
  for (const double step : {0.05, 0.2, 0.5, 1.0}) EXPECT_EQ(sublevel_components(g, lo + step), 1U);
}

TEST(Landscape, RasterLayout) {
  const auto atoms = synthetic_atoms();
  const LandscapeGrid g = energy_landscape(atoms, atoms[0], 21);
  const Eigen::MatrixXd r = g.raster();
  EXPECT_EQ(r.rows(), 21);
  EXPECT_TRUE(std::isnan(r(0, 0)));  // corner lies outside the triangle
  for (const auto& p : g.points) EXPECT_TRUE(p.weights.on_simplex());
  const std::string csv = landscape_csv(g);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,y,lambda_1,lambda_2,lambda_3,log10_W2");
  EXPECT_THROW(energy_landscape(std::span(atoms).first(2), atoms[0], 21), Error);
}

TEST(Components, CountsSeparatedBasins) {
  LandscapeGrid g;
  g.n = 3;
  g.resolution = 5;
  // Two low pixels far apart in a 5 x 5 raster.
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 5; ++c) {
      LandscapePoint p;
      p.row = r;
      p.col = c;
      p.log10_w2 = ((r == 0 && c == 0) || (r == 4 && c == 4)) ? -3.0 : 0.0;
      g.points.push_back(p);
    }
  EXPECT_EQ(sublevel_components(g, -1.0), 2U);
  EXPECT_EQ(sublevel_components(g, 0.0), 1U);
  EXPECT_EQ(sublevel_components(g, -5.0), 0U);
}

TEST(Series, CurvesFollowReport) {
  GreedyReport rep;
  rep.n_atoms = {2, 3, 4};
  rep.condition = {1.0, 10.0, 1000.0};
  rep.simplex_volume = {0.5, 0.1, 0.01};
  const DiagnosticSeries c = condition_curve(rep);
  EXPECT_EQ(c.n_atoms, rep.n_atoms);
  EXPECT_EQ(c.values, rep.condition);
  EXPECT_EQ(volume_curve(rep).values, rep.simplex_volume);
  EXPECT_EQ(series_csv(c, "condition"), "n,condition\n2,1\n3,10\n4,1000\n");
}

}  // namespace
