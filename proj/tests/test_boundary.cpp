#include "mfq/boundary.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <set>

using namespace mfq;

namespace {

Vec3 on_circle(double r, double t) { return {r * std::cos(t), r * std::sin(t), 0.0}; }

} // namespace

TEST(FitTrio, ExactOnArcPolynomials) {
  const double r = 0.7;
  const std::array<double, 3> t{-0.13, 0.02, 0.21};
  const TrioFit fit = fit_trio(on_circle(r, t[0]), on_circle(r, t[1]), on_circle(r, t[2]));
  EXPECT_FALSE(fit.line);
  EXPECT_NEAR(fit.radius, r, 1e-12);
  // Angles are measured from the middle node.
  for (int k = 0; k < 3; ++k) {
    double q = 0.0;
    for (int i = 0; i < 3; ++i) q += fit.weights[i] * std::pow(t[i] - t[1], k);
    const double lo = t[0] - t[1], hi = t[2] - t[1];
    const double exact = r * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
    EXPECT_NEAR(q, exact, 1e-12) << "degree " << k;
  }
  EXPECT_NEAR(fit.weights[0] + fit.weights[1] + fit.weights[2], r * (t[2] - t[0]), 1e-12);
}

TEST(FitTrio, CircleInTiltedPlane) {
  const Mat3 R = Eigen::AngleAxisd(0.8, Vec3(1, 2, -1).normalized()).toRotationMatrix();
  const Vec3 c(0.3, -1.0, 2.0);
  const TrioFit fit =
      fit_trio(c + R * on_circle(2.0, 1.0), c + R * on_circle(2.0, 1.1), c + R * on_circle(2.0, 1.25));
  EXPECT_NEAR(fit.radius, 2.0, 1e-10);
  EXPECT_NEAR(fit.weights[0] + fit.weights[1] + fit.weights[2], 2.0 * 0.25, 1e-12);
}

TEST(FitTrio, CollinearUsesLine) {
  const TrioFit fit = fit_trio(Vec3(0, 0, 0), Vec3(0.4, 0.4, 0), Vec3(1, 1, 0));
  EXPECT_TRUE(fit.line);
  const double len = std::sqrt(2.0);
  EXPECT_NEAR(fit.weights[0] + fit.weights[1] + fit.weights[2], len, 1e-12);
  // Linear moment about the middle node.
  const double m = fit.weights[0] * fit.params[0] + fit.weights[2] * fit.params[2];
  EXPECT_NEAR(m, (std::pow(len - 0.4 * len, 2) - std::pow(0.4 * len, 2)) / 2, 1e-12);
}

TEST(FitTrio, SameSideRejected) {
  EXPECT_THROW(fit_trio(on_circle(1, 0.1), on_circle(1, 0.0), on_circle(1, 0.2)), ComponentError);
  EXPECT_THROW(fit_trio(Vec3::Zero(), Vec3::Zero(), Vec3::UnitX()), ComponentError);
}

TEST(TrioWeights, CircumferenceFromScatteredNodes) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  BoundaryQuadrature q;
  const int n = 200;
  for (int k = 0; k < n; ++k) q.nodes.push_back(on_circle(1.0, 2 * std::numbers::pi * (k + u(rng)) / n));
  std::shuffle(q.nodes.begin(), q.nodes.end(), rng);
  trio_weights(q);
  EXPECT_NEAR(q.total_weight(), 2 * std::numbers::pi, 1e-4);
  // Third order: cos^2 integrates to pi.
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i].x(), 2);
  EXPECT_NEAR(s, std::numbers::pi, 1e-4);
  EXPECT_EQ(std::set<int>(q.piece_ids.begin(), q.piece_ids.end()).size(), 1u);
  EXPECT_TRUE(q.warnings.empty());
}

TEST(TrioWeights, ConvergesThirdOrder) {
  double prev = 0.0;
  for (int n : {50, 100, 200}) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    BoundaryQuadrature q;
    for (int k = 0; k < n; ++k) q.nodes.push_back(on_circle(1.0, 2 * std::numbers::pi * (k + u(rng)) / n));
    trio_weights(q);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::exp(q.nodes[i].x());
    const double err = std::abs(s - 2 * std::numbers::pi * std::cyl_bessel_i(0.0, 1.0));
    if (prev > 0) EXPECT_LT(err, prev / 4) << n;
    prev = err;
  }
}

TEST(TrioWeights, TwoCirclesAreTwoPieces) {
  BoundaryQuadrature q;
  for (int k = 0; k < 60; ++k) q.nodes.push_back(on_circle(1.0, 2 * std::numbers::pi * k / 60));
  for (int k = 0; k < 40; ++k) q.nodes.push_back(Vec3(5, 0, 0) + on_circle(0.5, 2 * std::numbers::pi * k / 40));
  trio_weights(q);
  EXPECT_EQ(std::set<int>(q.piece_ids.begin(), q.piece_ids.end()).size(), 2u);
  EXPECT_NEAR(q.total_weight(), 3 * std::numbers::pi, 1e-5);
}

TEST(TrioWeights, TooFewNodes) {
  BoundaryQuadrature q;
  q.nodes = {Vec3::Zero(), Vec3::UnitX()};
  EXPECT_THROW(trio_weights(q), ComponentError);
}

TEST(TrioWeights, CrowdingWarning) {
  BoundaryQuadrature q;
  for (int k = 0; k < 8; ++k) q.nodes.push_back(on_circle(1.0, 2 * std::numbers::pi * k / 8));
  trio_weights(q);
  EXPECT_FALSE(q.warnings.empty());
}

TEST(PlanarSplit, SphereEquator) {
  const LevelSetSurface s = surfaces::sphere();
  const BoundaryQuadrature q = planar_split_boundary(s, Vec3::UnitZ(), 0.0, 200, 3);
  ASSERT_EQ(q.size(), 200u);
  EXPECT_NEAR(q.total_weight(), 2 * std::numbers::pi, 1e-4);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_LE(std::abs(s.value(q.nodes[i])), 1e-10);
    EXPECT_LE(std::abs(q.nodes[i].z()), 1e-12);
    EXPECT_NEAR(q.conormals[i].norm(), 1.0, 1e-12);
    EXPECT_LE(std::abs(q.conormals[i].dot(q.normals[i])), 1e-12);
    // Out of the upper hemisphere: downward.
    EXPECT_NEAR(q.conormals[i].z(), -1.0, 1e-10);
  }
  const BoundaryQuadrature f = q.flipped();
  EXPECT_NEAR(f.conormals[0].z(), 1.0, 1e-10);
  EXPECT_EQ(f.weights, q.weights);
}

TEST(PlanarSplit, GenusTwoHasSeveralLoops) {
  const LevelSetSurface s = surfaces::genus_two();
  const BoundaryQuadrature q = planar_split_boundary(s, Vec3::UnitZ(), 0.0, 600, 1);
  const std::set<int> pieces(q.piece_ids.begin(), q.piece_ids.end());
  EXPECT_GE(pieces.size(), 3u);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_LE(std::abs(s.value(q.nodes[i])), 1e-10);
    EXPECT_LE(std::abs(q.nodes[i].z()), 1e-12);
    EXPECT_LE(std::abs(q.conormals[i].dot(q.normals[i])), 1e-12);
  }
  for (double w : q.weights) EXPECT_GT(w, 0.0);
}
