#include "mfq/level_set.hpp"
#include "mfq/operators.hpp"
#include "mfq/sampling.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <random>

using namespace mfq;
using mfq::oracle::fd_jet;

namespace {

double coefficient(const Functional &f, const MultiIndex &a) {
  for (const Term &t : f.terms())
    if (t.index == a) return t.coefficient;
  return 0.0;
}

// Symmetric matrix M with sum_k c_k D^{a_k} u = tr(M D2u) for the second-order terms.
Mat3 second_order_form(const Functional &f) {
  Mat3 m = Mat3::Zero();
  for (const Term &t : f.terms()) {
    if (degree(t.index) != 2) continue;
    int i = -1, j = -1;
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < t.index[k]; ++r) (i < 0 ? i : j) = k;
    if (i == j) m(i, i) += t.coefficient;
    else {
      m(i, j) += 0.5 * t.coefficient;
      m(j, i) += 0.5 * t.coefficient;
    }
  }
  return m;
}

// u(x) = 0.3 + a.x + x^T B x with B symmetric.
struct Quadratic {
  double c;
  Vec3 a;
  Mat3 B;
  double operator()(const Vec3 &x) const { return c + a.dot(x) + x.dot(B * x); }
  Jet jet(const Vec3 &x) const { return {(*this)(x), a + 2 * B * x, 2 * B}; }
};

Quadratic random_quadratic(std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Mat3 B;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = u(rng);
  return {u(rng), Vec3(u(rng), u(rng), u(rng)), 0.5 * (B + B.transpose())};
}

} // namespace

TEST(Functional, RejectsHighOrder) {
  EXPECT_THROW(Functional(Vec3::Zero(), {{1.0, {3, 0, 0}}}), FunctionalError);
  EXPECT_THROW(Functional(Vec3::Zero(), {{1.0, {1, 1, 1}}}), FunctionalError);
  EXPECT_THROW(Functional(Vec3::Zero(), {{1.0, {-1, 0, 0}}}), FunctionalError);
}

TEST(Functional, MergesDuplicateIndices) {
  const Functional f(Vec3::Zero(), {{1.0, {1, 0, 0}}, {2.0, {1, 0, 0}}, {1.0, {0, 0, 0}}});
  EXPECT_EQ(f.terms().size(), 2u);
  EXPECT_EQ(coefficient(f, {1, 0, 0}), 3.0);
  EXPECT_EQ(f.order(), 1);
}

TEST(Functional, Linearity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    const Functional f = oracle::random_functional(rng, Vec3(u(rng), u(rng), u(rng)), 6);
    const Quadratic p = random_quadratic(rng), q = random_quadratic(rng);
    const double a = u(rng), b = u(rng);
    const Jet jp = p.jet(f.anchor()), jq = q.jet(f.anchor());
    const Jet mix{a * jp.value + b * jq.value, a * jp.gradient + b * jq.gradient,
                  a * jp.hessian + b * jq.hessian};
    EXPECT_NEAR(f.apply(mix), a * f.apply(jp) + b * f.apply(jq), 1e-12);
  }
}

TEST(LaplaceBeltrami, PlaneCoefficients) {
  const auto rows = lb_functional(Vec3::Zero(), Vec3::UnitZ(), 0.0, LbVariant::with_curvature);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(coefficient(rows[0], {2, 0, 0}), 1.0);
  EXPECT_EQ(coefficient(rows[0], {0, 2, 0}), 1.0);
  EXPECT_EQ(coefficient(rows[0], {0, 0, 2}), 0.0);
  EXPECT_EQ(coefficient(rows[0], {0, 0, 1}), 0.0);
  EXPECT_EQ(coefficient(rows[0], {1, 0, 1}), 0.0);
  EXPECT_EQ(coefficient(rows[0], {0, 1, 1}), 0.0);
}

TEST(LaplaceBeltrami, SecondOrderPartIsTangentialProjector) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
    for (LbVariant v : {LbVariant::with_curvature, LbVariant::neumann_pair}) {
      const auto rows = lb_functional(Vec3::Zero(), n, g(rng), v);
      const Mat3 m = second_order_form(rows[0]);
      EXPECT_LE((m - (Mat3::Identity() - n * n.transpose())).norm(), 1e-14);
    }
  }
}

TEST(LaplaceBeltrami, NeumannPairShape) {
  const Vec3 n = Vec3(1, 2, -2).normalized();
  const auto rows = lb_functional(Vec3(0.1, 0.2, 0.3), n, std::nullopt, LbVariant::neumann_pair);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].order(), 2);
  for (const Term &t : rows[0].terms()) EXPECT_EQ(degree(t.index), 2);
  for (int a = 0; a < 3; ++a) {
    MultiIndex e{0, 0, 0};
    e[a] = 1;
    EXPECT_NEAR(coefficient(rows[1], e), n[a], 1e-15);
  }
}

TEST(LaplaceBeltrami, MissingCurvature) {
  EXPECT_THROW(lb_functional(Vec3::Zero(), Vec3::UnitZ(), std::nullopt, LbVariant::with_curvature),
               FunctionalError);
}

TEST(LaplaceBeltrami, SphereCoordinateFunction) {
  const LevelSetSurface s = surfaces::sphere();
  const PointCloud c = sample_surface(s, 50, SamplingMode::random, 1, 21);
  for (const SurfacePoint &p : c.points) {
    const Functional lb = lb_functional(p, LbVariant::with_curvature)[0];
    const Jet x{p.position.x(), Vec3::UnitX(), Mat3::Zero()};
    EXPECT_NEAR(lb.apply(x), -2.0 * p.position.x(), 1e-10);
  }
}

TEST(LaplaceBeltrami, VariantsAgreeForTangentialGradient) {
  const LevelSetSurface s = surfaces::genus_two();
  const PointCloud c = sample_surface(s, 20, SamplingMode::random, 1, 22);
  std::mt19937_64 rng(1);
  for (const SurfacePoint &p : c.points) {
    Quadratic q = random_quadratic(rng);
    // Shift the linear part so that n.grad u = 0 at the anchor.
    const Vec3 grad = q.a + 2 * q.B * p.position;
    q.a -= p.normal.dot(grad) * p.normal;
    const Jet j = q.jet(p.position);
    ASSERT_NEAR(p.normal.dot(j.gradient), 0.0, 1e-12);
    const double curv = lb_functional(p, LbVariant::with_curvature)[0].apply(j);
    const auto pair = lb_functional(p, LbVariant::neumann_pair);
    EXPECT_NEAR(curv, pair[0].apply(j), 1e-8);
    EXPECT_NEAR(pair[1].apply(j), 0.0, 1e-12);
  }
}

TEST(Directional, Basics) {
  const Functional d = directional_functional(Vec3(0.5, 0.1, 0.0), Vec3::UnitX());
  EXPECT_EQ(d.apply({0.5, Vec3::UnitX(), Mat3::Zero()}), 1.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Functional r = directional_functional(Vec3::Zero(), Vec3(g(rng), g(rng), g(rng)));
    EXPECT_EQ(r.apply({4.2, Vec3::Zero(), Mat3::Zero()}), 0.0);
  }
  EXPECT_THROW(directional_functional(Vec3::Zero(), Vec3::Zero()), FunctionalError);
}

TEST(Directional, FiniteDifferenceOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 30; ++i) {
    const Vec3 x(g(rng), g(rng), g(rng));
    const Vec3 dir = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Quadratic q = random_quadratic(rng);
    const double h = 1e-5;
    const double fd = (q(x + h * dir) - q(x - h * dir)) / (2 * h);
    EXPECT_NEAR(directional_functional(x, dir).apply(q.jet(x)), fd, 1e-8);
  }
}

TEST(Augmentation, InvRLaplacian) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  const Vec3 x0(0, 0, 1);
  const SingularAugmentation s = augmentations::inv_r(x0);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = x0 + Vec3(g(rng), g(rng), g(rng));
    EXPECT_NEAR(laplacian_functional(x).apply(s.jet(x)), 2.0 / (x - x0).norm(), 1e-10);
  }
}

TEST(Augmentation, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (const char *name : {"log2d", "inv_r"}) {
    const SingularAugmentation s = augmentation_by_name(name, Vec3(0.1, -0.2, 0.3));
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = s.singular_point + Vec3(g(rng), g(rng), g(rng));
      const Jet fd = fd_jet(s.s_value, x, 1e-4);
      const Jet ex = s.jet(x);
      EXPECT_LE((fd.gradient - ex.gradient).norm(), 1e-7) << name;
      EXPECT_LE((fd.hessian - ex.hessian).norm(), 1e-5) << name;
    }
  }
  EXPECT_THROW(augmentation_by_name("cubic", Vec3::Zero()), ConfigError);
}

TEST(Augmentation, Log2dNonDegenerate) {
  const SingularAugmentation s = augmentations::log2d(Vec3::Zero());
  const Vec3 x(0.3, 0.4, 0.0);
  EXPECT_NE(laplacian_functional(x, 2).apply(s.jet(x)), 0.0);
  EXPECT_NE(s.s_gradient(x).x(), 0.0);
  EXPECT_NE(s.s_gradient(x).y(), 0.0);
}

TEST(Augmentation, SingularAnchorRejected) {
  const SingularAugmentation s = augmentations::inv_r(Vec3(0, 0, 1));
  EXPECT_THROW(augment_rows(evaluation_functional(Vec3(0, 0, 1)), s), FunctionalError);
}

TEST(Augmentation, ZeroVPartReproducesPlainRow) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g;
  const SingularAugmentation s = augmentations::inv_r(Vec3::Zero());
  for (int i = 0; i < 20; ++i) {
    const Functional f = oracle::random_functional(rng, Vec3(g(rng), g(rng), g(rng)));
    const auto [plain, prod] = augment_rows(f, s);
    const Quadratic u = random_quadratic(rng);
    const Jet zero{};
    EXPECT_EQ(plain.apply(u.jet(f.anchor())) + prod.apply(zero), f.apply(u.jet(f.anchor())));
  }
}

// Delta(u + s v) = -(1/2pi) ln|x - x0| in the plane with s = rho ln rho,
// v = -1/(16 pi) and u = rho / (8 pi), rho = |x - x0|^2.
TEST(Augmentation, DiskExactSolution) {
  const Vec3 x0(0.2, -0.1, 0.0);
  const SingularAugmentation s = augmentations::log2d(x0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x(u(rng), u(rng), 0.0);
    const Functional lap = laplacian_functional(x, 2);
    const auto [plain, prod] = augment_rows(lap, s);
    const Vec3 d = x - x0;
    const Jet uj{d.squaredNorm() / (8 * std::numbers::pi), d / (4 * std::numbers::pi),
                 Mat3::Identity() / (4 * std::numbers::pi)};
    const Jet vj{-1.0 / (16 * std::numbers::pi), Vec3::Zero(), Mat3::Zero()};
    const double row = plain.apply(uj) + prod.apply(vj);
    EXPECT_NEAR(row, -std::log(d.norm()) / (2 * std::numbers::pi), 1e-10);
  }
}

TEST(Augmentation, LeibnizMatchesFiniteDifference) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const SingularAugmentation s = augmentations::inv_r(Vec3(0, 0, 1));
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = Vec3(0, 0, 1) + 0.7 * Vec3(g(rng), g(rng), g(rng));
    const Functional f = oracle::random_functional(rng, x, 5);
    const Vec3 w(g(rng), g(rng), g(rng));
    const auto basis_fn = [&](const Vec3 &y) { return std::cos(w.dot(y)); };
    const auto product = [&](const Vec3 &y) { return s.s_value(y) * basis_fn(y); };
    const double via_rows = augment_rows(f, s).second.apply(oracle::wave_jet(w, 1.0, 0.0, x));
    const double via_fd = f.apply(fd_jet(product, x, 1e-4));
    EXPECT_NEAR(via_rows, via_fd, 1e-6 * (1 + std::abs(via_fd)));
  }
}
