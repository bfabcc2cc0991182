#pragma once

// Fast invariant checks shared by the property suite and the acceptance binary.

#include "mfq/mfq.hpp"
#include "test_util.hpp"

#include <Eigen/SVD>

#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace mfq::oracle {

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass() const { return value <= tolerance; }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Largest relative asymmetry of Phi over 20 random clouds; infinite if any
/// Cholesky factorization fails.
inline Check phi_hermitian_pd() {
  std::mt19937_64 rng(6);
  const FourierBasis b(BoxDomain::cube(3, -1.5, 1.5), 6, 3, 10, WeightMode::separable);
  double worst = 0.0;
  for (int cloud = 0; cloud < 20; ++cloud) {
    std::vector<Functional> fs;
    for (int i = 0; i < 30; ++i) {
      const Vec3 x = random_in_box(rng, b.box());
      fs.push_back(evaluation_functional(x));
      fs.push_back(laplacian_functional(x));
    }
    const Eigen::MatrixXd phi = assemble_phi(fs, b);
    worst = std::max(worst, (phi - phi.transpose()).cwiseAbs().maxCoeff() / phi.cwiseAbs().maxCoeff());
    if (Eigen::LLT<Eigen::MatrixXd>(phi).info() != Eigen::Success) worst = kInf;
  }
  return {"Phi Hermitian and positive definite on 20 random clouds", worst, 1e-12};
}

inline Check separable_phi_matches_brute_force() {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const FourierBasis b(BoxDomain::cube(3, -1, 1), 2, 2.5, 10, WeightMode::separable);
    const auto fs = random_functionals(rng, b.box(), 4);
    const Eigen::MatrixXcd ref = brute_phi(b, fs);
    const double scale = ref.cwiseAbs().maxCoeff();
    worst = std::max(worst, (assemble_phi(fs, b) - ref.real()).cwiseAbs().maxCoeff() / scale);
    worst = std::max(worst, ref.imag().cwiseAbs().maxCoeff() / scale);
  }
  return {"separable Phi equals brute-force mode sum", worst, 1e-12};
}

inline Check min_norm_matches_pseudoinverse() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd V = Eigen::MatrixXd::NullaryExpr(12, 40, [&] { return g(rng); });
    const Eigen::VectorXd f = Eigen::VectorXd::NullaryExpr(12, [&] { return g(rng); });
    const auto s = min_norm_solve<double>(V, f);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd ref = svd.solve(f);
    worst = std::max(worst, (s.coefficients - ref).norm() / ref.norm());
  }
  return {"min-norm solution equals pseudoinverse solution", worst, 1e-10};
}

/// Largest decrease of the solution norm along 10 nested constraint chains.
inline Check norm_monotone_under_nesting() {
  const FourierBasis basis(BoxDomain::cube(3, -2, 2), 5, 3, 10, WeightMode::joint);
  const auto u = [](const Vec3 &x) { return std::sin(x.x()) * std::cos(0.5 * x.y()) + x.z() * x.z(); };
  double worst = 0.0;
  for (int chain = 0; chain < 10; ++chain) {
    std::mt19937_64 rng(100 + chain);
    std::vector<Functional> fs;
    Eigen::VectorXd f;
    double prev = 0.0;
    for (int step = 0; step < 6; ++step) {
      for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_in_box(rng, basis.box());
        fs.push_back(step % 2 ? laplacian_functional(x) : evaluation_functional(x));
        f.conservativeResize(f.size() + 1);
        f(f.size() - 1) = step % 2 ? -std::sin(x.x()) * std::cos(0.5 * x.y()) * 1.25 + 2.0 : u(x);
      }
      const auto s = min_norm_solve(assemble_system<double>(fs, f, basis));
      worst = std::max(worst, prev - s.solution_norm);
      prev = s.solution_norm;
    }
  }
  return {"solution norm non-decreasing on 10 nested chains", worst, 1e-10};
}

/// f = g, scaling of f and g, shift by g and scaling of the basis weights.
inline Check method1_identities() {
  const PointCloud cloud = sample_surface(surfaces::sphere(), 150, SamplingMode::farthest_point, 25, 4);
  const FourierBasis basis(BoxDomain::cube(3, -2.0, 2.0), 10, 3.0, 10.0, WeightMode::separable);
  const FourierBasis scaled(BoxDomain::cube(3, -2.0, 2.0), 10, 3.0, 10.0, WeightMode::separable, 7.0);
  Eigen::VectorXd f(150), g(150);
  for (int i = 0; i < 150; ++i) {
    const Vec3 &x = cloud.points[i].position;
    f(i) = x.z() * x.z() + 0.3 * x.x();
    g(i) = 1.0 + 0.2 * x.y();
  }
  const auto ratio = [&](const Eigen::VectorXd &a, const Eigen::VectorXd &b, const FourierBasis &basis_) {
    return method1_ratio(cloud, a, b, LbVariant::neumann_pair, basis_).ratio;
  };
  const double r = ratio(f, g, basis);
  const double alpha = 3.0;
  double worst = std::abs(ratio(g, g, basis) - 1.0);
  worst = std::max(worst, std::abs(ratio(alpha * f, g, basis) / (alpha * r) - 1.0));
  worst = std::max(worst, std::abs(ratio(f, alpha * g, basis) * alpha / r - 1.0));
  worst = std::max(worst, std::abs(ratio(f + alpha * g, g, basis) - (r + alpha)) / std::abs(r + alpha));
  worst = std::max(worst, std::abs(ratio(f, g, scaled) / r - 1.0));
  return {"Method 1 identity, scaling and shift invariances", worst, 1e-12};
}

/// Three-node arc rules on random circles integrate 1, theta, theta^2.
inline Check trio_exact_on_quadratics() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double r = 0.2 + 2.0 * u(rng);
    const Vec3 c(u(rng), u(rng), u(rng));
    const Vec3 e1 = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const Vec3 e2 = e1.unitOrthogonal();
    const double t0 = 6.0 * u(rng);
    const std::array<double, 3> t{t0, t0 + 0.05 + 0.2 * u(rng), t0 + 0.3 + 0.2 * u(rng)};
    const auto at = [&](double s) { return Vec3(c + r * (std::cos(s) * e1 + std::sin(s) * e2)); };
    const TrioFit fit = fit_trio(at(t[0]), at(t[1]), at(t[2]));
    for (int k = 0; k < 3; ++k) {
      double q = 0.0;
      for (int i = 0; i < 3; ++i) q += fit.weights[i] * std::pow(t[i] - t[1], k);
      const double lo = t[0] - t[1], hi = t[2] - t[1];
      const double exact = r * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
      worst = std::max(worst, std::abs(q - exact));
    }
  }
  return {"trio weights integrate quadratics in theta", worst, 1e-12};
}

inline Check sphere_lb_of_coordinate() {
  const PointCloud c = sample_surface(surfaces::sphere(), 100, SamplingMode::random, 1, 21);
  double worst = 0.0;
  for (const SurfacePoint &p : c.points) {
    const Functional lb = lb_functional(p, LbVariant::with_curvature)[0];
    for (int a = 0; a < 3; ++a) {
      const Jet x{p.position[a], Vec3::Unit(a), Mat3::Zero()};
      worst = std::max(worst, std::abs(lb.apply(x) + 2.0 * p.position[a]));
    }
  }
  return {"Laplace-Beltrami of x on the unit sphere is -2x", worst, 1e-10};
}

inline Check weights_reproduce_integral_of_g() {
  const PointCloud cloud = sample_surface(surfaces::sphere(), 200, SamplingMode::farthest_point, 25, 9);
  const FourierBasis basis(BoxDomain::cube(3, -2.0, 2.0), 10, 3.0, 10.0, WeightMode::separable);
  Eigen::VectorXd g(200);
  for (int i = 0; i < 200; ++i) g(i) = 1.5 + cloud.points[i].position.x();
  const double ig = 1.5 * 4.0 * std::numbers::pi;
  double worst = 0.0;
  for (SolvePath path : {SolvePath::phi_path, SolvePath::v_path}) {
    Method1Options o;
    o.path = path;
    const auto r = method1_ratio(cloud, g, g, LbVariant::neumann_pair, basis, ig, o);
    worst = std::max(worst, std::abs(r.weights->dot(g) - ig) / ig);
  }
  return {"emitted weights reproduce the integral of g", worst, 1e-12};
}

inline std::vector<Check> all_property_checks() {
  return {phi_hermitian_pd(),           separable_phi_matches_brute_force(), min_norm_matches_pseudoinverse(),
          norm_monotone_under_nesting(), method1_identities(),               trio_exact_on_quadratics(),
          sphere_lb_of_coordinate(),     weights_reproduce_integral_of_g()};
}

} // namespace mfq::oracle
