#pragma once

#include "mfq/boundary.hpp"
#include "mfq/fourier.hpp"
#include "mfq/level_set.hpp"
#include "mfq/linsolve.hpp"
#include "mfq/operators.hpp"
#include "mfq/parallel.hpp"
#include "mfq/sampling.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace mfq {

// ---------------------------------------------------------------- Method 1

struct Method1Result {
  double ratio = 0.0;
  /// Weights on the cloud points, w.f ~ integral of f; only when the integral
  /// of g is supplied.
  std::optional<Eigen::VectorXd> weights;
  /// (|v_g|_H, |v_f|_H)
  std::pair<double, double> solution_norms{0.0, 0.0};
  /// Same ratio from the inner product (v_g, v_f)_H / |v_g|_H^2 of two solves.
  double ratio_two_solve = 0.0;
};

struct Method1Options {
  SolvePath path = SolvePath::phi_path;
  /// Conormal Neumann rows n_dS.grad u = 0 for surfaces with boundary.
  const BoundaryQuadrature *boundary = nullptr;
  double rank_tolerance = kDefaultRankTolerance;
};

namespace detail {

struct Method1Rows {
  std::vector<Functional> functionals;
  std::vector<Eigen::Index> lb_row; // per cloud point
};

inline Method1Rows method1_rows(const PointCloud &cloud, LbVariant variant,
                                const BoundaryQuadrature *boundary) {
  Method1Rows r;
  for (const SurfacePoint &p : cloud.points) {
    auto rows = lb_functional(p, variant);
    r.lb_row.push_back(static_cast<Eigen::Index>(r.functionals.size()));
    for (Functional &f : rows) r.functionals.push_back(std::move(f));
  }
  if (boundary)
    for (std::size_t i = 0; i < boundary->size(); ++i)
      r.functionals.push_back(directional_functional(boundary->nodes[i], boundary->conormals[i]));
  return r;
}

} // namespace detail

/// Estimates (integral f) / (integral g) as the c making Delta_S u = f - c g
/// solvable: c = g^T Phi^{-1} f / g^T Phi^{-1} g.
inline Method1Result method1_ratio(const PointCloud &cloud, const Eigen::VectorXd &f_values,
                                   const Eigen::VectorXd &g_values, LbVariant variant,
                                   const FourierBasis &basis,
                                   std::optional<double> integral_of_g = std::nullopt,
                                   const Method1Options &opt = {}) {
  const Eigen::Index n = static_cast<Eigen::Index>(cloud.size());
  if (f_values.size() != n || g_values.size() != n)
    throw ConfigError("value vectors must match the cloud size");
  if (g_values.cwiseAbs().maxCoeff() == 0.0) throw ConfigError("g vanishes on the cloud");
  const detail::Method1Rows rows = detail::method1_rows(cloud, variant, opt.boundary);
  const Eigen::Index m = static_cast<Eigen::Index>(rows.functionals.size());
  Eigen::VectorXd F = Eigen::VectorXd::Zero(m), G = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    F(rows.lb_row[i]) = f_values(i);
    G(rows.lb_row[i]) = g_values(i);
  }

  Method1Result res;
  Eigen::VectorXd bf, bg;
  double gg, fg, ff;
  if (opt.path == SolvePath::phi_path) {
    const Eigen::MatrixXd phi = assemble_phi(rows.functionals, basis);
    const PhiFactorization fac(phi);
    bf = fac.solve(F);
    bg = fac.solve(G);
    gg = G.dot(bg);
    fg = G.dot(bf);
    ff = F.dot(bf);
    if (!(gg > 0.0)) throw IllConditionedError("g^T Phi^{-1} g is not positive");
    res.ratio = fg / gg;
    const Eigen::VectorXd phi_bf = phi * bf, phi_bg = phi * bg;
    res.ratio_two_solve = bg.dot(phi_bf) / bg.dot(phi_bg);
  } else {
    RowMatrix<double> V(m, basis.mode_count());
    assemble_rows<double>(basis, rows.functionals, V);
    const MinNormFactorization<double> fac(V, opt.rank_tolerance);
    const Eigen::VectorXd af = fac.solve(F), ag = fac.solve(G);
    gg = ag.squaredNorm();
    fg = ag.dot(af);
    ff = af.squaredNorm();
    if (!(gg > 0.0)) throw IllConditionedError("g^T Phi^{-1} g is not positive");
    res.ratio = fg / gg;
    res.ratio_two_solve = res.ratio;
    if (integral_of_g) {
      // Dual vector of the g-solve: Phi beta = G with Phi = V V^T.
      const Eigen::MatrixXd phi = V * V.transpose();
      bg = PhiFactorization(phi).solve(G);
      gg = G.dot(bg);
    }
  }
  res.solution_norms = {std::sqrt(std::max(gg, 0.0)), std::sqrt(std::max(ff, 0.0))};
  if (integral_of_g) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = *integral_of_g * bg(rows.lb_row[i]) / gg;
    res.weights = std::move(w);
  }
  return res;
}

// ------------------------------------------------------- flux evaluation

/// Values of grad_S(u).conormal at the boundary nodes, scaled by 1/flux_scale.
template <class Scalar>
Eigen::VectorXd boundary_flux_values(const FourierBasis &basis,
                                     const std::optional<SingularAugmentation> &aug,
                                     const MinNormSolution<Scalar> &sol,
                                     const BoundaryQuadrature &boundary,
                                     const std::function<Vec3(const Vec3 &)> &to_local = {}) {
  const std::size_t nb = boundary.size();
  std::vector<Functional> probes;
  probes.reserve(3 * nb);
  for (std::size_t i = 0; i < nb; ++i) {
    const Vec3 x = to_local ? to_local(boundary.nodes[i]) : boundary.nodes[i];
    for (int a = 0; a < 3; ++a) {
      MultiIndex e{0, 0, 0};
      e[a] = 1;
      probes.push_back(Functional(x, {{1.0, e}}));
    }
  }
  const auto g = evaluate_solution<Scalar>(basis, aug, sol, probes);
  Eigen::VectorXd out(static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < nb; ++i) {
    Vec3 grad;
    for (int a = 0; a < 3; ++a) grad[a] = std::real(g(static_cast<Eigen::Index>(3 * i + a)));
    if (!boundary.normals.empty()) {
      const Vec3 &n = boundary.normals[i];
      grad -= n.dot(grad) * n;
    }
    out(static_cast<Eigen::Index>(i)) = grad.dot(boundary.conormals[i]);
  }
  return out;
}

inline double contract(const std::vector<double> &w, const Eigen::VectorXd &v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v(static_cast<Eigen::Index>(i));
  return s;
}

// ---------------------------------------------------------------- Method 2

/// One piece of a decomposed surface. Points and boundary are in world
/// coordinates; the solve runs in local coordinates x' = (x - center) / scale.
struct Subdomain {
  int id = 0;
  PointCloud cloud;
  BoundaryQuadrature boundary;
  Vec3 center = Vec3::Zero();
  double scale = 1.0;
};

struct Method2Result {
  double integral = 0.0;
  std::vector<std::pair<int, double>> per_subdomain;
  double solution_norm = 0.0;
};

struct Method2Options {
  double rank_tolerance = kDefaultRankTolerance;
  int threads = 1;
};

/// Integral of f over one subdomain: solve Delta_S u = f by min-norm
/// collocation, then sum the conormal flux over the boundary rule.
inline std::pair<double, double> subdomain_flux(const Subdomain &sd,
                                                const std::function<double(const Vec3 &)> &f,
                                                LbVariant variant, const FourierBasis &basis,
                                                double rank_tolerance = kDefaultRankTolerance) {
  if (sd.boundary.size() == 0) throw ComponentError("subdomain without boundary quadrature");
  const double s = sd.scale;
  const auto local = [&](const Vec3 &x) -> Vec3 { return (x - sd.center) / s; };
  std::vector<Functional> rows;
  std::vector<double> targets;
  for (const SurfacePoint &p : sd.cloud.points) {
    SurfacePoint q{local(p.position), p.normal, std::nullopt};
    if (p.curvature_sum) q.curvature_sum = s * *p.curvature_sum;
    auto fs = lb_functional(q, variant);
    for (std::size_t k = 0; k < fs.size(); ++k) {
      rows.push_back(std::move(fs[k]));
      targets.push_back(k == 0 ? s * s * f(p.position) : 0.0);
    }
  }
  const auto sys = assemble_system<double>(
      std::move(rows), Eigen::Map<const Eigen::VectorXd>(targets.data(), targets.size()), basis);
  const auto sol = min_norm_solve(sys, rank_tolerance);
  const Eigen::VectorXd flux = boundary_flux_values<double>(basis, std::nullopt, sol, sd.boundary, local);
  return {contract(sd.boundary.weights, flux) / s, sol.solution_norm};
}

inline Method2Result method2_integral(const std::vector<Subdomain> &subdomains,
                                      const std::function<double(const Vec3 &)> &f,
                                      LbVariant variant, const FourierBasis &basis,
                                      const Method2Options &opt = {}) {
  std::vector<std::pair<double, double>> parts(subdomains.size());
  parallel_for(subdomains.size(), opt.threads, [&](std::size_t i) {
    try {
      parts[i] = subdomain_flux(subdomains[i], f, variant, basis, opt.rank_tolerance);
    } catch (const Error &e) {
      throw SolverError("subdomain " + std::to_string(subdomains[i].id) + ": " + e.what());
    }
  });
  Method2Result res;
  double norm2 = 0.0;
  for (std::size_t i = 0; i < subdomains.size(); ++i) {
    res.per_subdomain.emplace_back(subdomains[i].id, parts[i].first);
    res.integral += parts[i].first;
    norm2 += parts[i].second * parts[i].second;
  }
  res.solution_norm = std::sqrt(norm2);
  return res;
}

/// Splits a cloud by the sign of p.x - c into two subdomains sharing one
/// boundary rule (conormals of `boundary` point out of the p.x > c side).
inline std::vector<Subdomain> planar_split_subdomains(const PointCloud &cloud, const Vec3 &p,
                                                      double c,
                                                      const BoundaryQuadrature &boundary) {
  std::vector<Subdomain> sd(2);
  sd[0].id = 0;
  sd[1].id = 1;
  for (const SurfacePoint &x : cloud.points) {
    const double side = p.dot(x.position) - c;
    if (side == 0.0) continue;
    (side > 0 ? sd[0] : sd[1]).cloud.points.push_back(x);
  }
  for (Subdomain &s : sd) s.cloud.n_interior = s.cloud.points.size();
  sd[0].boundary = boundary;
  sd[1].boundary = boundary.flipped();
  return sd;
}

// ----------------------------------------------------------- line integrals

struct CurveCloud {
  std::vector<Vec3> nodes;
  std::vector<Vec3> tangents;
  std::pair<Vec3, Vec3> endpoints;
};

/// u(b) - u(a) for the min-norm u with t.grad u = f at every node.
inline double line_integral_meshfree(const CurveCloud &curve, const Eigen::VectorXd &f_values,
                                     const FourierBasis &basis,
                                     double rank_tolerance = kDefaultRankTolerance) {
  if (static_cast<Eigen::Index>(curve.nodes.size()) != f_values.size() ||
      curve.nodes.size() != curve.tangents.size())
    throw ConfigError("curve nodes, tangents and values must have equal length");
  const auto member = [&](const Vec3 &e) {
    for (const Vec3 &x : curve.nodes)
      if ((x - e).norm() <= 1e-14 * (1.0 + e.norm())) return true;
    return false;
  };
  if (!member(curve.endpoints.first) || !member(curve.endpoints.second))
    throw ConfigError("curve endpoints must be nodes of the curve");
  std::vector<Functional> rows;
  for (std::size_t i = 0; i < curve.nodes.size(); ++i)
    rows.push_back(directional_functional(curve.nodes[i], curve.tangents[i]));
  const auto sys = assemble_system<double>(std::move(rows), f_values, basis);
  const auto sol = min_norm_solve(sys, rank_tolerance);
  const std::vector<Functional> ends{evaluation_functional(curve.endpoints.first),
                                     evaluation_functional(curve.endpoints.second)};
  const Eigen::VectorXd u = evaluate_solution(sys, sol, ends);
  return u(1) - u(0);
}

// --------------------------------------------------------------- circles

/// Uniformly spaced nodes on a circle in the plane spanned by (e1, e2).
struct CircleRule {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  std::vector<double> angles;
  std::vector<Vec3> nodes;
};

inline CircleRule circle_nodes(std::size_t n, double radius = 1.0, const Vec3 &center = Vec3::Zero(),
                               const Vec3 &e1 = Vec3::UnitX(), const Vec3 &e2 = Vec3::UnitY()) {
  CircleRule r{center, radius, {}, {}};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    r.angles.push_back(t);
    r.nodes.push_back(center + radius * (std::cos(t) * e1 + std::sin(t) * e2));
  }
  return r;
}

/// Mean of the samples times the circumference; rejects non-uniform angles.
inline double trapezoid_circle(std::span<const double> angles, std::span<const double> values,
                               double radius = 1.0) {
  const std::size_t n = angles.size();
  if (n == 0 || values.size() != n) throw ConfigError("trapezoid rule needs matching samples");
  const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    double d = std::remainder(angles[(k + 1) % n] - angles[k], 2.0 * std::numbers::pi);
    if (n == 1) d = h;
    if (d < 0) d += 2.0 * std::numbers::pi;
    if (std::abs(d - h) > 1e-10) throw ConfigError("circle nodes are not uniformly spaced");
  }
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(n) * 2.0 * std::numbers::pi * radius;
}

// ------------------------------------------------------ singular integrals

enum class SingularDomain { unit_disk, paraboloid_cap };

struct SingularIntegralResult {
  double integral = 0.0;
  double solution_norm = 0.0;
  double residual_norm = 0.0;
};

/// Closed-form or tabulated value of the singular integral.
inline double singular_reference(SingularDomain d, const Vec3 &x0) {
  if (d == SingularDomain::unit_disk) return 0.25 - 0.25 * x0.head<2>().squaredNorm();
  return -0.634060518;
}

/// Integral of the Laplace Green's function with source x0 over the domain:
/// unit disk, K = -(1/2pi) ln|x - x0|; paraboloid cap z = 1 - x^2 - y^2,
/// K = -1/(4 pi |x - x0|). Solves Delta(u + s v) = K at the cloud, then
/// integrates the conormal flux with the trapezoid rule on the unit circle.
inline SingularIntegralResult singular_integral(SingularDomain domain, const PointCloud &cloud,
                                                const Vec3 &x0,
                                                const std::optional<SingularAugmentation> &aug,
                                                const FourierBasis &basis,
                                                std::size_t boundary_nodes = 1000,
                                                double rank_tolerance = kDefaultRankTolerance) {
  std::vector<Functional> rows;
  Eigen::VectorXd targets(static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const SurfacePoint &p = cloud.points[i];
    const double r = (p.position - x0).norm();
    if (domain == SingularDomain::unit_disk) {
      rows.push_back(laplacian_functional(p.position, 2));
      targets(static_cast<Eigen::Index>(i)) = -std::log(r) / (2.0 * std::numbers::pi);
    } else {
      rows.push_back(lb_functional(p, LbVariant::with_curvature)[0]);
      targets(static_cast<Eigen::Index>(i)) = -1.0 / (4.0 * std::numbers::pi * r);
    }
  }
  const auto sys = assemble_system<double>(std::move(rows), targets, basis, aug);
  const auto sol = min_norm_solve(sys, rank_tolerance);

  const CircleRule circle = circle_nodes(boundary_nodes);
  BoundaryQuadrature b;
  for (double t : circle.angles) {
    const double c = std::cos(t), s = std::sin(t);
    b.nodes.emplace_back(c, s, 0.0);
    if (domain == SingularDomain::unit_disk) {
      b.normals.push_back(Vec3::UnitZ());
      b.conormals.emplace_back(c, s, 0.0);
    } else {
      b.normals.push_back(Vec3(2 * c, 2 * s, 1.0) / std::sqrt(5.0));
      b.conormals.push_back(Vec3(c, s, -2.0) / std::sqrt(5.0));
    }
  }
  const Eigen::VectorXd flux = boundary_flux_values<double>(basis, sys.augmentation, sol, b);
  SingularIntegralResult res;
  res.integral = trapezoid_circle(circle.angles, std::span<const double>(flux.data(), flux.size()));
  res.solution_norm = sol.solution_norm;
  res.residual_norm = sol.residual_norm;
  return res;
}

} // namespace mfq
