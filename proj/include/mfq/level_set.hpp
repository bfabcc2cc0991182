#pragma once

#include "mfq/types.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace mfq {

/// Implicit surface S = {x : phi(x) = 0} with analytic derivatives.
///
/// `lower`/`upper` bound the region where random candidates are drawn when
/// sampling; `region` optionally clips the zero set to a patch (e.g. the
/// z >= 0 half of a paraboloid).
struct LevelSetSurface {
  std::function<double(const Vec3 &)> value;
  std::function<Vec3(const Vec3 &)> gradient;
  std::function<Mat3(const Vec3 &)> hessian;
  std::string name;
  Vec3 lower = Vec3::Constant(-1.0);
  Vec3 upper = Vec3::Constant(1.0);
  std::function<bool(const Vec3 &)> region;

  bool in_region(const Vec3 &x) const { return !region || region(x); }
};

inline constexpr double kProjectionTolerance = 1e-12;
inline constexpr int kProjectionMaxIterations = 50;

namespace surfaces {

/// phi = |x - c|^2 - R^2
inline LevelSetSurface sphere(double radius = 1.0, Vec3 center = Vec3::Zero()) {
  LevelSetSurface s;
  s.value = [=](const Vec3 &x) { return (x - center).squaredNorm() - radius * radius; };
  s.gradient = [=](const Vec3 &x) -> Vec3 { return 2.0 * (x - center); };
  s.hessian = [](const Vec3 &) -> Mat3 { return 2.0 * Mat3::Identity(); };
  s.name = "sphere";
  s.lower = center - Vec3::Constant(1.25 * radius);
  s.upper = center + Vec3::Constant(1.25 * radius);
  return s;
}

/// phi = p.x - c with unit p; bounds default to a unit cube around the
/// plane's foot point.
inline LevelSetSurface plane(Vec3 normal = Vec3::UnitZ(), double offset = 0.0) {
  normal.normalize();
  LevelSetSurface s;
  s.value = [=](const Vec3 &x) { return normal.dot(x) - offset; };
  s.gradient = [=](const Vec3 &) -> Vec3 { return normal; };
  s.hessian = [](const Vec3 &) -> Mat3 { return Mat3::Zero(); };
  s.name = "plane";
  s.lower = offset * normal - Vec3::Constant(1.0);
  s.upper = offset * normal + Vec3::Constant(1.0);
  return s;
}

/// Genus-two surface
///   phi = 1/(4((x-1)^2+y^2)) + 1/(4((x+1)^2+y^2)) + x^2/10 + y^2/4 + z^2 - 1.
inline LevelSetSurface genus_two() {
  // Each pole term is (1/4) A^{-1} with A = (x - a)^2 + y^2.
  struct Pole {
    double a;
    double value(const Vec3 &x) const { return 0.25 / area(x); }
    double area(const Vec3 &x) const { return (x.x() - a) * (x.x() - a) + x.y() * x.y(); }
    Vec3 dA(const Vec3 &x) const { return {2.0 * (x.x() - a), 2.0 * x.y(), 0.0}; }
    Vec3 gradient(const Vec3 &x) const {
      const double A = area(x);
      return -0.25 / (A * A) * dA(x);
    }
    Mat3 hessian(const Vec3 &x) const {
      const double A = area(x);
      const Vec3 g = dA(x);
      Mat3 h = 0.5 / (A * A * A) * (g * g.transpose());
      h(0, 0) -= 0.5 / (A * A);
      h(1, 1) -= 0.5 / (A * A);
      return h;
    }
  };
  const Pole p1{1.0}, p2{-1.0};

  LevelSetSurface s;
  s.value = [=](const Vec3 &x) {
    return p1.value(x) + p2.value(x) + 0.1 * x.x() * x.x() + 0.25 * x.y() * x.y() +
           x.z() * x.z() - 1.0;
  };
  s.gradient = [=](const Vec3 &x) -> Vec3 {
    return p1.gradient(x) + p2.gradient(x) + Vec3(0.2 * x.x(), 0.5 * x.y(), 2.0 * x.z());
  };
  s.hessian = [=](const Vec3 &x) -> Mat3 {
    Mat3 h = p1.hessian(x) + p2.hessian(x);
    h(0, 0) += 0.2;
    h(1, 1) += 0.5;
    h(2, 2) += 2.0;
    return h;
  };
  s.name = "genus_two";
  s.lower = Vec3(-3.3, -2.1, -0.8);
  s.upper = Vec3(3.3, 2.1, 0.8);
  return s;
}

/// Paraboloid cap z = 1 - x^2 - y^2, z >= 0 (phi = z + x^2 + y^2 - 1).
inline LevelSetSurface paraboloid() {
  LevelSetSurface s;
  s.value = [](const Vec3 &x) { return x.z() + x.x() * x.x() + x.y() * x.y() - 1.0; };
  s.gradient = [](const Vec3 &x) -> Vec3 { return {2.0 * x.x(), 2.0 * x.y(), 1.0}; };
  s.hessian = [](const Vec3 &) -> Mat3 { return Vec3(2.0, 2.0, 0.0).asDiagonal(); };
  s.name = "paraboloid";
  s.lower = Vec3(-1.05, -1.05, -0.05);
  s.upper = Vec3(1.05, 1.05, 1.05);
  s.region = [](const Vec3 &x) { return x.z() >= 0.0; };
  return s;
}

} // namespace surfaces

/// Looks up a built-in surface by name; throws ConfigError if unknown.
inline LevelSetSurface surface_by_name(const std::string &name) {
  if (name == "sphere") return surfaces::sphere();
  if (name == "genus_two") return surfaces::genus_two();
  if (name == "paraboloid") return surfaces::paraboloid();
  if (name == "plane") return surfaces::plane();
  throw ConfigError("unknown surface '" + name + "'");
}

/// Newton projection along the gradient: x <- x - phi grad / |grad|^2.
/// Returns x untouched when |phi(x)| <= tol already.
inline Vec3 project_to_surface(const Vec3 &x, const LevelSetSurface &surface,
                               double tol = kProjectionTolerance,
                               int max_iterations = kProjectionMaxIterations) {
  Vec3 y = x;
  double r = surface.value(y);
  for (int it = 0; it < max_iterations && std::abs(r) > tol; ++it) {
    const Vec3 g = surface.gradient(y);
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0) || !std::isfinite(g2)) break;
    y -= (r / g2) * g;
    r = surface.value(y);
  }
  if (!(std::abs(r) <= tol))
    throw ProjectionError("projection onto '" + surface.name + "' did not converge", y, r);
  return y;
}

/// Projection onto the curve S ∩ {p.x = c} by a minimum-norm Newton step on
/// the two constraints.
inline Vec3 project_to_plane_curve(const Vec3 &x, const LevelSetSurface &surface,
                                   const Vec3 &p, double c,
                                   double tol = kProjectionTolerance,
                                   int max_iterations = kProjectionMaxIterations) {
  Vec3 y = x - (p.dot(x) - c) * p;
  auto residual = [&](const Vec3 &z) {
    return std::max(std::abs(surface.value(z)), std::abs(p.dot(z) - c));
  };
  for (int it = 0; it < max_iterations && residual(y) > tol; ++it) {
    Eigen::Matrix<double, 2, 3> J;
    J.row(0) = surface.gradient(y).transpose();
    J.row(1) = p.transpose();
    const Eigen::Vector2d r(surface.value(y), p.dot(y) - c);
    const Eigen::Matrix2d JJt = J * J.transpose();
    if (std::abs(JJt.determinant()) < 1e-300) break;
    y -= J.transpose() * JJt.ldlt().solve(r);
  }
  const double r = residual(y);
  if (!(r <= tol))
    throw ProjectionError("projection onto plane section of '" + surface.name +
                              "' did not converge",
                          y, r);
  return y;
}

/// Unit normal grad(phi)/|grad(phi)| and curvature sum
/// kappa = (tr D2phi - n^T D2phi n) / |grad(phi)|.
inline std::pair<Vec3, double> normal_and_curvature(const LevelSetSurface &surface,
                                                    const Vec3 &x) {
  const Vec3 g = surface.gradient(x);
  const double gn = g.norm();
  if (!(gn > 0.0) || !std::isfinite(gn))
    throw DegeneratePointError("vanishing level-set gradient on '" + surface.name + "'");
  const Vec3 n = g / gn;
  const Mat3 H = surface.hessian(x);
  const double kappa = (H.trace() - n.dot(H * n)) / gn;
  return {n, kappa};
}

} // namespace mfq
