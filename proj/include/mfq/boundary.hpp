#pragma once

#include "mfq/level_set.hpp"
#include "mfq/sampling.hpp"
#include "mfq/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace mfq {

/// Nodes on a boundary curve with unit conormals (tangent to S, normal to the
/// curve, pointing out of the subdomain), surface normals and weights.
struct BoundaryQuadrature {
  std::vector<Vec3> nodes;
  std::vector<Vec3> conormals;
  std::vector<Vec3> normals;
  std::vector<double> weights;
  std::vector<int> piece_ids;
  std::vector<std::string> warnings;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  /// Same nodes and weights seen from the other side of the curve.
  BoundaryQuadrature flipped() const {
    BoundaryQuadrature b = *this;
    for (Vec3 &c : b.conormals) c = -c;
    return b;
  }

  void append(const BoundaryQuadrature &o) {
    const int offset = piece_ids.empty() ? 0 : *std::max_element(piece_ids.begin(), piece_ids.end()) + 1;
    nodes.insert(nodes.end(), o.nodes.begin(), o.nodes.end());
    conormals.insert(conormals.end(), o.conormals.begin(), o.conormals.end());
    normals.insert(normals.end(), o.normals.begin(), o.normals.end());
    weights.insert(weights.end(), o.weights.begin(), o.weights.end());
    for (int p : o.piece_ids) piece_ids.push_back(p + offset);
    warnings.insert(warnings.end(), o.warnings.begin(), o.warnings.end());
  }
};

/// Circle (or line) through three points with weights integrating 1, t, t^2
/// exactly over the arc from `a` to `c` through `b`; t is the angle about the
/// centre (line: signed distance).
struct TrioFit {
  std::array<double, 3> weights{};
  std::array<double, 3> params{};
  double radius = std::numeric_limits<double>::infinity();
  bool line = false;
};

inline TrioFit fit_trio(const Vec3 &a, const Vec3 &b, const Vec3 &c) {
  TrioFit fit;
  const Vec3 u = a - b, v = c - b;
  const Vec3 m = u.cross(v);
  const double scale = u.norm() * v.norm();
  if (!(scale > 0.0)) throw ComponentError("coincident boundary nodes in a trio");
  double jac = 1.0; // d(arclength)/dt
  if (m.norm() <= 1e-10 * scale) {
    fit.line = true;
    const Vec3 e = (c - a).normalized();
    fit.params = {u.dot(e), 0.0, v.dot(e)};
  } else {
    // Circumcentre relative to b.
    const Vec3 o = (u.squaredNorm() * v.cross(m) + v.squaredNorm() * m.cross(u)) / (2.0 * m.squaredNorm());
    fit.radius = o.norm();
    const Vec3 e1 = -o / fit.radius;            // centre -> b
    const Vec3 e2 = m.normalized().cross(e1);   // in-plane, orthogonal
    const auto angle = [&](const Vec3 &x) {
      const Vec3 r = x - b - o;
      return std::atan2(r.dot(e2), r.dot(e1));
    };
    fit.params = {angle(a), 0.0, angle(c)};
    jac = fit.radius;
  }
  double lo = fit.params[0], hi = fit.params[2];
  if (lo * hi >= 0.0) throw ComponentError("trio endpoints are not on opposite sides");
  if (lo > hi) std::swap(lo, hi);
  Eigen::Matrix3d A;
  Eigen::Vector3d rhs;
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) A(k, i) = std::pow(fit.params[i], k);
    rhs(k) = jac * (std::pow(hi, k + 1) - std::pow(lo, k + 1)) / (k + 1);
  }
  const Eigen::Vector3d w = A.partialPivLu().solve(rhs);
  fit.weights = {w(0), w(1), w(2)};
  return fit;
}

/// Third-order weights for scattered nodes on closed curves.
///
/// Each node forms a trio with its nearest neighbour and its nearest neighbour
/// on the opposite side; a node's weight is half the sum of its weights over
/// every trio it belongs to. Components (piece_ids) are the connected
/// components of the trio graph.
inline void trio_weights(BoundaryQuadrature &q) {
  const std::size_t n = q.nodes.size();
  if (n < 3) throw ComponentError("fewer than three boundary nodes");
  Vec3 lo = q.nodes[0], hi = q.nodes[0];
  for (const Vec3 &x : q.nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double diag = std::max((hi - lo).norm(), 1e-12);
  PointGrid grid(lo, hi, std::max(diag / std::sqrt(double(n)), diag * 1e-4));
  for (const Vec3 &x : q.nodes) grid.insert(x);

  const auto neighbours = [&](std::size_t j, std::size_t k) {
    auto nb = grid.k_nearest(q.nodes[j], k + 1);
    nb.erase(std::remove_if(nb.begin(), nb.end(),
                            [&](const auto &e) { return e.second == static_cast<int>(j); }),
             nb.end());
    return nb;
  };

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<double> w(n, 0.0);
  std::size_t crowded = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t k = 16;
    int i1 = -1, i2 = -1;
    while (i2 < 0) {
      const auto nb = neighbours(j, k);
      i1 = nb[0].second;
      const Vec3 d1 = q.nodes[j] - q.nodes[i1];
      for (std::size_t t = 1; t < nb.size(); ++t) {
        const Vec3 d2 = q.nodes[j] - q.nodes[nb[t].second];
        if (d1.dot(d2) < 0.0) {
          i2 = nb[t].second;
          break;
        }
      }
      if (i2 >= 0 || k >= n - 1) break;
      k *= 4;
    }
    if (i2 < 0) throw ComponentError("no opposite-side neighbour for a boundary node");
    const TrioFit fit = fit_trio(q.nodes[i1], q.nodes[j], q.nodes[i2]);
    w[i1] += 0.5 * fit.weights[0];
    w[j] += 0.5 * fit.weights[1];
    w[i2] += 0.5 * fit.weights[2];
    parent[find(i1)] = find(static_cast<int>(j));
    parent[find(i2)] = find(static_cast<int>(j));
    const double spacing = (q.nodes[j] - q.nodes[i1]).norm();
    if (spacing > 0.25 * fit.radius) ++crowded;
  }
  if (crowded > 0)
    q.warnings.push_back(std::to_string(crowded) +
                         " boundary nodes have neighbour spacing above a quarter of the local radius");

  std::vector<int> root_id(n, -1), count(n, 0);
  q.piece_ids.assign(n, 0);
  int next = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const int r = find(static_cast<int>(j));
    if (root_id[r] < 0) root_id[r] = next++;
    q.piece_ids[j] = root_id[r];
    ++count[q.piece_ids[j]];
  }
  for (int p = 0; p < next; ++p)
    if (count[p] < 3) throw ComponentError("boundary component with fewer than three nodes");
  q.weights = std::move(w);
}

/// Candidate source on the plane section S ∩ {p.x = c}.
class PlaneCurveDomain {
public:
  PlaneCurveDomain(LevelSetSurface surface, Vec3 p, double c)
      : surface_(std::move(surface)), p_(p.normalized()), c_(c / p.norm()) {}

  template <class Rng>
  std::optional<SurfacePoint> draw(Rng &rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 x;
    for (int a = 0; a < 3; ++a) x[a] = surface_.lower[a] + u(rng) * (surface_.upper[a] - surface_.lower[a]);
    try {
      const Vec3 y = project_to_plane_curve(x, surface_, p_, c_);
      if (!surface_.in_region(y)) return std::nullopt;
      const auto [n, k] = normal_and_curvature(surface_, y);
      return SurfacePoint{y, n, k};
    } catch (const ProjectionError &) {
      return std::nullopt;
    } catch (const DegeneratePointError &) {
      return std::nullopt;
    }
  }

  Vec3 lower() const { return surface_.lower; }
  Vec3 upper() const { return surface_.upper; }

private:
  LevelSetSurface surface_;
  Vec3 p_;
  double c_;
};

/// Conormal at a point of S ∩ {p.x = c} pointing out of the side p.x > c.
inline Vec3 plane_conormal(const Vec3 &normal, const Vec3 &p) {
  const Vec3 t = p - p.dot(normal) * normal;
  const double tn = t.norm();
  if (!(tn > 1e-12)) throw ComponentError("plane is tangent to the surface");
  return -t / tn;
}

/// Trio quadrature on S ∩ {p.x = c}. Conormals point out of the p.x > c side;
/// use flipped() for the other side.
inline BoundaryQuadrature planar_split_boundary(const LevelSetSurface &surface, const Vec3 &p,
                                                double c, std::size_t n_boundary, std::uint64_t seed,
                                                int candidates_per_point = 25) {
  SamplingOptions opt;
  opt.mode = SamplingMode::farthest_point;
  opt.candidates_per_point = candidates_per_point;
  opt.seed = seed;
  const PointCloud pts = sample_points(PlaneCurveDomain(surface, p, c), n_boundary, opt);
  const Vec3 pn = p.normalized();
  BoundaryQuadrature q;
  for (const SurfacePoint &s : pts.points) {
    q.nodes.push_back(s.position);
    q.normals.push_back(s.normal);
    q.conormals.push_back(plane_conormal(s.normal, pn));
  }
  trio_weights(q);
  return q;
}

} // namespace mfq
