#pragma once

#include "mfq/boundary.hpp"
#include "mfq/integrators.hpp"
#include "mfq/level_set.hpp"
#include "mfq/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace mfq {

/// Euclidean Voronoi cells of a closed surface.
///
/// `boundaries[i]` holds the edges of cell i with conormals pointing out of
/// the cell; each edge is one piece. Cells without cloud points are listed in
/// `degenerate_cells`.
struct VoronoiPartition {
  std::vector<Vec3> seeds;
  std::vector<int> cell_of;
  std::vector<BoundaryQuadrature> boundaries;
  std::vector<int> degenerate_cells;
};

struct VoronoiOptions {
  /// Auxiliary random surface samples per seed used to find adjacent cells.
  std::size_t probes_per_seed = 400;
  std::uint64_t probe_seed = 12345;
};

inline int nearest_seed(const std::vector<Vec3> &seeds, const Vec3 &x) {
  int best = 0;
  double bd = (x - seeds[0]).squaredNorm();
  for (std::size_t k = 1; k < seeds.size(); ++k) {
    const double d = (x - seeds[k]).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

namespace detail {

struct Bisector {
  Vec3 p; // unit, from seed i towards seed j
  double c;
};

inline Bisector bisector(const Vec3 &si, const Vec3 &sj) {
  const Vec3 d = sj - si;
  const double len = d.norm();
  return {d / len, 0.5 * (sj.squaredNorm() - si.squaredNorm()) / len};
}

/// True when no seed outside `owners` is closer to x than owners[0].
inline bool owned_by(const std::vector<Vec3> &seeds, const Vec3 &x, std::initializer_list<int> owners,
                     double slack) {
  const double d0 = (x - seeds[*owners.begin()]).norm();
  for (std::size_t m = 0; m < seeds.size(); ++m) {
    if (std::find(owners.begin(), owners.end(), static_cast<int>(m)) != owners.end()) continue;
    if ((x - seeds[m]).norm() < d0 - slack) return false;
  }
  return true;
}

/// Zeros of phi on the line o + t d inside the surface box.
inline std::vector<Vec3> line_surface_roots(const LevelSetSurface &s, const Vec3 &o, const Vec3 &d,
                                            int samples = 4000) {
  const double reach = (s.upper - s.lower).norm() + (o - 0.5 * (s.lower + s.upper)).norm();
  const auto g = [&](double t) { return s.value(o + t * d); };
  std::vector<Vec3> roots;
  double t0 = -reach, g0 = g(t0);
  for (int k = 1; k <= samples; ++k) {
    const double t1 = -reach + 2.0 * reach * k / samples, g1 = g(t1);
    if (g0 == 0.0 || g0 * g1 < 0.0) {
      double a = t0, b = t1, ga = g0;
      for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
        const double m = 0.5 * (a + b), gm = g(m);
        if ((gm < 0) == (ga < 0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      // Newton polish.
      double t = 0.5 * (a + b);
      for (int it = 0; it < 5; ++it) {
        const double dg = s.gradient(o + t * d).dot(d);
        if (dg == 0.0) break;
        const double step = g(t) / dg;
        if (!(std::abs(step) < b - a + 1e-12)) break;
        t -= step;
      }
      roots.push_back(o + t * d);
    }
    t0 = t1;
    g0 = g1;
  }
  return roots;
}

struct Corner {
  Vec3 x;
  std::array<int, 3> cells;
};

/// Ordered nodes of an open edge; the first and last are corners.
inline BoundaryQuadrature edge_rule(const std::vector<Vec3> &polyline, const LevelSetSurface &s,
                                    const Bisector &b, double density) {
  std::vector<double> arc{0.0};
  for (std::size_t k = 1; k < polyline.size(); ++k)
    arc.push_back(arc.back() + (polyline[k] - polyline[k - 1]).norm());
  const double L = arc.back();
  std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.5 * L * density)));
  const std::size_t m = 2 * panels;
  std::vector<Vec3> nodes{polyline.front()};
  std::size_t seg = 1;
  for (std::size_t k = 1; k < m; ++k) {
    const double target = L * static_cast<double>(k) / static_cast<double>(m);
    while (seg + 1 < arc.size() && arc[seg] < target) ++seg;
    const double len = arc[seg] - arc[seg - 1];
    const double t = len > 0 ? (target - arc[seg - 1]) / len : 0.0;
    const Vec3 guess = polyline[seg - 1] + t * (polyline[seg] - polyline[seg - 1]);
    nodes.push_back(project_to_plane_curve(guess, s, b.p, b.c));
  }
  nodes.push_back(polyline.back());

  BoundaryQuadrature q;
  q.nodes = nodes;
  q.weights.assign(nodes.size(), 0.0);
  for (std::size_t k = 0; k + 2 < nodes.size(); k += 2) {
    const TrioFit fit = fit_trio(nodes[k], nodes[k + 1], nodes[k + 2]);
    for (int r = 0; r < 3; ++r) q.weights[k + r] += fit.weights[r];
  }
  q.piece_ids.assign(nodes.size(), 0);
  return q;
}

/// Conormals and normals of an edge between cells i and j, pointing out of i.
inline void orient_edge(BoundaryQuadrature &q, const LevelSetSurface &s, const Vec3 &si,
                        const Vec3 &sj) {
  const Vec3 pij = (sj - si).normalized();
  q.normals.clear();
  q.conormals.clear();
  for (const Vec3 &x : q.nodes) {
    const Vec3 n = normal_and_curvature(s, x).first;
    const Vec3 t = n.cross(pij);
    const double tn = t.norm();
    if (!(tn > 1e-12)) throw ComponentError("bisector plane tangent to the surface");
    Vec3 nu = (t / tn).cross(n);
    if (nu.dot(pij) < 0.0) nu = -nu;
    q.normals.push_back(n);
    q.conormals.push_back(nu.normalized());
  }
}

} // namespace detail

/// Voronoi cells of `cloud` around `seeds` on a closed surface. Edges are
/// traced along S ∩ bisector between the corners where three cells meet and
/// carry about `boundary_density` nodes per unit length.
inline VoronoiPartition voronoi_partition(const PointCloud &cloud, const std::vector<Vec3> &seeds,
                                          const LevelSetSurface &surface, double boundary_density,
                                          const VoronoiOptions &opt = {}) {
  if (seeds.empty()) throw ConfigError("no Voronoi seeds");
  if (!(boundary_density > 0.0)) throw ConfigError("boundary density must be positive");
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t j = i + 1; j < seeds.size(); ++j)
      if (seeds[i] == seeds[j]) throw ConfigError("Voronoi seeds must be distinct");

  const std::size_t ns = seeds.size();
  VoronoiPartition part;
  part.seeds = seeds;
  part.boundaries.resize(ns);
  std::vector<int> population(ns, 0);
  for (const SurfacePoint &p : cloud.points) {
    part.cell_of.push_back(nearest_seed(seeds, p.position));
    ++population[part.cell_of.back()];
  }
  for (std::size_t i = 0; i < ns; ++i)
    if (population[i] == 0) part.degenerate_cells.push_back(static_cast<int>(i));
  if (ns == 1) return part;

  const double scale = (surface.upper - surface.lower).norm();
  const double slack = 1e-10 * scale;

  // Adjacent pairs and candidate corner triples from the nearest seeds of
  // dense probes.
  std::set<std::pair<int, int>> pairs;
  std::set<std::array<int, 3>> triples;
  {
    const PointCloud probes =
        sample_surface(surface, opt.probes_per_seed * ns, SamplingMode::random, 1, opt.probe_seed);
    std::vector<std::pair<double, int>> order(ns);
    for (const SurfacePoint &p : probes.points) {
      for (std::size_t k = 0; k < ns; ++k)
        order[k] = {(p.position - seeds[k]).squaredNorm(), static_cast<int>(k)};
      const std::size_t top = std::min<std::size_t>(4, ns);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
      pairs.insert(std::minmax(order[0].second, order[1].second));
      for (std::size_t a = 0; a < top; ++a)
        for (std::size_t b = a + 1; b < top; ++b)
          for (std::size_t c = b + 1; c < top; ++c) {
            std::array<int, 3> t{order[a].second, order[b].second, order[c].second};
            std::sort(t.begin(), t.end());
            triples.insert(t);
          }
    }
  }

  std::vector<detail::Corner> corners;
  for (const auto &t : triples) {
    const Vec3 &a = seeds[t[0]], &b = seeds[t[1]], &c = seeds[t[2]];
    const Vec3 u = b - a, v = c - a, m = u.cross(v);
    if (m.norm() <= 1e-12 * u.norm() * v.norm()) continue;
    const Vec3 o = a + (u.squaredNorm() * v.cross(m) + v.squaredNorm() * m.cross(u)) / (2.0 * m.squaredNorm());
    for (const Vec3 &x : detail::line_surface_roots(surface, o, m.normalized()))
      if (surface.in_region(x) && detail::owned_by(seeds, x, {t[0], t[1], t[2]}, slack))
        corners.push_back({x, t});
  }
  for (const detail::Corner &c : corners) {
    pairs.insert({c.cells[0], c.cells[1]});
    pairs.insert({c.cells[0], c.cells[2]});
    pairs.insert({c.cells[1], c.cells[2]});
  }

  for (const auto &[i, j] : pairs) {
    const detail::Bisector bis = detail::bisector(seeds[i], seeds[j]);
    std::vector<std::size_t> ends;
    for (std::size_t k = 0; k < corners.size(); ++k) {
      const auto &c = corners[k].cells;
      if (std::count(c.begin(), c.end(), i) && std::count(c.begin(), c.end(), j)) ends.push_back(k);
    }
    std::vector<BoundaryQuadrature> edges;

    if (ends.empty()) {
      // Closed bisector loops shared by two cells only.
      SamplingOptions so;
      so.mode = SamplingMode::farthest_point;
      so.seed = opt.probe_seed + static_cast<std::uint64_t>(i * ns + j);
      so.accept = [&, i = i, j = j](const Vec3 &x) { return detail::owned_by(seeds, x, {i, j}, slack); };
      const PlaneCurveDomain dom(surface, bis.p, bis.c);
      BoundaryQuadrature q;
      for (const SurfacePoint &s : sample_points(dom, 64, so).points) q.nodes.push_back(s.position);
      trio_weights(q);
      const std::size_t n = std::max<std::size_t>(
          64, static_cast<std::size_t>(std::ceil(q.total_weight() * boundary_density)));
      q = BoundaryQuadrature{};
      for (const SurfacePoint &s : sample_points(dom, n, so).points) q.nodes.push_back(s.position);
      trio_weights(q);
      edges.push_back(std::move(q));
    } else {
      const double step = 0.25 / boundary_density;
      std::vector<bool> used(ends.size(), false);
      for (std::size_t e = 0; e < ends.size(); ++e) {
        if (used[e]) continue;
        used[e] = true;
        const detail::Corner &start = corners[ends[e]];
        int third = 0;
        for (int c : start.cells)
          if (c != i && c != j) third = c;
        Vec3 x = start.x;
        Vec3 t = normal_and_curvature(surface, x).first.cross(bis.p).normalized();
        if ((seeds[i] - seeds[third]).dot(t) < 0.0) t = -t;
        std::vector<Vec3> line{x};
        const std::size_t max_steps = static_cast<std::size_t>(20.0 * scale / step) + 100;
        std::size_t end_index = ends.size();
        for (std::size_t it = 0; it < max_steps; ++it) {
          const Vec3 y = project_to_plane_curve(x + step * t, surface, bis.p, bis.c);
          if (!detail::owned_by(seeds, y, {i, j}, slack)) {
            double best = 4.0 * step;
            for (std::size_t f = 0; f < ends.size(); ++f) {
              if (f == e) continue;
              const double d = (corners[ends[f]].x - x).norm();
              if (d < best) {
                best = d;
                end_index = f;
              }
            }
            break;
          }
          Vec3 tn = normal_and_curvature(surface, y).first.cross(bis.p).normalized();
          if (tn.dot(t) < 0.0) tn = -tn;
          x = y;
          t = tn;
          line.push_back(x);
        }
        if (end_index == ends.size())
          throw ComponentError("Voronoi edge between cells " + std::to_string(i) + " and " +
                               std::to_string(j) + " does not end at a corner");
        used[end_index] = true;
        const Vec3 end = corners[ends[end_index]].x;
        while (line.size() > 1 && (line.back() - end).norm() < 0.5 * step) line.pop_back();
        line.push_back(end);
        edges.push_back(detail::edge_rule(line, surface, bis, boundary_density));
      }
    }

    for (BoundaryQuadrature &q : edges) {
      detail::orient_edge(q, surface, seeds[i], seeds[j]);
      q.piece_ids.assign(q.size(), 0);
      part.boundaries[i].append(q);
      part.boundaries[j].append(q.flipped());
    }
  }
  return part;
}

/// Method-2 subdomains of a partition, each mapped into [-half_width, half_width]^3.
inline std::vector<Subdomain> voronoi_subdomains(const PointCloud &cloud, const VoronoiPartition &part,
                                                 double half_width = 0.25) {
  if (!part.degenerate_cells.empty())
    throw ComponentError("Voronoi cell " + std::to_string(part.degenerate_cells.front()) +
                         " has no interior points");
  std::vector<Subdomain> sd(part.seeds.size());
  for (std::size_t i = 0; i < sd.size(); ++i) sd[i].id = static_cast<int>(i);
  for (std::size_t k = 0; k < cloud.size(); ++k) sd[part.cell_of[k]].cloud.points.push_back(cloud.points[k]);
  for (std::size_t i = 0; i < sd.size(); ++i) {
    Subdomain &s = sd[i];
    s.cloud.n_interior = s.cloud.points.size();
    s.boundary = part.boundaries[i];
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (const SurfacePoint &p : s.cloud.points) {
      lo = lo.cwiseMin(p.position);
      hi = hi.cwiseMax(p.position);
    }
    for (const Vec3 &x : s.boundary.nodes) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    s.center = 0.5 * (lo + hi);
    s.scale = std::max(0.5 * (hi - lo).maxCoeff(), 1e-12) / half_width;
  }
  return sd;
}

} // namespace mfq
