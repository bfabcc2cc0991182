#pragma once

#include "mfq/level_set.hpp"
#include "mfq/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace mfq {

struct PointCloud {
  std::vector<SurfacePoint> points;
  std::size_t n_interior = 0;
  std::size_t n_boundary = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.size(); }
  std::vector<Vec3> positions() const {
    std::vector<Vec3> p;
    p.reserve(points.size());
    for (const SurfacePoint &s : points) p.push_back(s.position);
    return p;
  }
};

enum class SamplingMode { farthest_point, random, irregular };

inline SamplingMode sampling_mode_from_string(const std::string &s) {
  if (s == "farthest_point") return SamplingMode::farthest_point;
  if (s == "random") return SamplingMode::random;
  if (s == "irregular") return SamplingMode::irregular;
  throw ConfigError("unknown sampling mode '" + s + "'");
}

/// Uniform hash grid for nearest-neighbour queries with incremental inserts.
class PointGrid {
public:
  PointGrid(const Vec3 &lower, const Vec3 &upper, double cell) : lower_(lower), cell_(cell) {
    for (int a = 0; a < 3; ++a)
      dims_[a] = std::max(1, static_cast<int>(std::ceil((upper[a] - lower[a]) / cell)) + 1);
    cells_.resize(static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]);
  }

  void insert(const Vec3 &x) {
    const int id = static_cast<int>(points_.size());
    points_.push_back(x);
    cells_[flat(cell_of(x))].push_back(id);
  }

  std::size_t size() const { return points_.size(); }
  const Vec3 &point(std::size_t i) const { return points_[i]; }

  /// Distance to, and index of, the nearest stored point (-1 when empty).
  std::pair<double, int> nearest(const Vec3 &x) const {
    if (points_.empty()) return {std::numeric_limits<double>::infinity(), -1};
    const auto c = cell_of(x);
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int ring = 0; ring <= max_ring; ++ring) {
      // Everything beyond this ring is at least (ring - 1) cells away.
      if (best_id >= 0 && (ring - 1) * cell_ > best) break;
      for (int i = c[0] - ring; i <= c[0] + ring; ++i)
        for (int j = c[1] - ring; j <= c[1] + ring; ++j)
          for (int k = c[2] - ring; k <= c[2] + ring; ++k) {
            if (std::max({std::abs(i - c[0]), std::abs(j - c[1]), std::abs(k - c[2])}) != ring)
              continue;
            if (i < 0 || j < 0 || k < 0 || i >= dims_[0] || j >= dims_[1] || k >= dims_[2])
              continue;
            for (int id : cells_[flat({i, j, k})]) {
              const double d = (points_[id] - x).norm();
              if (d < best) {
                best = d;
                best_id = id;
              }
            }
          }
    }
    return {best, best_id};
  }

  /// The k nearest stored points as (squared distance, index), closest first.
  std::vector<std::pair<double, int>> k_nearest(const Vec3 &x, std::size_t k) const {
    std::vector<std::pair<double, int>> found;
    k = std::min(k, points_.size());
    if (k == 0) return found;
    const auto c = cell_of(x);
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int ring = 0; ring <= max_ring; ++ring) {
      if (found.size() >= k) {
        std::nth_element(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(k - 1), found.end());
        const double reach = (ring - 1) * cell_;
        if (reach > 0.0 && reach * reach > found[k - 1].first) break;
      }
      for (int i = c[0] - ring; i <= c[0] + ring; ++i)
        for (int j = c[1] - ring; j <= c[1] + ring; ++j)
          for (int l = c[2] - ring; l <= c[2] + ring; ++l) {
            if (std::max({std::abs(i - c[0]), std::abs(j - c[1]), std::abs(l - c[2])}) != ring)
              continue;
            if (i < 0 || j < 0 || l < 0 || i >= dims_[0] || j >= dims_[1] || l >= dims_[2])
              continue;
            for (int id : cells_[flat({i, j, l})]) found.emplace_back((points_[id] - x).squaredNorm(), id);
          }
    }
    std::sort(found.begin(), found.end());
    found.resize(k);
    return found;
  }

private:
  std::array<int, 3> cell_of(const Vec3 &x) const {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a)
      c[a] = std::clamp(static_cast<int>(std::floor((x[a] - lower_[a]) / cell_)), 0, dims_[a] - 1);
    return c;
  }
  std::size_t flat(const std::array<int, 3> &c) const {
    return (static_cast<std::size_t>(c[0]) * dims_[1] + c[1]) * dims_[2] + c[2];
  }

  Vec3 lower_;
  double cell_;
  std::array<int, 3> dims_{};
  std::vector<std::vector<int>> cells_;
  std::vector<Vec3> points_;
};

/// Candidate source on an implicit surface: uniform draws in the surface's
/// bounding box, Newton-projected onto the zero set.
class SurfaceDomain {
public:
  explicit SurfaceDomain(LevelSetSurface surface, double tol = kProjectionTolerance)
      : surface_(std::move(surface)), tol_(tol) {}

  template <class Rng>
  std::optional<SurfacePoint> draw(Rng &rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec3 x;
    for (int a = 0; a < 3; ++a) x[a] = surface_.lower[a] + u(rng) * (surface_.upper[a] - surface_.lower[a]);
    try {
      const Vec3 y = project_to_surface(x, surface_, tol_);
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
  const LevelSetSurface &surface() const { return surface_; }

private:
  LevelSetSurface surface_;
  double tol_;
};

/// Flat disk in the z = 0 plane; normal e_z, zero curvature.
class DiskDomain {
public:
  explicit DiskDomain(double radius = 1.0, Vec3 center = Vec3::Zero())
      : radius_(radius), center_(center) {}

  template <class Rng>
  std::optional<SurfacePoint> draw(Rng &rng) const {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double x = u(rng), y = u(rng);
    if (x * x + y * y >= 1.0) return std::nullopt;
    return SurfacePoint{center_ + radius_ * Vec3(x, y, 0.0), Vec3::UnitZ(), 0.0};
  }

  Vec3 lower() const { return center_ - Vec3(radius_, radius_, 0.0); }
  Vec3 upper() const { return center_ + Vec3(radius_, radius_, 0.0); }
  double radius() const { return radius_; }

private:
  double radius_;
  Vec3 center_;
};

struct SamplingOptions {
  SamplingMode mode = SamplingMode::farthest_point;
  int candidates_per_point = 25;
  std::uint64_t seed = 0;
  int max_failures = 100000;
  /// Optional extra filter (e.g. keep samples away from a singular point).
  std::function<bool(const Vec3 &)> accept;
};

namespace detail {

template <class Domain>
double grid_cell(const Domain &domain, std::size_t n) {
  const Vec3 ext = domain.upper() - domain.lower();
  const double diag = std::max(ext.norm(), 1e-12);
  return std::max(diag / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))), diag * 1e-3);
}

template <class Domain, class Rng>
SurfacePoint draw_accepted(const Domain &domain, Rng &rng, const SamplingOptions &opt,
                           const std::function<bool(const Vec3 &)> &extra, int &failures) {
  for (;;) {
    auto p = domain.draw(rng);
    if (p && (!opt.accept || opt.accept(p->position)) && (!extra || extra(p->position))) return *p;
    if (++failures > opt.max_failures)
      throw SamplingError("sampling exceeded its retry budget");
  }
}

} // namespace detail

/// Draws n points from a domain.
///
/// farthest_point: each accepted point is the candidate (out of
/// `candidates_per_point` projected draws) farthest from the accepted set.
/// random: plain projected draws. irregular: half of the points restricted to
/// |x| < 1, the rest random. Deterministic for a given seed.
template <class Domain>
PointCloud sample_points(const Domain &domain, std::size_t n, const SamplingOptions &opt) {
  if (n < 1) throw SamplingError("need at least one point");
  std::mt19937_64 rng(opt.seed);
  PointCloud cloud;
  cloud.seed = opt.seed;
  cloud.points.reserve(n);
  int failures = 0;

  if (opt.mode == SamplingMode::random || opt.mode == SamplingMode::irregular) {
    const std::size_t clustered = opt.mode == SamplingMode::irregular ? n / 2 : 0;
    const auto near_axis = [](const Vec3 &x) { return std::abs(x.x()) < 1.0; };
    for (std::size_t i = 0; i < n; ++i)
      cloud.points.push_back(detail::draw_accepted(domain, rng, opt,
                                                   i < clustered ? std::function<bool(const Vec3 &)>(near_axis)
                                                                 : std::function<bool(const Vec3 &)>(),
                                                   failures));
  } else {
    PointGrid grid(domain.lower(), domain.upper(), detail::grid_cell(domain, n));
    const int k = std::max(1, opt.candidates_per_point);
    for (std::size_t i = 0; i < n; ++i) {
      SurfacePoint best;
      double best_d = -1.0;
      for (int c = 0; c < (i == 0 ? 1 : k); ++c) {
        SurfacePoint p = detail::draw_accepted(domain, rng, opt, {}, failures);
        const double d = grid.nearest(p.position).first;
        if (d > best_d) {
          best_d = d;
          best = p;
        }
      }
      grid.insert(best.position);
      cloud.points.push_back(best);
    }
  }
  cloud.n_interior = cloud.points.size();
  return cloud;
}

inline PointCloud sample_surface(const LevelSetSurface &surface, std::size_t n, SamplingMode mode,
                                 int candidates_per_point, std::uint64_t seed) {
  SamplingOptions opt;
  opt.mode = mode;
  opt.candidates_per_point = candidates_per_point;
  opt.seed = seed;
  return sample_points(SurfaceDomain(surface), n, opt);
}

/// Max over random probes of the distance to the nearest cloud point; a lower
/// bound on the fill distance h_max.
template <class Domain>
double fill_distance_estimate(const std::vector<Vec3> &cloud, const Domain &domain,
                              std::size_t probe_count, std::uint64_t seed) {
  if (cloud.empty()) throw SamplingError("empty cloud");
  PointGrid grid(domain.lower(), domain.upper(), detail::grid_cell(domain, cloud.size()));
  for (const Vec3 &x : cloud) grid.insert(x);
  std::mt19937_64 rng(seed);
  SamplingOptions opt;
  int failures = 0;
  double h = 0.0;
  for (std::size_t i = 0; i < probe_count; ++i) {
    const SurfacePoint p = detail::draw_accepted(domain, rng, opt, {}, failures);
    h = std::max(h, grid.nearest(p.position).first);
  }
  return h;
}

inline double fill_distance_estimate(const PointCloud &cloud, const LevelSetSurface &surface,
                                     std::size_t probe_count, std::uint64_t seed) {
  return fill_distance_estimate(cloud.positions(), SurfaceDomain(surface), probe_count, seed);
}

} // namespace mfq
