// Sphere area as a sum over Voronoi cells, each solved in its own rescaled box.
// Writes the boundary rule of cell 0 to voronoi_cell0.csv.

#include "mfq/mfq.hpp"

#include <cstdio>
#include <numbers>

int main() {
  using namespace mfq;
  const LevelSetSurface s = surfaces::sphere();
  const PointCloud cloud = sample_surface(s, 2000, SamplingMode::farthest_point, 25, 1);
  const std::vector<Vec3> seeds = sample_surface(s, 10, SamplingMode::farthest_point, 25, 1001).positions();
  const VoronoiPartition part = voronoi_partition(cloud, seeds, s, 100.0);
  const auto cells = voronoi_subdomains(cloud, part);

  const FourierBasis basis(BoxDomain::cube(3, -0.5, 0.5), 11, 5.0, 5.0, WeightMode::joint);
  const auto r = method2_integral(cells, [](const Vec3 &) { return 1.0; }, LbVariant::with_curvature, basis);
  for (std::size_t i = 0; i < cells.size(); ++i)
    std::printf("cell %2zu: %4zu points, %4zu boundary nodes, perimeter %.6f, area %.10f\n", i,
                cells[i].cloud.size(), cells[i].boundary.size(), cells[i].boundary.total_weight(),
                r.per_subdomain[i].second);
  const double area = 4.0 * std::numbers::pi;
  std::printf("total %.15f, error %.2e\n", r.integral, std::abs(r.integral - area));
  io::write_file("voronoi_cell0.csv", [&](std::ostream &os) { io::write_boundary(os, part.boundaries[0]); });
}
