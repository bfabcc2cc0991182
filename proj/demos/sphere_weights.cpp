// Method 1 quadrature weights on the unit sphere, reused for several integrands.

#include "mfq/mfq.hpp"

#include <cstdio>
#include <numbers>

int main() {
  using namespace mfq;
  const double pi = std::numbers::pi;
  const PointCloud cloud = sample_surface(surfaces::sphere(), 600, SamplingMode::farthest_point, 25, 1);
  const FourierBasis basis(BoxDomain::cube(3, -2.0, 2.0), 12, 3.0, 10.0, WeightMode::separable);

  const Eigen::VectorXd g = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cloud.size()));
  const auto r = method1_ratio(cloud, g, g, LbVariant::neumann_pair, basis, 4.0 * pi);
  const Eigen::VectorXd &w = *r.weights;
  std::printf("%zu points, weight range [%.4g, %.4g]\n", cloud.size(), w.minCoeff(), w.maxCoeff());

  struct Case {
    const char *name;
    double (*f)(const Vec3 &);
    double exact;
  };
  const Case cases[] = {
      {"1", [](const Vec3 &) { return 1.0; }, 4.0 * pi},
      {"z^2", [](const Vec3 &x) { return x.z() * x.z(); }, 4.0 * pi / 3.0},
      {"x^2 y^2", [](const Vec3 &x) { return x.x() * x.x() * x.y() * x.y(); }, 4.0 * pi / 15.0},
      {"exp(x)", [](const Vec3 &x) { return std::exp(x.x()); }, 2.0 * pi * (std::exp(1.0) - std::exp(-1.0))},
  };
  std::printf("%-10s %22s %22s %10s\n", "f", "sum w f", "exact", "rel err");
  for (const Case &c : cases) {
    double s = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) s += w(static_cast<Eigen::Index>(i)) * c.f(cloud.points[i].position);
    std::printf("%-10s %22.15f %22.15f %10.2e\n", c.name, s, c.exact, std::abs(s - c.exact) / c.exact);
  }
}
