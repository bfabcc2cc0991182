// Integral of -ln|x - x0| / 2pi over the unit disk, with and without the
// logarithmic augmentation.

#include "mfq/mfq.hpp"

#include <cstdio>

int main(int argc, char **argv) {
  using namespace mfq;
  const Vec3 x0(argc > 2 ? std::atof(argv[1]) : 0.0, argc > 2 ? std::atof(argv[2]) : 0.0, 0.0);
  const double exact = singular_reference(SingularDomain::unit_disk, x0);
  const FourierBasis basis(BoxDomain::cube(2, -2.0, 2.0), 30, 4.0, 10.0, WeightMode::joint);
  std::printf("x0 = (%g, %g), exact %.15f\n", x0.x(), x0.y(), exact);
  std::printf("%6s %14s %14s\n", "N", "augmented", "naive");
  for (std::size_t n : {250, 500, 1000}) {
    SamplingOptions so;
    so.seed = 1;
    const PointCloud cloud = sample_points(DiskDomain(1.0, Vec3::Zero()), n, so);
    const double a = singular_integral(SingularDomain::unit_disk, cloud, x0, augmentations::log2d(x0), basis).integral;
    const double b = singular_integral(SingularDomain::unit_disk, cloud, x0, std::nullopt, basis).integral;
    std::printf("%6zu %14.3e %14.3e\n", n, std::abs(a - exact) / exact, std::abs(b - exact) / exact);
  }
}
