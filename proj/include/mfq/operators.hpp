#pragma once

#include "mfq/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfq {

/// Exponents of a partial derivative d^a/dx^a0 dy^a1 dz^a2.
using MultiIndex = std::array<int, 3>;

inline int degree(const MultiIndex &a) { return a[0] + a[1] + a[2]; }

/// Product of per-axis binomial coefficients binom(a_i, b_i) (all entries <= 2).
inline double multi_binomial(const MultiIndex &a, const MultiIndex &b) {
  double r = 1.0;
  for (int i = 0; i < 3; ++i) {
    const int n = a[i], k = b[i];
    r *= (n == 2 && k == 1) ? 2.0 : 1.0;
  }
  return r;
}

struct Term {
  double coefficient;
  MultiIndex index;
};

/// Value, gradient and Hessian of a function at one point: everything a
/// functional of order <= 2 can see.
struct Jet {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();

  double derivative(const MultiIndex &a) const {
    switch (degree(a)) {
    case 0:
      return value;
    case 1:
      return gradient[a[0] ? 0 : (a[1] ? 1 : 2)];
    case 2: {
      int i = -1, j = -1;
      for (int k = 0; k < 3; ++k)
        for (int m = 0; m < a[k]; ++m) (i < 0 ? i : j) = k;
      return hessian(i, j);
    }
    default:
      throw FunctionalError("derivative order above 2 requested from a jet");
    }
  }
};

/// A linear differential functional  u -> sum_k c_k (D^{a_k} u)(anchor).
///
/// The coefficient of a mixed index such as (1,1,0) multiplies d2/dxdy once,
/// so a Hessian quadratic form n^T D2 n contributes 2 n_x n_y there.
class Functional {
public:
  Functional() = default;
  Functional(Vec3 anchor, std::vector<Term> terms) : anchor_(anchor) {
    for (const Term &t : terms) add(t.coefficient, t.index);
  }

  const Vec3 &anchor() const { return anchor_; }
  const std::vector<Term> &terms() const { return terms_; }
  int order() const {
    int o = 0;
    for (const Term &t : terms_) o = std::max(o, degree(t.index));
    return o;
  }

  /// Accumulates into an existing multi-index rather than duplicating it.
  void add(double coefficient, const MultiIndex &index) {
    if (index[0] < 0 || index[1] < 0 || index[2] < 0 || degree(index) > 2)
      throw FunctionalError("functional terms must have total degree <= 2");
    for (Term &t : terms_)
      if (t.index == index) {
        t.coefficient += coefficient;
        return;
      }
    terms_.push_back({coefficient, index});
  }

  double apply(const Jet &jet) const {
    double r = 0.0;
    for (const Term &t : terms_) r += t.coefficient * jet.derivative(t.index);
    return r;
  }

private:
  Vec3 anchor_ = Vec3::Zero();
  std::vector<Term> terms_;
};

/// Point evaluation u(x).
inline Functional evaluation_functional(const Vec3 &anchor) {
  return Functional(anchor, {{1.0, {0, 0, 0}}});
}

/// Flat Laplacian in the first `dim` coordinates.
inline Functional laplacian_functional(const Vec3 &anchor, int dim = 3) {
  Functional f(anchor, {});
  for (int i = 0; i < dim; ++i) {
    MultiIndex a{0, 0, 0};
    a[i] = 2;
    f.add(1.0, a);
  }
  return f;
}

inline Functional directional_functional(const Vec3 &anchor, const Vec3 &direction) {
  const double n = direction.norm();
  if (!(n > 0.0)) throw FunctionalError("directional functional needs a nonzero direction");
  const Vec3 d = direction / n;
  Functional f(anchor, {});
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) continue;
    MultiIndex a{0, 0, 0};
    a[i] = 1;
    f.add(d[i], a);
  }
  return f;
}

/// Second-order part of Delta - n^T D2 n.
inline void add_tangential_laplacian(Functional &f, const Vec3 &n) {
  for (int i = 0; i < 3; ++i) {
    MultiIndex a{0, 0, 0};
    a[i] = 2;
    f.add(1.0 - n[i] * n[i], a);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      MultiIndex a{0, 0, 0};
      a[i] = 1;
      a[j] = 1;
      f.add(-2.0 * n[i] * n[j], a);
    }
}

enum class LbVariant { with_curvature, neumann_pair };

/// Laplace-Beltrami constraint rows at a surface point.
///
/// with_curvature: one row  Delta - kappa n.grad - n^T D2 n.
/// neumann_pair:   rows [Delta - n^T D2 n] and [n.grad]; the caller constrains
///                 the second one to zero.
inline std::vector<Functional> lb_functional(const Vec3 &position, const Vec3 &normal,
                                             std::optional<double> curvature_sum,
                                             LbVariant variant) {
  const Vec3 n = normal.normalized();
  Functional lb(position, {});
  add_tangential_laplacian(lb, n);
  if (variant == LbVariant::with_curvature) {
    if (!curvature_sum)
      throw FunctionalError("with_curvature Laplace-Beltrami row needs a curvature value");
    for (int i = 0; i < 3; ++i) {
      MultiIndex a{0, 0, 0};
      a[i] = 1;
      lb.add(-*curvature_sum * n[i], a);
    }
    return {lb};
  }
  return {lb, directional_functional(position, n)};
}

inline std::vector<Functional> lb_functional(const SurfacePoint &point, LbVariant variant) {
  return lb_functional(point.position, point.normal, point.curvature_sum, variant);
}

/// Fixed singular factor s in the augmented trial function u + s v.
struct SingularAugmentation {
  std::function<double(const Vec3 &)> s_value;
  std::function<Vec3(const Vec3 &)> s_gradient;
  std::function<Mat3(const Vec3 &)> s_hessian;
  Vec3 singular_point = Vec3::Zero();
  std::string name;

  Jet jet(const Vec3 &x) const { return {s_value(x), s_gradient(x), s_hessian(x)}; }
};

namespace augmentations {

/// s = rho ln rho with rho = |x - x0|^2; Delta s contains a logarithm.
inline SingularAugmentation log2d(const Vec3 &x0) {
  SingularAugmentation a;
  a.singular_point = x0;
  a.name = "log2d";
  a.s_value = [x0](const Vec3 &x) {
    const double rho = (x - x0).squaredNorm();
    return rho * std::log(rho);
  };
  a.s_gradient = [x0](const Vec3 &x) -> Vec3 {
    const Vec3 d = x - x0;
    return 2.0 * (std::log(d.squaredNorm()) + 1.0) * d;
  };
  a.s_hessian = [x0](const Vec3 &x) -> Mat3 {
    const Vec3 d = x - x0;
    const double rho = d.squaredNorm();
    return 2.0 * (std::log(rho) + 1.0) * Mat3::Identity() + (4.0 / rho) * (d * d.transpose());
  };
  return a;
}

/// s = |x - x0|; Delta s = 2 / |x - x0| in three dimensions.
inline SingularAugmentation inv_r(const Vec3 &x0) {
  SingularAugmentation a;
  a.singular_point = x0;
  a.name = "inv_r";
  a.s_value = [x0](const Vec3 &x) { return (x - x0).norm(); };
  a.s_gradient = [x0](const Vec3 &x) -> Vec3 { return (x - x0).normalized(); };
  a.s_hessian = [x0](const Vec3 &x) -> Mat3 {
    const Vec3 d = x - x0;
    const double r = d.norm();
    const Vec3 e = d / r;
    return (Mat3::Identity() - e * e.transpose()) / r;
  };
  return a;
}

} // namespace augmentations

inline SingularAugmentation augmentation_by_name(const std::string &name, const Vec3 &x0) {
  if (name == "log2d") return augmentations::log2d(x0);
  if (name == "inv_r") return augmentations::inv_r(x0);
  throw ConfigError("unknown augmentation '" + name + "'");
}

/// Splits F(u + s v) into a functional on u (F itself) and one on v obtained
/// from the Leibniz rule
///   F(s v) = sum_a c_a sum_{b <= a} binom(a, b) D^b s(anchor) D^{a-b} v.
inline std::pair<Functional, Functional> augment_rows(const Functional &f,
                                                      const SingularAugmentation &aug) {
  if ((f.anchor() - aug.singular_point).norm() == 0.0)
    throw FunctionalError("functional anchored at the singular point");
  const Jet s = aug.jet(f.anchor());
  Functional product(f.anchor(), {});
  for (const Term &t : f.terms()) {
    const MultiIndex &a = t.index;
    for (int b0 = 0; b0 <= a[0]; ++b0)
      for (int b1 = 0; b1 <= a[1]; ++b1)
        for (int b2 = 0; b2 <= a[2]; ++b2) {
          const MultiIndex b{b0, b1, b2};
          const MultiIndex rest{a[0] - b0, a[1] - b1, a[2] - b2};
          product.add(t.coefficient * multi_binomial(a, b) * s.derivative(b), rest);
        }
  }
  return {f, product};
}

} // namespace mfq
