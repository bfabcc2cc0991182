#pragma once

#include "mfq/operators.hpp"
#include "mfq/types.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

namespace mfq {

using Complex = std::complex<double>;

template <class Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Axis-aligned periodicity box in the first `dim` coordinates (dim 2 or 3).
struct BoxDomain {
  int dim = 3;
  Vec3 center = Vec3::Zero();
  Vec3 side_lengths = Vec3::Ones();

  static BoxDomain cube(int dim, double lo, double hi) {
    BoxDomain b;
    b.dim = dim;
    b.center = Vec3::Constant(0.5 * (lo + hi));
    b.side_lengths = Vec3::Constant(hi - lo);
    if (dim == 2) b.center.z() = 0.0;
    return b;
  }

  bool contains(const Vec3 &x) const {
    for (int a = 0; a < dim; ++a)
      if (!(std::abs(x[a] - center[a]) < 0.5 * side_lengths[a])) return false;
    return true;
  }
};

enum class WeightMode { separable, joint };

/// Truncated periodic Fourier basis d_n^{-1/2} exp(i w_n.(x - c)) on a box,
/// with k = -N..N per axis and w = 2 pi k / L.
///
/// separable: d_n = prod_axis (e^{q sqrt(2pi/T)} + e^{q sqrt|w_axis|})^2
/// joint:     d_n = (e^{q sqrt(2pi/T)} + e^{q sqrt|w_n|})^2
class FourierBasis {
public:
  FourierBasis() = default;
  FourierBasis(BoxDomain box, int modes_per_axis, double q, double T,
               WeightMode mode = WeightMode::joint, double d_scale = 1.0)
      : box_(box), n_(modes_per_axis), q_(q), T_(T), mode_(mode), d_scale_(d_scale) {
    if (box.dim != 2 && box.dim != 3) throw ConfigError("basis dimension must be 2 or 3");
    if (modes_per_axis < 0) throw ConfigError("negative mode count");
    if (!(d_scale > 0.0)) throw ConfigError("weight scale must be positive");
    for (int a = 0; a < box.dim; ++a)
      if (!(box.side_lengths[a] > 0.0)) throw ConfigError("box side lengths must be positive");
  }

  const BoxDomain &box() const { return box_; }
  int dim() const { return box_.dim; }
  int modes_per_axis() const { return n_; }
  int axis_count() const { return 2 * n_ + 1; }
  double q() const { return q_; }
  double T() const { return T_; }
  WeightMode weight_mode() const { return mode_; }
  double d_scale() const { return d_scale_; }

  std::int64_t mode_count() const {
    std::int64_t m = 1;
    for (int a = 0; a < dim(); ++a) m *= axis_count();
    return m;
  }

  double omega(int axis, int k) const {
    if (axis >= dim()) return 0.0;
    return 2.0 * std::numbers::pi * k / box_.side_lengths[axis];
  }

  /// One factor (e^{q sqrt(2pi/T)} + e^{q sqrt|w|})^2 of the weight.
  double factor(double w) const {
    const double a = std::exp(q_ * std::sqrt(2.0 * std::numbers::pi / T_)) +
                     std::exp(q_ * std::sqrt(std::abs(w)));
    return a * a;
  }

  /// Per-axis separable factor (dim <= axis gives 1).
  double axis_weight(int axis, int k) const {
    if (axis >= dim()) return 1.0;
    return factor(omega(axis, k));
  }

  /// Multi-index k (with k_z = 0 in 2-D) of mode n; the last axis runs fastest.
  std::array<int, 3> mode_index(std::int64_t n) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = dim() - 1; a >= 0; --a) {
      k[a] = static_cast<int>(n % axis_count()) - n_;
      n /= axis_count();
    }
    return k;
  }

  Vec3 frequency(const std::array<int, 3> &k) const {
    return {omega(0, k[0]), omega(1, k[1]), omega(2, k[2])};
  }

  double weight(const std::array<int, 3> &k) const {
    if (mode_ == WeightMode::separable) {
      double d = d_scale_;
      for (int a = 0; a < dim(); ++a) d *= axis_weight(a, k[a]);
      return d;
    }
    return d_scale_ * factor(frequency(k).norm());
  }

  double weight(std::int64_t n) const { return weight(mode_index(n)); }

  /// True when the anchor lies strictly inside the box.
  void require_inside(const Vec3 &x) const {
    if (!box_.contains(x)) throw DomainError("anchor outside the basis box");
  }

private:
  BoxDomain box_;
  int n_ = 0;
  double q_ = 1.0;
  double T_ = 1.0;
  WeightMode mode_ = WeightMode::joint;
  double d_scale_ = 1.0;
};

/// sum_k d_k^{-1} (i w_k)^p (-i w_k)^q e^{i w_k delta}.
inline Complex kernel_1d(std::span<const double> omegas, std::span<const double> weights,
                         int p, int q, double delta) {
  const Complex I(0.0, 1.0);
  Complex s = 0.0;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const double w = omegas[k];
    s += std::pow(I * w, p) * std::pow(-I * w, q) * std::exp(I * w * delta) / weights[k];
  }
  return s;
}

namespace detail {

/// Fourier symbol of a functional, sum_a c_a (i w)^a, split into real and
/// imaginary parts (even / odd total degree).
struct Symbol {
  struct Entry {
    double coefficient; // includes the sign of i^{|a|}
    MultiIndex index;
    bool imaginary;
  };
  std::vector<Entry> entries;

  explicit Symbol(const Functional &f) {
    for (const Term &t : f.terms()) {
      const int deg = degree(t.index);
      // i^deg: 1, i, -1, -i
      const double sign = (deg % 4 == 2 || deg % 4 == 3) ? -1.0 : 1.0;
      entries.push_back({sign * t.coefficient, t.index, deg % 2 == 1});
    }
  }

  Complex at(const Vec3 &w) const {
    double re = 0.0, im = 0.0;
    for (const Entry &e : entries) {
      double m = e.coefficient;
      for (int a = 0; a < 3; ++a)
        for (int r = 0; r < e.index[a]; ++r) m *= w[a];
      (e.imaginary ? im : re) += m;
    }
    return {re, im};
  }
};

/// Per-axis tables of exp(i w_k (x_a - c_a)) and powers of w_k.
struct AxisTables {
  std::array<std::vector<Complex>, 3> phase;
  std::array<std::vector<double>, 3> omega;
};

inline AxisTables axis_tables(const FourierBasis &basis, const Vec3 &x) {
  AxisTables t;
  const int K = basis.axis_count();
  for (int a = 0; a < 3; ++a) {
    const int len = a < basis.dim() ? K : 1;
    t.phase[a].resize(len);
    t.omega[a].resize(len);
    for (int i = 0; i < len; ++i) {
      const int k = a < basis.dim() ? i - basis.modes_per_axis() : 0;
      const double w = basis.omega(a, k);
      t.omega[a][i] = w;
      const double arg = w * (x[a] - basis.box().center[a]);
      t.phase[a][i] = Complex(std::cos(arg), std::sin(arg));
    }
  }
  return t;
}

/// Inverse square-root weights in mode order.
inline std::vector<double> inv_sqrt_weights(const FourierBasis &basis) {
  std::vector<double> w(static_cast<std::size_t>(basis.mode_count()));
  for (std::int64_t n = 0; n < basis.mode_count(); ++n) w[n] = 1.0 / std::sqrt(basis.weight(n));
  return w;
}

/// Calls fn(n, k, F[e^{i w_n.(x-c)}](anchor)) for every mode.
template <class Fn>
void for_each_mode_value(const FourierBasis &basis, const Functional &f, Fn &&fn) {
  const Symbol sym(f);
  const AxisTables t = axis_tables(basis, f.anchor());
  const int K0 = static_cast<int>(t.phase[0].size());
  const int K1 = static_cast<int>(t.phase[1].size());
  const int K2 = static_cast<int>(t.phase[2].size());
  std::int64_t n = 0;
  for (int i = 0; i < K0; ++i)
    for (int j = 0; j < K1; ++j) {
      const Complex e01 = t.phase[0][i] * t.phase[1][j];
      for (int l = 0; l < K2; ++l, ++n) {
        const Vec3 w(t.omega[0][i], t.omega[1][j], t.omega[2][l]);
        fn(n, sym.at(w) * (e01 * t.phase[2][l]));
      }
    }
}

/// True when mode n is the zero mode or the "positive" member of its +/- pair.
inline int mode_sign(const std::array<int, 3> &k) {
  for (int a = 0; a < 3; ++a) {
    if (k[a] > 0) return 1;
    if (k[a] < 0) return -1;
  }
  return 0;
}

} // namespace detail

/// Writes one row of V per functional into `out` (rows x mode_count).
///
/// Complex scalar: entry n is d_n^{-1/2} F[e^{i w_n.(x-c)}].
/// Real scalar: the equivalent real orthonormal basis; the zero mode gives one
/// column, each +/- pair gives sqrt(2) cos and sqrt(2) sin columns, in mode
/// order of the positive member.
template <class Scalar, class Derived>
void assemble_rows(const FourierBasis &basis, std::span<const Functional> functionals,
                   Eigen::MatrixBase<Derived> &out, bool check_box = true) {
  const std::vector<double> isd = detail::inv_sqrt_weights(basis);
  std::vector<std::int64_t> real_col;
  if constexpr (!std::is_same_v<Scalar, Complex>) {
    real_col.assign(isd.size(), -1);
    std::int64_t c = 0;
    for (std::int64_t n = 0; n < basis.mode_count(); ++n) {
      const int sgn = detail::mode_sign(basis.mode_index(n));
      if (sgn == 0) real_col[n] = c++;
      else if (sgn > 0) {
        real_col[n] = c;
        c += 2;
      }
    }
  }
  for (std::size_t r = 0; r < functionals.size(); ++r) {
    if (check_box) basis.require_inside(functionals[r].anchor());
    auto row = out.row(static_cast<Eigen::Index>(r));
    if constexpr (std::is_same_v<Scalar, Complex>) {
      detail::for_each_mode_value(basis, functionals[r],
                                  [&](std::int64_t n, Complex v) { row(n) = isd[n] * v; });
    } else {
      const double rt2 = std::numbers::sqrt2;
      detail::for_each_mode_value(basis, functionals[r], [&](std::int64_t n, Complex v) {
        const std::int64_t c = real_col[n];
        if (c < 0) return;
        if (n == (basis.mode_count() - 1) / 2) {
          row(c) = isd[n] * v.real();
        } else {
          row(c) = rt2 * isd[n] * v.real();
          row(c + 1) = rt2 * isd[n] * v.imag();
        }
      });
    }
  }
}

/// Constraint system V a = f for a basis (optionally augmented by s v).
///
/// With an augmentation the columns are [u-block | v-block]; the v-block is
/// the Leibniz-expanded functional applied to the same weighted basis.
template <class Scalar>
struct ConstraintSystem {
  std::vector<Functional> functionals;
  std::vector<Functional> product_functionals;
  Eigen::VectorXd targets;
  FourierBasis basis;
  std::optional<SingularAugmentation> augmentation;
  RowMatrix<Scalar> V;

  Eigen::Index rows() const { return V.rows(); }
  Eigen::Index block_columns() const { return static_cast<Eigen::Index>(basis.mode_count()); }
};

template <class Scalar = double>
ConstraintSystem<Scalar> assemble_system(std::vector<Functional> functionals,
                                         const Eigen::VectorXd &targets, const FourierBasis &basis,
                                         std::optional<SingularAugmentation> augmentation = {}) {
  if (static_cast<Eigen::Index>(functionals.size()) != targets.size())
    throw ConfigError("functional and target counts differ");
  ConstraintSystem<Scalar> sys;
  sys.basis = basis;
  sys.targets = targets;
  sys.augmentation = std::move(augmentation);
  const Eigen::Index m = static_cast<Eigen::Index>(basis.mode_count());
  const Eigen::Index rows = static_cast<Eigen::Index>(functionals.size());
  for (const Functional &f : functionals) basis.require_inside(f.anchor());
  if (sys.augmentation) {
    for (const Functional &f : functionals)
      sys.product_functionals.push_back(augment_rows(f, *sys.augmentation).second);
  }
  sys.V.resize(rows, sys.augmentation ? 2 * m : m);
  auto left = sys.V.leftCols(m);
  assemble_rows<Scalar>(basis, functionals, left);
  if (sys.augmentation) {
    auto right = sys.V.rightCols(m);
    assemble_rows<Scalar>(basis, sys.product_functionals, right);
  }
  sys.functionals = std::move(functionals);
  return sys;
}

/// Counters filled by assemble_phi when requested.
struct PhiStats {
  std::int64_t kernel_terms = 0; // per-axis (anchor pair, mode) products evaluated
  bool separable_path = false;
};

namespace detail {

inline std::vector<Vec3> unique_anchors(std::span<const Functional> fs, std::vector<int> &id) {
  std::map<std::array<double, 3>, int> seen;
  std::vector<Vec3> anchors;
  id.resize(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Vec3 &x = fs[i].anchor();
    const std::array<double, 3> key{x[0], x[1], x[2]};
    auto [it, inserted] = seen.try_emplace(key, static_cast<int>(anchors.size()));
    if (inserted) anchors.push_back(x);
    id[i] = it->second;
  }
  return anchors;
}

} // namespace detail

/// Gram matrix Phi_jk = sum_n d_n^{-1} F_j[phi_n] conj(G_k[phi_n]) between two
/// functional lists (Phi = V V^* when both lists coincide).
///
/// Separable weights use per-axis one-dimensional kernels, so each anchor pair
/// costs O(dim (2N+1)) instead of O((2N+1)^dim); joint weights fall back to
/// the materialized real rows.
inline Eigen::MatrixXd assemble_phi(std::span<const Functional> rows_a,
                                    std::span<const Functional> rows_b, const FourierBasis &basis,
                                    PhiStats *stats = nullptr) {
  const Eigen::Index na = static_cast<Eigen::Index>(rows_a.size());
  const Eigen::Index nb = static_cast<Eigen::Index>(rows_b.size());
  Eigen::MatrixXd phi(na, nb);
  for (const Functional &f : rows_a) basis.require_inside(f.anchor());
  for (const Functional &f : rows_b) basis.require_inside(f.anchor());

  if (basis.weight_mode() == WeightMode::joint) {
    RowMatrix<double> va(na, basis.mode_count()), vb(nb, basis.mode_count());
    assemble_rows<double>(basis, rows_a, va);
    assemble_rows<double>(basis, rows_b, vb);
    phi.noalias() = va * vb.transpose();
    if (stats) {
      stats->separable_path = false;
      stats->kernel_terms += na * nb * basis.mode_count();
    }
    return phi;
  }

  std::vector<int> ida, idb;
  const std::vector<Vec3> xa = detail::unique_anchors(rows_a, ida);
  const std::vector<Vec3> xb = detail::unique_anchors(rows_b, idb);
  const int dim = basis.dim();
  const int K = basis.axis_count();
  int max_order_a = 0, max_order_b = 0;
  for (const Functional &f : rows_a) max_order_a = std::max(max_order_a, f.order());
  for (const Functional &f : rows_b) max_order_b = std::max(max_order_b, f.order());
  const int max_r = max_order_a + max_order_b;

  // Per axis: cos/sin tables (anchors x modes) and weighted powers w^r / d.
  std::array<Eigen::MatrixXd, 3> ca, sa, cb, sb;
  std::array<std::vector<Eigen::VectorXd>, 3> wr;
  for (int a = 0; a < dim; ++a) {
    auto fill = [&](const std::vector<Vec3> &xs, Eigen::MatrixXd &c, Eigen::MatrixXd &s) {
      c.resize(static_cast<Eigen::Index>(xs.size()), K);
      s.resize(static_cast<Eigen::Index>(xs.size()), K);
      for (std::size_t j = 0; j < xs.size(); ++j)
        for (int i = 0; i < K; ++i) {
          const double arg = basis.omega(a, i - basis.modes_per_axis()) *
                             (xs[j][a] - basis.box().center[a]);
          c(static_cast<Eigen::Index>(j), i) = std::cos(arg);
          s(static_cast<Eigen::Index>(j), i) = std::sin(arg);
        }
    };
    fill(xa, ca[a], sa[a]);
    fill(xb, cb[a], sb[a]);
    wr[a].resize(max_r + 1);
    for (int r = 0; r <= max_r; ++r) {
      wr[a][r].resize(K);
      for (int i = 0; i < K; ++i) {
        const int k = i - basis.modes_per_axis();
        const double w = basis.omega(a, k);
        wr[a][r][i] = std::pow(w, r) / basis.axis_weight(a, k);
      }
    }
  }
  const double scale = 1.0 / basis.d_scale();

  // Functionals grouped by anchor block.
  const Eigen::Index block = 256;
  const Eigen::Index nxa = static_cast<Eigen::Index>(xa.size());
  const Eigen::Index nxb = static_cast<Eigen::Index>(xb.size());
  std::vector<std::vector<Eigen::Index>> rows_of_anchor(xa.size());
  for (Eigen::Index i = 0; i < na; ++i) rows_of_anchor[ida[i]].push_back(i);

  for (Eigen::Index b0 = 0; b0 < nxa; b0 += block) {
    const Eigen::Index bn = std::min(block, nxa - b0);
    // R[a][r](j, k): sum_i w^r/d cos (r even) or sin (r odd) of w (x_j - x_k).
    std::array<std::vector<Eigen::MatrixXd>, 3> R;
    for (int a = 0; a < dim; ++a) {
      R[a].resize(max_r + 1);
      const auto cblk = ca[a].middleRows(b0, bn);
      const auto sblk = sa[a].middleRows(b0, bn);
      for (int r = 0; r <= max_r; ++r) {
        const auto W = wr[a][r].asDiagonal();
        if (r % 2 == 0)
          R[a][r].noalias() = cblk * W * cb[a].transpose() + sblk * W * sb[a].transpose();
        else
          R[a][r].noalias() = sblk * W * cb[a].transpose() - cblk * W * sb[a].transpose();
        if (stats) stats->kernel_terms += bn * nxb * K;
      }
    }
    for (Eigen::Index ja = b0; ja < b0 + bn; ++ja) {
      for (Eigen::Index ra : rows_of_anchor[ja]) {
        const Functional &fa = rows_a[ra];
        for (Eigen::Index rb = 0; rb < nb; ++rb) {
          const Functional &fb = rows_b[rb];
          const Eigen::Index kb = idb[rb];
          double v = 0.0;
          for (const Term &ta : fa.terms())
            for (const Term &tb : fb.terms()) {
              bool zero = false;
              int parity = 0;
              double prod = ta.coefficient * tb.coefficient;
              for (int a = 0; a < 3 && !zero; ++a) {
                const int r = ta.index[a] + tb.index[a];
                if (a >= dim) {
                  zero = r > 0;
                  continue;
                }
                parity += r % 2;
                prod *= R[a][r](ja - b0, kb);
              }
              if (zero) continue;
              const int e = degree(ta.index) + 3 * degree(tb.index) + parity;
              v += ((e / 2) % 2 == 0 ? prod : -prod);
            }
          phi(ra, rb) = scale * v;
        }
      }
    }
  }
  if (stats) stats->separable_path = true;
  return phi;
}

inline Eigen::MatrixXd assemble_phi(std::span<const Functional> rows, const FourierBasis &basis,
                                    PhiStats *stats = nullptr) {
  return assemble_phi(rows, rows, basis, stats);
}

} // namespace mfq
