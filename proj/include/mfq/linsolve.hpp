#pragma once

#include "mfq/fourier.hpp"
#include "mfq/operators.hpp"
#include "mfq/types.hpp"

#include <lapacke.h>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace mfq {

enum class SolvePath { v_path, phi_path };

/// Minimum-norm coefficients of V a = f.
///
/// For the kernel (Phi) path `coefficients` stays empty unless the caller
/// materialized V; `dual` and `functionals` then carry the solution.
template <class Scalar = double>
struct MinNormSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
  Eigen::Index rank_estimate = 0;
  SolvePath path = SolvePath::v_path;
  Eigen::VectorXd dual;
  std::vector<Functional> functionals;
};

inline constexpr double kDefaultRankTolerance = 1e-12;

namespace lapack {

inline int geqp3(int m, int n, double *a, int lda, int *jpvt, double *tau) {
  return LAPACKE_dgeqp3(LAPACK_COL_MAJOR, m, n, a, lda, jpvt, tau);
}
inline int geqp3(int m, int n, std::complex<double> *a, int lda, int *jpvt,
                 std::complex<double> *tau) {
  return LAPACKE_zgeqp3(LAPACK_COL_MAJOR, m, n, reinterpret_cast<lapack_complex_double *>(a),
                        lda, jpvt, reinterpret_cast<lapack_complex_double *>(tau));
}
// C <- Q C with Q from geqp3/geqrf.
inline int apply_q(int m, int n, int k, const double *a, int lda, const double *tau, double *c,
                   int ldc) {
  return LAPACKE_dormqr(LAPACK_COL_MAJOR, 'L', 'N', m, n, k, a, lda, tau, c, ldc);
}
inline int apply_q(int m, int n, int k, const std::complex<double> *a, int lda,
                   const std::complex<double> *tau, std::complex<double> *c, int ldc) {
  return LAPACKE_zunmqr(LAPACK_COL_MAJOR, 'L', 'N', m, n, k,
                        reinterpret_cast<const lapack_complex_double *>(a), lda,
                        reinterpret_cast<const lapack_complex_double *>(tau),
                        reinterpret_cast<lapack_complex_double *>(c), ldc);
}
inline int gels(int m, int n, int nrhs, double *a, int lda, double *b, int ldb) {
  return LAPACKE_dgels(LAPACK_COL_MAJOR, 'N', m, n, nrhs, a, lda, b, ldb);
}
inline int gels(int m, int n, int nrhs, std::complex<double> *a, int lda, std::complex<double> *b,
                int ldb) {
  return LAPACKE_zgels(LAPACK_COL_MAJOR, 'N', m, n, nrhs,
                       reinterpret_cast<lapack_complex_double *>(a), lda,
                       reinterpret_cast<lapack_complex_double *>(b), ldb);
}

} // namespace lapack

/// Complete orthogonal decomposition of V, computed as a column-pivoted QR of
/// V^*:  V^* P = Q [R11 R12; 0 0].  Reusable for several right-hand sides.
template <class Scalar = double>
class MinNormFactorization {
public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MinNormFactorization(const RowMatrix<Scalar> &V, double rank_tolerance = kDefaultRankTolerance)
      : rows_(V.rows()), cols_(V.cols()) {
    if (rows_ == 0) throw SolverError("empty constraint system");
    if (!(rank_tolerance > 0.0)) throw SolverError("rank tolerance must be positive");
    if (!V.allFinite()) throw SolverError("non-finite entries in the constraint matrix");
    // Row-major V is column-major V^T; conjugate to get V^*.
    a_.resize(cols_, rows_);
    a_ = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(V.data(), cols_,
                                                                                 rows_)
             .conjugate();
    k_ = std::min(rows_, cols_);
    jpvt_.assign(static_cast<std::size_t>(rows_), 0);
    tau_.resize(k_);
    const int info = lapack::geqp3(static_cast<int>(cols_), static_cast<int>(rows_), a_.data(),
                                   static_cast<int>(cols_), jpvt_.data(), tau_.data());
    if (info != 0) throw SolverError("pivoted QR failed (info " + std::to_string(info) + ")");
    const double r00 = std::abs(a_(0, 0));
    rank_ = 0;
    while (rank_ < k_ && std::abs(a_(rank_, rank_)) > rank_tolerance * r00) ++rank_;
    if (rank_ < rows_) {
      // Least-squares block [R11^*; R12^*] (rows x rank), factored once.
      ls_.resize(rows_, rank_);
      ls_.setZero();
      for (Eigen::Index j = 0; j < rank_; ++j)
        for (Eigen::Index i = j; i < rows_; ++i) ls_(i, j) = conj(a_(j, i));
    }
  }

  Eigen::Index rank() const { return rank_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

  Vector solve(const Eigen::VectorXd &f) const {
    if (f.size() != rows_) throw SolverError("right-hand side length mismatch");
    if (!f.allFinite()) throw SolverError("non-finite right-hand side");
    Vector pf(rows_);
    for (Eigen::Index i = 0; i < rows_; ++i) pf(i) = f(jpvt_[i] - 1);
    Vector y = Vector::Zero(cols_);
    if (rank_ == rows_) {
      // R11^* y1 = P^T f, lower triangular.
      const auto R = a_.topLeftCorner(rank_, rank_);
      y.head(rank_) = R.adjoint().template triangularView<Eigen::Lower>().solve(pf);
    } else if (rank_ > 0) {
      auto m = ls_;
      Vector b = pf;
      const int info = lapack::gels(static_cast<int>(rows_), static_cast<int>(rank_), 1, m.data(),
                                    static_cast<int>(rows_), b.data(), static_cast<int>(rows_));
      if (info != 0) throw SolverError("rank-deficient least squares failed");
      y.head(rank_) = b.head(rank_);
    }
    const int info = lapack::apply_q(static_cast<int>(cols_), 1, static_cast<int>(k_), a_.data(),
                                     static_cast<int>(cols_), tau_.data(), y.data(),
                                     static_cast<int>(cols_));
    if (info != 0) throw SolverError("applying Q failed");
    return y;
  }

private:
  static Scalar conj(Scalar v) {
    if constexpr (std::is_same_v<Scalar, double>) return v;
    else return std::conj(v);
  }

  Eigen::Index rows_, cols_, k_ = 0, rank_ = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ls_;
  std::vector<int> jpvt_;
  Vector tau_;
};

template <class Scalar>
MinNormSolution<Scalar> make_solution(const RowMatrix<Scalar> &V, const Eigen::VectorXd &f,
                                      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a,
                                      Eigen::Index rank) {
  MinNormSolution<Scalar> s;
  s.residual_norm = (V * a - f.template cast<Scalar>()).norm();
  s.solution_norm = a.norm();
  s.coefficients = std::move(a);
  s.rank_estimate = rank;
  s.path = SolvePath::v_path;
  return s;
}

/// Minimum-norm (least-squares over the revealed rank) solution of V a = f.
template <class Scalar>
MinNormSolution<Scalar> min_norm_solve(const RowMatrix<Scalar> &V, const Eigen::VectorXd &f,
                                       double rank_tolerance = kDefaultRankTolerance) {
  MinNormFactorization<Scalar> fac(V, rank_tolerance);
  return make_solution<Scalar>(V, f, fac.solve(f), fac.rank());
}

template <class Scalar>
MinNormSolution<Scalar> min_norm_solve(const ConstraintSystem<Scalar> &system,
                                       double rank_tolerance = kDefaultRankTolerance) {
  return min_norm_solve<Scalar>(system.V, system.targets, rank_tolerance);
}

/// Cholesky factorization of a kernel matrix with the diagonal jitter ladder
/// (1 + eps), eps in {0, 1e-14, 1e-12, 1e-10}.
class PhiFactorization {
public:
  explicit PhiFactorization(const Eigen::MatrixXd &phi) {
    if (phi.rows() == 0) throw SolverError("empty kernel matrix");
    if (!phi.allFinite()) throw SolverError("non-finite entries in the kernel matrix");
    for (double eps : {0.0, 1e-14, 1e-12, 1e-10}) {
      Eigen::MatrixXd m = phi;
      m.diagonal() *= (1.0 + eps);
      llt_.compute(m);
      if (llt_.info() == Eigen::Success) {
        jitter_ = eps;
        return;
      }
    }
    throw IllConditionedError(
        "kernel matrix is not numerically positive definite; use the rank-revealing V path");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd &f) const { return llt_.solve(f); }
  double jitter() const { return jitter_; }

private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// Kernel-path solve Phi beta = f; the solution is u = L^* beta.
inline MinNormSolution<double> phi_solve(std::vector<Functional> functionals,
                                         const Eigen::VectorXd &targets,
                                         const FourierBasis &basis, bool materialize = false) {
  if (static_cast<Eigen::Index>(functionals.size()) != targets.size())
    throw ConfigError("functional and target counts differ");
  const Eigen::MatrixXd phi = assemble_phi(functionals, basis);
  const PhiFactorization fac(phi);
  MinNormSolution<double> s;
  s.path = SolvePath::phi_path;
  s.dual = fac.solve(targets);
  s.residual_norm = (phi * s.dual - targets).norm();
  s.solution_norm = std::sqrt(std::max(0.0, targets.dot(s.dual)));
  s.rank_estimate = phi.rows();
  if (materialize) {
    RowMatrix<double> V(static_cast<Eigen::Index>(functionals.size()), basis.mode_count());
    assemble_rows<double>(basis, functionals, V);
    s.coefficients = V.transpose() * s.dual;
  }
  s.functionals = std::move(functionals);
  return s;
}

/// Probe values F(u) for a V-path solution (u-block plus the s v block when
/// augmented) or a kernel-path solution.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1>
evaluate_solution(const FourierBasis &basis, const std::optional<SingularAugmentation> &aug,
                  const MinNormSolution<Scalar> &solution, std::span<const Functional> probes) {
  const Eigen::Index np = static_cast<Eigen::Index>(probes.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(np);
  if (np == 0) return out;
  for (const Functional &f : probes) basis.require_inside(f.anchor());

  if (solution.path == SolvePath::phi_path && solution.coefficients.size() == 0) {
    if constexpr (std::is_same_v<Scalar, double>) {
      return assemble_phi(probes, solution.functionals, basis) * solution.dual;
    } else {
      throw SolverError("kernel-path evaluation is real-valued");
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(basis.mode_count());
  const bool augmented = aug.has_value();
  if (solution.coefficients.size() != (augmented ? 2 * m : m))
    throw SolverError("solution does not match the basis");
  const Eigen::Index block = 256;
  for (Eigen::Index b0 = 0; b0 < np; b0 += block) {
    const Eigen::Index bn = std::min(block, np - b0);
    const auto chunk = probes.subspan(static_cast<std::size_t>(b0), static_cast<std::size_t>(bn));
    RowMatrix<Scalar> rows(bn, m);
    assemble_rows<Scalar>(basis, chunk, rows);
    out.segment(b0, bn) = rows * solution.coefficients.head(m);
    if (augmented) {
      std::vector<Functional> prod;
      prod.reserve(chunk.size());
      for (const Functional &f : chunk) prod.push_back(augment_rows(f, *aug).second);
      assemble_rows<Scalar>(basis, prod, rows);
      out.segment(b0, bn) += rows * solution.coefficients.tail(m);
    }
  }
  return out;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_solution(const ConstraintSystem<Scalar> &system,
                                                           const MinNormSolution<Scalar> &solution,
                                                           std::span<const Functional> probes) {
  return evaluate_solution<Scalar>(system.basis, system.augmentation, solution, probes);
}

} // namespace mfq
