#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace mfq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A sample on a surface (or flat domain, normal = e_z): position, unit
/// normal and, when known, the curvature sum kappa = div(n).
struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  std::optional<double> curvature_sum;
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Newton projection onto a level set did not reach tolerance.
class ProjectionError : public Error {
public:
  ProjectionError(const std::string &what, Vec3 last_iterate, double residual)
      : Error(what), last_iterate_(last_iterate), residual_(residual) {}

  const Vec3 &last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

private:
  Vec3 last_iterate_;
  double residual_;
};

/// The level-set gradient vanishes where a normal is required.
class DegeneratePointError : public Error {
public:
  using Error::Error;
};

class SamplingError : public Error {
public:
  using Error::Error;
};

/// A boundary curve component is too sparsely sampled (or tangent).
class ComponentError : public Error {
public:
  using Error::Error;
};

/// Invalid functional or augmentation input.
class FunctionalError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

/// Symmetric factorization of the kernel matrix failed even with jitter.
class IllConditionedError : public SolverError {
public:
  using SolverError::SolverError;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace mfq
