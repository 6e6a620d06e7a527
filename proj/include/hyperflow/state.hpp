#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hyperflow/errors.hpp"

namespace hyperflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the open probability simplex: strictly positive, unit mass.
class StateVector {
 public:
  static constexpr double kMassTolerance = 1e-12;

  explicit StateVector(Vector values) : values_(std::move(values)) {
    if (values_.size() == 0) throw ValidationError("state vector is empty");
    if (!values_.allFinite()) throw ValidationError("state vector has non-finite entries");
    if (values_.minCoeff() <= 0.0)
      throw ValidationError("state vector must be strictly positive (min = " +
                            std::to_string(values_.minCoeff()) + ")");
    const double mass = values_.sum();
    if (std::abs(mass - 1.0) > kMassTolerance)
      throw ValidationError("state vector must have unit mass (sum - 1 = " +
                            std::to_string(mass - 1.0) + ")");
  }

  // Skips the simplex checks. Used for boundary evaluation in tests and for
  // Newton/finite-difference probes that are not states in their own right.
  static StateVector unchecked(Vector values) {
    StateVector s;
    s.values_ = std::move(values);
    return s;
  }

  static StateVector uniform(int n) { return StateVector(Vector::Constant(n, 1.0 / n)); }

  const Vector& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

 private:
  StateVector() = default;
  Vector values_;
};

/// A zero-sum direction, an element of the tangent space of the simplex.
/// The zero-sum check is relative to the l1 size of the vector, since
/// accumulated flows cancel only to rounding of their own magnitude.
class TangentVector {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit TangentVector(Vector values) : values_(std::move(values)) {
    const double scale = std::max(1.0, values_.cwiseAbs().sum());
    if (std::abs(values_.sum()) > kSumTolerance * scale)
      throw ValidationError("tangent vector must sum to zero (sum = " +
                            std::to_string(values_.sum()) + ")");
  }

  static TangentVector zero(int n) { return TangentVector(Vector::Zero(n)); }

  const Vector& values() const noexcept { return values_; }
  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i) const { return values_[i]; }

 private:
  Vector values_;
};

}  // namespace hyperflow
