#pragma once

#include <cmath>

#include "hyperflow/errors.hpp"
#include "hyperflow/state.hpp"

namespace hyperflow {

/// Orthonormal basis U of the zero-sum subspace and the projector
/// P = I - 1 1^T / n, with U^T U = I and U U^T = P.
struct TangentBasis {
  Matrix U;
  Matrix P;
};

/// Helmert construction: column j (0-based) has 1/sqrt((j+1)(j+2)) in its
/// first j+1 rows and -(j+1)/sqrt((j+1)(j+2)) in row j+1.
inline TangentBasis tangent_basis(int n) {
  if (n < 2) throw ValidationError("tangent basis needs n >= 2");
  TangentBasis b;
  b.U = Matrix::Zero(n, n - 1);
  for (int j = 0; j < n - 1; ++j) {
    const double m = j + 1.0;
    const double scale = 1.0 / std::sqrt(m * (m + 1.0));
    for (int i = 0; i <= j; ++i) b.U(i, j) = scale;
    b.U(j + 1, j) = -m * scale;
  }
  b.P = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  return b;
}

}  // namespace hyperflow
