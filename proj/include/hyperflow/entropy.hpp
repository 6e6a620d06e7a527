#pragma once

#include <cmath>

#include "hyperflow/errors.hpp"
#include "hyperflow/state.hpp"

namespace hyperflow {

/// Relative entropy V(x) = sum_i x_i log(x_i / v_i) >= 0.
inline double entropy(const StateVector& x, const StateVector& v) {
  if (x.size() != v.size()) throw ValidationError("entropy: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += x[i] * std::log(x[i] / v[i]);
  return s;
}

/// grad V(x) = log(x / v) + 1.
inline Vector entropy_gradient(const StateVector& x, const StateVector& v) {
  if (x.size() != v.size()) throw ValidationError("entropy: dimension mismatch");
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) g[i] = std::log(x[i] / v[i]) + 1.0;
  return g;
}

}  // namespace hyperflow
