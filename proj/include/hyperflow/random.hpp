#pragma once

#include <cstdint>
#include <random>

#include "hyperflow/state.hpp"

namespace hyperflow {

using Rng = std::mt19937_64;

// Independent stream seeds from a master seed (one splitmix64 round).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// "Random point of the simplex": i.i.d. uniform (0, 1] coordinates
/// normalized to unit mass.
inline StateVector sample_simplex(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) {
    double s = u(rng);
    x[i] = s > 0.0 ? s : 1e-300;
  }
  x /= x.sum();
  // renormalized twice so the mass residual stays at rounding level
  x /= x.sum();
  return StateVector(x);
}

}  // namespace hyperflow
