#pragma once

// Replicator dynamics dx_i/dt = x_i (f_i(x) - fbar(x)) embedded in generator
// form through the kernel Q_{k->i}(x) := x_i f_i(x).

#include <map>
#include <vector>

#include "hyperflow/dynamics.hpp"
#include "hyperflow/random.hpp"

namespace hyperflow {

struct FitnessTerm {
  double coeff = 0.0;
  std::vector<int> vars;  // monomial prod_{j in vars} x_j; empty means constant
};

/// Polynomial fitness functions, one list of monomials per node.
using PolynomialFitness = std::vector<std::vector<FitnessTerm>>;

inline double evaluate_fitness(const std::vector<FitnessTerm>& terms, const Vector& x) {
  double f = 0.0;
  for (const auto& t : terms) f += t.coeff * detail::monomial(t.vars, x);
  return f;
}

struct ReplicatorEmbedding {
  PolynomialFitness fitness;
  HyperTensorSet tensors;  // signed in general: coefficients may be negative

  int size() const { return tensors.size(); }

  double rate(int i, int k, const StateVector& x) const { return rate_kernel(tensors, i, k, x); }

  /// Generator field evaluated through the tensor kernels.
  Vector generator_field(const StateVector& x) const { return vector_field(tensors, x).values(); }

  /// The replicator right-hand side evaluated directly.
  Vector replicator_field(const StateVector& x) const {
    const Vector& xv = x.values();
    Vector f(xv.size());
    for (int i = 0; i < xv.size(); ++i) f[i] = evaluate_fitness(fitness[i], xv);
    const double mean = xv.dot(f);
    return xv.cwiseProduct(f - Vector::Constant(xv.size(), mean));
  }
};

/// Builds the embedding. Order of each generated entry is 2 + deg(monomial):
/// the kernel x_i prod_I x_j has tail (k, i, I). Rejects fitness functions for
/// which some sampled x_i f_i(x) is negative, since the kernel must be
/// nonnegative on the simplex.
inline ReplicatorEmbedding embed_replicator(const PolynomialFitness& fitness, std::uint64_t seed = 7,
                                            int samples = 512) {
  const int n = static_cast<int>(fitness.size());
  if (n < 2) throw ValidationError("replicator embedding needs at least two nodes");
  for (const auto& terms : fitness)
    for (const auto& t : terms)
      for (int j : t.vars)
        if (j < 0 || j >= n) throw ValidationError("fitness monomial index out of range");

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const StateVector x = sample_simplex(n, rng);
    for (int i = 0; i < n; ++i)
      if (x[i] * evaluate_fitness(fitness[i], x.values()) < 0.0)
        throw ValidationError("replicator embedding: kernel x_i f_i(x) is negative for node " +
                              std::to_string(i + 1) + " at a sampled state");
  }

  std::vector<HyperEdge> entries;
  for (int i = 0; i < n; ++i) {
    std::map<std::vector<int>, double> merged;
    for (const auto& t : fitness[i]) merged[t.vars] += t.coeff;
    for (const auto& [vars, coeff] : merged) {
      if (coeff == 0.0) continue;
      std::vector<int> rest{i};
      rest.insert(rest.end(), vars.begin(), vars.end());
      for (int k = 0; k < n; ++k)
        if (k != i) entries.push_back(HyperEdge{static_cast<int>(rest.size()) + 1, i, k, rest, coeff});
    }
  }
  return ReplicatorEmbedding{fitness, HyperTensorSet::direction(n, std::move(entries))};
}

}  // namespace hyperflow
