#pragma once

// Two independent routes to the equilibrium: ratio propagation through the
// detailed-balance relations, and damped Newton on the reduced field
// F(y) = U^T f(x0 + U y).

#include <cmath>
#include <map>
#include <queue>

#include <Eigen/LU>

#include "hyperflow/dynamics.hpp"
#include "hyperflow/hypergraph.hpp"
#include "hyperflow/tangent.hpp"

namespace hyperflow {

/// Builds v from the balance ratios v_i / v_k = a_{ikI} / a_{kiI}, propagated
/// breadth-first from node 1 and normalized. Requires a strongly connected
/// support graph and consistent ratios on every entry pair.
inline StateVector equilibrium_from_tgdb(const HyperTensorSet& tensors) {
  const int n = tensors.size();
  const SupportGraph g = support_graph(tensors);
  if (!is_connected(g, ConnectivityMode::strong))
    throw ConnectivityError(
        "support graph is not strongly connected; the detailed-balance equalities have no unique "
        "solution");

  // log(v_i / v_k) for each ordered pair (i, k) with a positive entry pair
  std::vector<std::map<int, double>> log_ratio(n);
  for (const auto& e : tensors.entries()) {
    if (e.weight <= 0.0) continue;
    const double back = tensors.weight(e.key().reversed()).value_or(0.0);
    if (back <= 0.0)
      throw StructuralError("entry " + describe(e.key()) +
                            " has no positive reverse entry; no positive balance reference exists");
    log_ratio[e.head].emplace(e.tail, std::log(e.weight / back));
  }

  Vector lv = Vector::Zero(n);
  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  seen[0] = true;
  frontier.push(0);
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop();
    for (int i = 0; i < n; ++i) {
      if (seen[i]) continue;
      auto it = log_ratio[i].find(k);
      if (it == log_ratio[i].end()) continue;
      lv[i] = lv[k] + it->second;
      seen[i] = true;
      frontier.push(i);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw ConnectivityError("ratio propagation did not reach node " + std::to_string(i + 1));

  Vector v = (lv.array() - lv.maxCoeff()).exp();
  v /= v.sum();
  v /= v.sum();
  StateVector candidate(v);

  const TgdbReport report = check_tgdb(tensors, candidate);
  if (!report.holds)
    throw StructuralError("balance ratios are inconsistent around a cycle (max residual " +
                          std::to_string(report.max_residual) + ")");
  const double residual = detail::raw_field(tensors, v).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10)
    throw NumericalError("ratio equilibrium fails the field check, ||f(v)|| = " + std::to_string(residual));
  return candidate;
}

struct NewtonResult {
  StateVector x;
  int iterations = 0;
  double residual = 0.0;  // ||f(x)||_inf
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
  double interior_floor = 1e-10;
};

inline NewtonResult equilibrium_newton(const HyperTensorSet& tensors, const StateVector& x_init,
                                       const NewtonOptions& opts = {}) {
  const int n = tensors.size();
  detail::check_dimension(tensors, x_init.values());
  const Matrix U = tangent_basis(n).U;
  Vector x = x_init.values();

  Vector f = detail::raw_field(tensors, x);
  for (int it = 0; it <= opts.max_iter; ++it) {
    const double r = f.lpNorm<Eigen::Infinity>();
    if (r <= opts.tol) return NewtonResult{StateVector(x), it, r};
    if (it == opts.max_iter) break;

    const Matrix jt = U.transpose() * jacobian(tensors, StateVector::unchecked(x)) * U;
    Eigen::FullPivLU<Matrix> lu(jt);
    if (!lu.isInvertible()) throw NumericalError("Newton: reduced Jacobian is singular");
    const Vector reduced = U.transpose() * f;
    const Vector step = U * lu.solve(-reduced);

    // backtrack until the iterate is interior and the reduced residual drops
    const double merit = reduced.norm();
    double s = 1.0;
    bool accepted = false;
    bool interior_seen = false;
    for (int halvings = 0; halvings < 60; ++halvings, s *= 0.5) {
      const Vector cand = x + s * step;
      if (cand.minCoeff() < opts.interior_floor) continue;
      interior_seen = true;
      const Vector fc = detail::raw_field(tensors, cand);
      if ((U.transpose() * fc).norm() <= (1.0 - 1e-4 * s) * merit) {
        x = cand;
        f = fc;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!interior_seen) throw NumericalError("Newton: iterate leaves the open simplex despite damping");
      throw NumericalError("Newton: line search stalled at residual " + std::to_string(r));
    }
  }
  throw NumericalError("Newton: no convergence within " + std::to_string(opts.max_iter) + " iterations");
}

}  // namespace hyperflow
