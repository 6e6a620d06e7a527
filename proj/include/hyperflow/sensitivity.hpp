#pragma once

// First-order equilibrium sensitivity to a tensor perturbation dA:
//
//   v~ - v = -U J_T^{-1} U^T f(v; dA) + O(||dA||^2),   J_T = U^T J(v) U,
//
// compared against the equilibrium of A + dA found by Newton from v.

#include <set>

#include <Eigen/SVD>

#include "hyperflow/certificate.hpp"
#include "hyperflow/equilibrium.hpp"

namespace hyperflow {

/// Operator norm of the linear map dA -> f(x; dA) restricted to tensors with
/// the coefficient pattern (key set) of `pattern`. Column e of the map is
/// (x_t prod_I x_j) (e_head - e_tail), so the norm is the largest singular
/// value of an n x |pattern| matrix.
inline double tensor_gain(const HyperTensorSet& pattern, const StateVector& x) {
  const int n = pattern.size();
  const auto& entries = pattern.entries();
  if (entries.empty()) return 0.0;
  // M M^T is n x n and cheaper than the wide SVD
  Matrix gram = Matrix::Zero(n, n);
  for (const auto& e : entries) {
    const double m = detail::monomial(e.rest, x.values()) * x[e.tail];
    const double m2 = m * m;
    gram(e.head, e.head) += m2;
    gram(e.tail, e.tail) += m2;
    gram(e.head, e.tail) -= m2;
    gram(e.tail, e.head) -= m2;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Pattern union of two sets, as a direction set with unit weights.
inline HyperTensorSet pattern_union(const HyperTensorSet& a, const HyperTensorSet& b) {
  std::set<EdgeKey> keys;
  for (const auto& e : a.entries()) keys.insert(e.key());
  for (const auto& e : b.entries()) keys.insert(e.key());
  std::vector<HyperEdge> out;
  for (const auto& k : keys) out.push_back(HyperEdge{k.order, k.head, k.tail, k.rest, 1.0});
  return HyperTensorSet::direction(a.size(), std::move(out));
}

struct SensitivityReport {
  double delta_norm = 0.0;  // Frobenius norm over all entries of dA
  Vector predicted_shift;
  Vector measured_shift;
  double first_order_gap = 0.0;  // ||measured - predicted||
  double resolvent_norm = 0.0;   // ||J_T^{-1}||_2
  double tensor_gain = 0.0;      // L_A = ||d_A f(v; A)||
  double bound_gain = 0.0;       // resolvent_norm * tensor_gain
  int newton_iterations = 0;
};

/// Predicted first-order shift alone.
inline Vector predicted_shift(const HyperTensorSet& tensors, const HyperTensorSet& delta, const StateVector& v) {
  const Matrix U = tangent_basis(tensors.size()).U;
  const Matrix jt = U.transpose() * jacobian(tensors, v) * U;
  Eigen::FullPivLU<Matrix> lu(jt);
  if (!lu.isInvertible()) throw NumericalError("sensitivity: reduced Jacobian is singular");
  const Vector df = frechet_in_tensor(delta, v).values();
  return -(U * lu.solve(U.transpose() * df));
}

inline SensitivityReport sensitivity_first_order(const HyperTensorSet& tensors, const HyperTensorSet& delta,
                                                 const StateVector& v, const NewtonOptions& newton = {}) {
  if (delta.size() != tensors.size()) throw ValidationError("sensitivity: perturbation has wrong node count");
  SensitivityReport rep;
  rep.delta_norm = frobenius_norm(delta);
  rep.predicted_shift = predicted_shift(tensors, delta, v);

  const Matrix jt = reduced_jacobian(tensors, v);
  Eigen::JacobiSVD<Matrix> svd(jt);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin > 0.0)) throw NumericalError("sensitivity: reduced Jacobian is singular");
  rep.resolvent_norm = 1.0 / smin;
  rep.tensor_gain = tensor_gain(pattern_union(tensors, delta), v);
  rep.bound_gain = rep.resolvent_norm * rep.tensor_gain;

  const NewtonResult perturbed = equilibrium_newton(add(tensors, delta), v, newton);
  rep.measured_shift = perturbed.x.values() - v.values();
  rep.newton_iterations = perturbed.iterations;
  rep.first_order_gap = (rep.measured_shift - rep.predicted_shift).norm();
  return rep;
}

}  // namespace hyperflow
