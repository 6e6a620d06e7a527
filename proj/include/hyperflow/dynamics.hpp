#pragma once

// Generator-form flow dynamics
//
//   dx_i/dt = sum_{k != i} ( Q_{k->i}(x) x_k - Q_{i->k}(x) x_i ),
//   Q_{k->i}(x) = sum_r sum_I a^r_{ikI} prod_{j in I} x_j.
//
// Every entry e = (head h, tail t, rest I, weight a) contributes the flux
// g_e(x) = a x_t prod_I x_j, added to f_h and subtracted from f_t, so the
// field conserves mass entry by entry.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include "hyperflow/errors.hpp"
#include "hyperflow/hypergraph.hpp"
#include "hyperflow/state.hpp"

namespace hyperflow {

namespace detail {

inline double monomial(const std::vector<int>& indices, const Vector& x) {
  double m = 1.0;
  for (int j : indices) m *= x[j];
  return m;
}

inline void check_dimension(const HyperTensorSet& tensors, const Vector& x) {
  if (x.size() != tensors.size())
    throw ValidationError("state dimension " + std::to_string(x.size()) +
                          " does not match node count " + std::to_string(tensors.size()));
}

inline Vector raw_field(const HyperTensorSet& tensors, const Vector& x) {
  Vector f = Vector::Zero(x.size());
  for (const auto& e : tensors.entries()) {
    const double flux = e.weight * monomial(e.rest, x) * x[e.tail];
    f[e.head] += flux;
    f[e.tail] -= flux;
  }
  return f;
}

}  // namespace detail

/// Q_{k->i}(x). The empty product is 1, so order-1 entries contribute their
/// raw weight.
inline double rate_kernel(const HyperTensorSet& tensors, int i, int k, const StateVector& x) {
  const int n = tensors.size();
  if (i < 0 || i >= n || k < 0 || k >= n) throw ValidationError("rate_kernel: node index out of range");
  if (i == k) throw ValidationError("rate_kernel: head equals tail");
  detail::check_dimension(tensors, x.values());
  double q = 0.0;
  for (const auto& e : tensors.entries())
    if (e.head == i && e.tail == k) q += e.weight * detail::monomial(e.rest, x.values());
  return q;
}

/// All kernels at once: element (i, k) is Q_{k->i}(x); the diagonal is zero.
inline Matrix rate_matrix(const HyperTensorSet& tensors, const StateVector& x) {
  detail::check_dimension(tensors, x.values());
  Matrix q = Matrix::Zero(tensors.size(), tensors.size());
  for (const auto& e : tensors.entries()) q(e.head, e.tail) += e.weight * detail::monomial(e.rest, x.values());
  return q;
}

/// Net flow Phi_{k->i}(x) = Q_{k->i}(x) x_k - Q_{i->k}(x) x_i.
inline double flow(const HyperTensorSet& tensors, int i, int k, const StateVector& x) {
  return rate_kernel(tensors, i, k, x) * x[k] - rate_kernel(tensors, k, i, x) * x[i];
}

inline TangentVector vector_field(const HyperTensorSet& tensors, const StateVector& x) {
  detail::check_dimension(tensors, x.values());
  return TangentVector(detail::raw_field(tensors, x.values()));
}

/// Because f is linear in the tensor coefficients, the Frechet derivative in
/// the tensor applied to a direction dA is f(x; dA) itself.
inline TangentVector frechet_in_tensor(const HyperTensorSet& direction, const StateVector& x) {
  return vector_field(direction, x);
}

/// Analytic Jacobian df/dx, assembled by the product rule over the flux
/// monomials x_t prod_I x_j. Columns sum to zero.
inline Matrix jacobian(const HyperTensorSet& tensors, const StateVector& x) {
  const Vector& xv = x.values();
  detail::check_dimension(tensors, xv);
  const int n = tensors.size();
  Matrix jac = Matrix::Zero(n, n);
  std::vector<int> factors;
  for (const auto& e : tensors.entries()) {
    factors.assign(e.rest.begin(), e.rest.end());
    factors.push_back(e.tail);
    for (std::size_t p = 0; p < factors.size(); ++p) {
      double d = e.weight;
      for (std::size_t q = 0; q < factors.size(); ++q)
        if (q != p) d *= xv[factors[q]];
      jac(e.head, factors[p]) += d;
      jac(e.tail, factors[p]) -= d;
    }
  }
  return jac;
}

// ---------------------------------------------------------------------------
// Zero-sum inputs

/// An additive input t -> w(t) with 1^T w(t) = 0.
class InputSignal {
 public:
  using Evaluator = std::function<Vector(double)>;

  InputSignal(Evaluator eval, std::string description)
      : eval_(std::move(eval)), description_(std::move(description)) {}

  Vector operator()(double t) const {
    Vector w = eval_(t);
    if (std::abs(w.sum()) > 1e-12)
      throw ValidationError("input '" + description_ + "' is not zero-sum at t = " + std::to_string(t));
    return w;
  }

  const std::string& description() const noexcept { return description_; }

 private:
  Evaluator eval_;
  std::string description_;
};

inline InputSignal zero_input(int n) {
  return InputSignal([n](double) { return Vector::Zero(n); }, "zero");
}

/// w(t) = amplitude sin(2 pi frequency t) (e_first - e_second).
inline InputSignal sinusoidal_pair_input(int n, double amplitude, double frequency, int first = 0,
                                         int second = 1) {
  if (n < 2 || first == second) throw ValidationError("sinusoidal input needs two distinct nodes");
  return InputSignal(
      [=](double t) {
        Vector w = Vector::Zero(n);
        const double s = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
        w[first] = s;
        w[second] = -s;
        return w;
      },
      "sinusoidal pair, amplitude " + std::to_string(amplitude) + ", frequency " +
          std::to_string(frequency));
}

inline TangentVector vector_field_with_input(const HyperTensorSet& tensors, const StateVector& x,
                                             const InputSignal& w, double t) {
  return TangentVector(vector_field(tensors, x).values() + w(t));
}

// ---------------------------------------------------------------------------
// Structured kernels Q_{k->i}(x) = S_{ki} (1 + alpha sum_j x_j^2)

struct StructuredKernel {
  Matrix base;  // S, zero diagonal
  double alpha = 0.0;

  // For perturbation directions dS, which may be signed.
  bool signed_base = false;

  void validate() const {
    if (base.rows() != base.cols() || base.rows() < 1) throw ValidationError("structured kernel: S must be square");
    if (!(alpha >= 0.0)) throw ValidationError("structured kernel: alpha must be nonnegative");
    for (int i = 0; i < base.rows(); ++i) {
      if (base(i, i) != 0.0) throw ValidationError("structured kernel: S must have zero diagonal");
      for (int k = 0; k < base.cols(); ++k)
        if (!signed_base && base(i, k) < 0.0) throw ValidationError("structured kernel: S must be nonnegative");
    }
  }

  double phi(const Vector& x) const { return 1.0 + alpha * x.squaredNorm(); }
};

/// Realizes the structured kernel inside the tensor representation:
/// a^1_{ik} = S_{ki} and a^3_{ik(j,j)} = alpha S_{ki} for every j, the repeated
/// index encoding x_j^2. Zero coefficients of S are not stored; the order-3
/// layer is omitted when alpha = 0.
inline HyperTensorSet encode_structured_kernel(const StructuredKernel& sk) {
  sk.validate();
  const int n = static_cast<int>(sk.base.rows());
  std::vector<HyperEdge> entries;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double s = sk.base(k, i);
      if (i == k || s == 0.0) continue;
      entries.push_back(HyperEdge{1, i, k, {}, s});
      if (sk.alpha != 0.0)
        for (int j = 0; j < n; ++j) entries.push_back(HyperEdge{3, i, k, {j, j}, sk.alpha * s});
    }
  return sk.signed_base ? HyperTensorSet::direction(n, std::move(entries))
                        : HyperTensorSet::create(n, std::move(entries));
}

}  // namespace hyperflow
