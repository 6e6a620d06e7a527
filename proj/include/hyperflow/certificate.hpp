#pragma once

// Stability certificates for balanced systems: the entropy-dissipation form
// of dV/dt, the spectral gap of the Jacobian on the tangent space, and the
// quadratic dissipation constant c = v_min^2 q_bar lambda_star / (2 v_max^2).

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "hyperflow/dynamics.hpp"
#include "hyperflow/hypergraph.hpp"
#include "hyperflow/random.hpp"
#include "hyperflow/tangent.hpp"

namespace hyperflow {

/// dV/dt = -1/2 sum_{i != k} v_i Q_{i->k}(x) (y_i - y_k)(log y_i - log y_k),
/// y = x / v. Equals grad V(x)^T f(x) when the tensors are balanced at v.
/// Written in terms of d = y - 1 with log1p so that states next to v keep
/// full relative precision.
inline double entropy_rate_closed_form(const HyperTensorSet& tensors, const StateVector& x,
                                       const StateVector& v) {
  const int n = tensors.size();
  if (x.size() != n || v.size() != n) throw ValidationError("entropy rate: dimension mismatch");
  const Matrix q = rate_matrix(tensors, x);  // q(i, k) = Q_{k->i}
  Vector d(n), ld(n);
  for (int i = 0; i < n; ++i) {
    d[i] = (x[i] - v[i]) / v[i];
    ld[i] = std::log1p(d[i]);
  }
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      if (i == k) continue;
      s += v[i] * q(k, i) * (d[i] - d[k]) * (ld[i] - ld[k]);
    }
  return -0.5 * s;
}

struct SpectralGap {
  double c_gap = 0.0;
  std::vector<std::complex<double>> spectrum;  // eigenvalues of U^T J U, slowest first
};

inline Matrix reduced_jacobian(const HyperTensorSet& tensors, const StateVector& x) {
  const Matrix U = tangent_basis(tensors.size()).U;
  return U.transpose() * jacobian(tensors, x) * U;
}

/// c_gap = min over eigenvalues of J restricted to the tangent space of -Re(lambda).
inline SpectralGap spectral_gap(const HyperTensorSet& tensors, const StateVector& v) {
  const double residual = detail::raw_field(tensors, v.values()).lpNorm<Eigen::Infinity>();
  if (residual > 1e-8)
    throw ValidationError("spectral_gap: state is not an equilibrium (||f|| = " + std::to_string(residual) + ")");
  Eigen::EigenSolver<Matrix> solver(reduced_jacobian(tensors, v), /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("spectral_gap: eigensolver failed");
  SpectralGap out;
  for (int i = 0; i < solver.eigenvalues().size(); ++i) out.spectrum.push_back(solver.eigenvalues()[i]);
  std::sort(out.spectrum.begin(), out.spectrum.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() < b.imag();
  });
  out.c_gap = out.spectrum.empty() ? 0.0 : -out.spectrum.front().real();
  return out;
}

struct StabilityCertificate {
  Vector v;
  double c_gap = 0.0;
  std::vector<std::complex<double>> spectrum;
  double c = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
  double q_bar = 0.0;
  std::string q_bar_method;  // "structured" (exact infimum) or "sampled" (sample minimum, not a proof)
  double lambda_star = 0.0;
  bool tgdb_holds = false;
};

/// Unweighted Laplacian of the symmetrized support graph.
inline Matrix support_laplacian(const SupportGraph& g) {
  Matrix L = Matrix::Zero(g.n, g.n);
  for (auto [i, k] : g.undirected) {
    L(i, i) += 1.0;
    L(k, k) += 1.0;
    L(i, k) -= 1.0;
    L(k, i) -= 1.0;
  }
  return L;
}

/// lambda_star = inf over z != 0 with v^T z = 0 of z^T L z / ||z||^2.
inline double connectivity_eigenvalue(const SupportGraph& g, const Vector& v) {
  const int n = g.n;
  if (n < 2) return 0.0;
  Eigen::HouseholderQR<Matrix> qr(v);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix B = Q.rightCols(n - 1);  // orthonormal basis of v-perp
  Eigen::SelfAdjointEigenSolver<Matrix> es(B.transpose() * support_laplacian(g) * B);
  if (es.info() != Eigen::Success) throw NumericalError("connectivity eigenvalue: eigensolver failed");
  return es.eigenvalues().minCoeff();
}

struct DissipationOptions {
  std::uint64_t seed = 42;
  int samples = 4096;  // states used for the sampled q_bar
};

inline StabilityCertificate dissipation_constant(const HyperTensorSet& tensors, const StateVector& v,
                                                 const SupportGraph& support,
                                                 const StructuredKernel* structured = nullptr,
                                                 const DissipationOptions& opts = {}) {
  const int n = tensors.size();
  if (!is_connected(support, ConnectivityMode::undirected))
    throw ConnectivityError("dissipation constant: support graph is not connected");
  StabilityCertificate cert;
  cert.v = v.values();
  cert.v_min = v.values().minCoeff();
  cert.v_max = v.values().maxCoeff();
  cert.tgdb_holds = check_tgdb(tensors, v).holds;

  if (structured) {
    // min of sum_j x_j^2 over the simplex is 1/n, attained at the barycenter
    double s_min = std::numeric_limits<double>::infinity();
    for (auto [k, i] : support.directed) s_min = std::min(s_min, structured->base(k, i));
    cert.q_bar = s_min * (1.0 + structured->alpha / n);
    cert.q_bar_method = "structured";
  } else {
    Rng rng(opts.seed);
    double q_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.samples; ++s) {
      const Matrix q = rate_matrix(tensors, sample_simplex(n, rng));
      for (auto [k, i] : support.directed) q_min = std::min(q_min, q(i, k));
    }
    cert.q_bar = q_min;
    cert.q_bar_method = "sampled";
  }
  if (!(cert.q_bar > 0.0)) throw NumericalError("dissipation constant: kernel lower bound q_bar is not positive");

  cert.lambda_star = connectivity_eigenvalue(support, v.values());
  cert.c = cert.v_min * cert.v_min * cert.q_bar * cert.lambda_star / (2.0 * cert.v_max * cert.v_max);

  const SpectralGap gap = spectral_gap(tensors, v);
  cert.c_gap = gap.c_gap;
  cert.spectrum = gap.spectrum;
  return cert;
}

}  // namespace hyperflow
