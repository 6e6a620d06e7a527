#pragma once

// Local ISS envelope under the entropy Lyapunov function on the floor set
// Omega = { x in simplex : min_i x_i >= theta }:
//
//   V(x(t)) <= exp(-eta t) V(x(0)) + (C1 / eta) ||dA||^2 + (C2 / eta) sup ||w||^2
//
// with kappa = 1/theta, m = 1/2, M = 1/(2 theta), C1 = kappa^2 L^2 / c,
// C2 = kappa^2 / c and eta = c / (2 M).

#include <cmath>
#include <limits>
#include <optional>

#include "hyperflow/certificate.hpp"
#include "hyperflow/integrator.hpp"
#include "hyperflow/random.hpp"
#include "hyperflow/sensitivity.hpp"

namespace hyperflow {

struct IssConstants {
  double theta = 0.0;  // Omega floor
  double kappa = 0.0;
  double L_A = 0.0;
  double m_lo = 0.0;
  double M_hi = 0.0;
  double c = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double eta = 0.0;
};

struct IssOptions {
  std::uint64_t seed = 42;
  int samples = 256;
};

/// Uniform-ish samples of Omega: theta 1 + (1 - n theta) s for s on the simplex.
inline StateVector sample_omega(int n, double theta, Rng& rng) {
  const StateVector s = sample_simplex(n, rng);
  Vector x = Vector::Constant(n, theta) + (1.0 - n * theta) * s.values();
  x /= x.sum();
  return StateVector(x);
}

/// L_{A,Omega} is the largest tensor_gain over seeded samples of Omega plus its
/// vertices and v. `pattern` fixes the admissible perturbation coefficients;
/// it defaults to the key set of `tensors`.
inline IssConstants iss_constants(const HyperTensorSet& tensors, const StateVector& v, double theta,
                                  const StabilityCertificate& cert, const IssOptions& opts = {},
                                  const HyperTensorSet* pattern = nullptr) {
  const int n = tensors.size();
  const double v_min = v.values().minCoeff();
  if (!(theta > 0.0 && theta < v_min))
    throw ValidationError("iss_constants: theta must lie in (0, min_i v_i)");
  if (!(cert.c > 0.0)) throw ValidationError("iss_constants: dissipation constant must be positive");

  const HyperTensorSet& pat = pattern ? *pattern : tensors;
  double L = tensor_gain(pat, v);
  for (int j = 0; j < n; ++j) {
    Vector corner = Vector::Constant(n, theta);
    corner[j] += 1.0 - n * theta;
    L = std::max(L, tensor_gain(pat, StateVector::unchecked(corner)));
  }
  Rng rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) L = std::max(L, tensor_gain(pat, sample_omega(n, theta, rng)));

  IssConstants k;
  k.theta = theta;
  k.kappa = 1.0 / theta;
  k.m_lo = 0.5;
  k.M_hi = 1.0 / (2.0 * theta);
  k.L_A = L;
  k.c = cert.c;
  k.C1 = k.kappa * k.kappa * L * L / k.c;
  k.C2 = k.kappa * k.kappa / k.c;
  k.eta = k.c / (2.0 * k.M_hi);
  return k;
}

struct EnvelopeCheck {
  long violations = 0;
  double margin = std::numeric_limits<double>::infinity();  // min over in-Omega samples of envelope - V
  long outside_omega = 0;                                    // samples skipped because min x_i < theta
  long checked = 0;
  double anchor_time = 0.0;  // first in-Omega sample; the decay term starts here
  double floor = 0.0;        // (C1 ||dA||^2 + C2 sup ||w||^2) / eta
};

inline constexpr double kEnvelopeSlack = 1e-9;

/// Compares recorded V(x(t)) with the envelope. Samples outside Omega are
/// counted and skipped; the exponential term is anchored at the first sample
/// inside Omega, from which the estimate applies.
inline EnvelopeCheck iss_envelope_check(const Trajectory& traj, const IssConstants& k, double delta_norm,
                                        double input_sup) {
  EnvelopeCheck out;
  out.floor = (k.C1 * delta_norm * delta_norm + k.C2 * input_sup * input_sup) / k.eta;
  std::optional<double> v0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const double V = traj.diagnostics[s].entropy;
    if (std::isnan(V)) throw ValidationError("iss_envelope_check: trajectory has no entropy diagnostics");
    if (traj.states[s].values().minCoeff() < k.theta) {
      ++out.outside_omega;
      continue;
    }
    if (!v0) {
      v0 = V;
      out.anchor_time = traj.times[s];
    }
    const double env = std::exp(-k.eta * (traj.times[s] - out.anchor_time)) * *v0 + out.floor;
    out.margin = std::min(out.margin, env - V);
    if (V > env + kEnvelopeSlack) ++out.violations;
    ++out.checked;
  }
  return out;
}

}  // namespace hyperflow
