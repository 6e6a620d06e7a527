#pragma once

// Seeded experiment ingredients: the structured baseline system, random
// perturbations of its base matrix, and the per-level sensitivity sweep.

#include <cmath>
#include <random>
#include <vector>

#include "hyperflow/certificate.hpp"
#include "hyperflow/dynamics.hpp"
#include "hyperflow/equilibrium.hpp"
#include "hyperflow/integrator.hpp"
#include "hyperflow/random.hpp"
#include "hyperflow/sensitivity.hpp"

namespace hyperflow {

// Stream indices fed to derive_seed(master, stream).
namespace streams {
inline constexpr std::uint64_t base_matrix = 0;
inline constexpr std::uint64_t initial_state = 1;
inline constexpr std::uint64_t perturbation = 2;
inline constexpr std::uint64_t swarm_topology = 10;
inline constexpr std::uint64_t swarm_initial = 11;
inline constexpr std::uint64_t kernel_sampling = 20;
inline constexpr std::uint64_t iss_sampling = 21;
inline constexpr std::uint64_t sweep_level = 100;  // + level index
}  // namespace streams

/// Dense symmetric base matrix with i.i.d. uniform [0.5, 1.5] off-diagonal
/// weights and zero diagonal.
inline Matrix symmetric_base_matrix(int n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("base matrix: n must be >= 2");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Matrix S = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) S(i, k) = S(k, i) = u(rng);
  return S;
}

/// Standard-normal zero-diagonal noise, optionally symmetrized, rescaled to
/// Frobenius norm delta_norm.
inline Matrix generate_perturbation(int n, double delta_norm, bool symmetric, std::uint64_t seed) {
  if (!(delta_norm >= 0.0)) throw ValidationError("perturbation: delta_norm must be nonnegative");
  Matrix d = Matrix::Zero(n, n);
  if (delta_norm == 0.0) return d;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) d(i, k) = g(rng);
  if (symmetric) d = 0.5 * (d + d.transpose()).eval();
  const double norm = d.norm();
  if (norm == 0.0) return d;
  return d * (delta_norm / norm);
}

struct ClippedPerturbation {
  Matrix requested;  // dS before clipping
  Matrix effective;  // max(S + dS, 0) - S
  Matrix perturbed;  // max(S + dS, 0)
  double pre_norm = 0.0;
  double post_norm = 0.0;
};

inline ClippedPerturbation clip_perturbation(const Matrix& base, const Matrix& delta) {
  ClippedPerturbation c;
  c.requested = delta;
  c.perturbed = (base + delta).cwiseMax(0.0);
  c.effective = c.perturbed - base;
  c.pre_norm = delta.norm();
  c.post_norm = c.effective.norm();
  return c;
}

/// The structured baseline: Q_{k->i}(x) = S_{ki}(1 + alpha sum_j x_j^2) with
/// symmetric S, balanced at the uniform state.
struct StructuredSystem {
  StructuredKernel kernel;
  HyperTensorSet tensors;
};

inline StructuredSystem make_structured_system(const Matrix& S, double alpha) {
  StructuredKernel k{S, alpha, false};
  return StructuredSystem{k, encode_structured_kernel(k)};
}

inline HyperTensorSet encode_direction(const Matrix& dS, double alpha) {
  return encode_structured_kernel(StructuredKernel{dS, alpha, true});
}

/// Uniform pairwise weight s on the complete graph K_n.
inline HyperTensorSet complete_graph(int n, double s) {
  Matrix S = Matrix::Constant(n, n, s);
  S.diagonal().setZero();
  return encode_structured_kernel(StructuredKernel{S, 0.0, false});
}

struct SweepRow {
  double level = 0.0;
  double pre_norm = 0.0;
  double post_norm = 0.0;
  double measured_shift = 0.0;
  double predicted_shift = 0.0;
  double gap = 0.0;
  double integration_newton_gap = 0.0;  // ||x_integrated(T) - x_newton||_inf
};

struct SweepSettings {
  double alpha = 0.8;
  bool symmetric = false;
  double dt = 1e-2;
  double t_final = 20.0;
  double cross_check_tol = 1e-8;
};

/// One sweep level: perturb S, integrate the perturbed nominal system from v
/// to steady state, polish with Newton, and compare the equilibrium shift with
/// the first-order prediction.
inline SweepRow compute_sweep_level(const Matrix& S, const StateVector& v, double level, std::uint64_t seed,
                                    const SweepSettings& settings) {
  const int n = static_cast<int>(S.rows());
  const StructuredSystem nominal = make_structured_system(S, settings.alpha);
  const ClippedPerturbation pert = clip_perturbation(S, generate_perturbation(n, level, settings.symmetric, seed));
  const StructuredSystem perturbed = make_structured_system(pert.perturbed, settings.alpha);

  IntegratorConfig icfg;
  icfg.dt = settings.dt;
  icfg.t_final = settings.t_final;
  icfg.record_every = static_cast<int>(icfg.steps());
  const Trajectory traj = integrate(perturbed.tensors, v, icfg);
  const NewtonResult polished = equilibrium_newton(perturbed.tensors, traj.final_state());

  SweepRow row;
  row.level = level;
  row.pre_norm = pert.pre_norm;
  row.post_norm = pert.post_norm;
  row.integration_newton_gap =
      (traj.final_state().values() - polished.x.values()).lpNorm<Eigen::Infinity>();
  if (row.integration_newton_gap > settings.cross_check_tol)
    throw NumericalError("sweep: integration and Newton disagree at level " + std::to_string(level));
  const Vector measured = polished.x.values() - v.values();
  const Vector predicted = predicted_shift(nominal.tensors, encode_direction(pert.effective, settings.alpha), v);
  row.measured_shift = measured.norm();
  row.predicted_shift = predicted.norm();
  row.gap = (measured - predicted).norm();
  return row;
}

/// Least-squares slope of log(measured) against log(post_norm) over rows with
/// post_norm in (0, max_norm] and a positive measured shift.
inline double loglog_slope(const std::vector<SweepRow>& rows,
                           double max_norm = std::numeric_limits<double>::infinity()) {
  std::vector<double> xs, ys;
  for (const auto& r : rows)
    if (r.post_norm > 0.0 && r.post_norm <= max_norm && r.measured_shift > 0.0) {
      xs.push_back(std::log(r.post_norm));
      ys.push_back(std::log(r.measured_shift));
    }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / k;
    my += ys[i] / k;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

/// k evenly spaced levels from a to b inclusive.
inline std::vector<double> linspace(double a, double b, int k) {
  if (k < 1) throw ValidationError("linspace: need at least one level");
  std::vector<double> out;
  for (int i = 0; i < k; ++i) out.push_back(k == 1 ? a : a + (b - a) * i / (k - 1));
  return out;
}

}  // namespace hyperflow
