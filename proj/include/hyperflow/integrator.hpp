#pragma once

// Fixed-step classical RK4 on the simplex. Every stage state and the final
// combination are projected back onto the open simplex by floor-clamping and
// renormalizing.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "hyperflow/dynamics.hpp"
#include "hyperflow/entropy.hpp"
#include "hyperflow/errors.hpp"

namespace hyperflow {

inline constexpr double kDefaultProjectionFloor = 1e-12;

struct IntegratorConfig {
  double dt = 1e-2;
  double t_final = 20.0;
  double projection_floor = kDefaultProjectionFloor;
  int record_every = 1;

  void validate() const {
    if (!(dt > 0.0)) throw ValidationError("integrator: dt must be positive");
    if (!(t_final >= dt)) throw ValidationError("integrator: t_final must be >= dt");
    if (!(projection_floor > 0.0 && projection_floor <= 1e-8))
      throw ValidationError("integrator: projection floor must lie in (0, 1e-8]");
    if (record_every < 1) throw ValidationError("integrator: record_every must be positive");
  }

  long steps() const { return std::lround(t_final / dt); }
};

struct SampleDiagnostics {
  double mass_residual = 0.0;  // 1^T x - 1
  double entropy = std::numeric_limits<double>::quiet_NaN();
  double entropy_rate = std::numeric_limits<double>::quiet_NaN();
  double distance = std::numeric_limits<double>::quiet_NaN();  // ||x - v||
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<SampleDiagnostics> diagnostics;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  const StateVector& final_state() const { return states.back(); }
};

/// Right-hand side evaluator x, t -> dx/dt.
using SimplexField = std::function<Vector(const Vector&, double)>;

/// Clamp y_i <- max(y_i, floor), then renormalize to unit mass.
inline StateVector project_simplex(const Vector& y, double floor = kDefaultProjectionFloor) {
  if (y.size() == 0) throw NumericalError("projection of an empty vector");
  if (!y.allFinite()) throw NumericalError("projection of a non-finite vector");
  if (y.maxCoeff() <= 0.0) throw NumericalError("projection of a vector with no positive entry");
  Vector z = y.cwiseMax(floor);
  z /= z.sum();
  return StateVector::unchecked(std::move(z));
}

inline StateVector rk4_step(const SimplexField& field, const StateVector& x, double t, double dt,
                            double floor = kDefaultProjectionFloor) {
  try {
    const Vector& x0 = x.values();
    const Vector k1 = field(x0, t);
    const StateVector x2 = project_simplex(x0 + 0.5 * dt * k1, floor);
    const Vector k2 = field(x2.values(), t + 0.5 * dt);
    const StateVector x3 = project_simplex(x0 + 0.5 * dt * k2, floor);
    const Vector k3 = field(x3.values(), t + 0.5 * dt);
    const StateVector x4 = project_simplex(x0 + dt * k3, floor);
    const Vector k4 = field(x4.values(), t + dt);
    return project_simplex(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), floor);
  } catch (const NumericalError& e) {
    throw StepError(std::string("rk4 step failed: ") + e.what(), t);
  }
}

inline SimplexField nominal_field(const HyperTensorSet& tensors) {
  return [&tensors](const Vector& x, double) { return detail::raw_field(tensors, x); };
}

inline SimplexField forced_field(const HyperTensorSet& tensors, const InputSignal& input) {
  return [&tensors, &input](const Vector& x, double t) { return Vector(detail::raw_field(tensors, x) + input(t)); };
}

inline SampleDiagnostics diagnose(const StateVector& x, const Vector& rate,
                                  const std::optional<StateVector>& reference) {
  SampleDiagnostics d;
  d.mass_residual = x.values().sum() - 1.0;
  if (reference) {
    d.entropy = entropy(x, *reference);
    // the constant part of grad V is orthogonal to the zero-sum rate; dropping
    // it avoids cancellation near the reference
    d.entropy_rate = (x.values().array() / reference->values().array()).log().matrix().dot(rate);
    d.distance = (x.values() - reference->values()).norm();
  }
  return d;
}

/// Integrates an arbitrary simplex field. Samples are recorded at step 0,
/// every record_every steps, and at the final step.
inline Trajectory integrate_field(const SimplexField& field, const StateVector& x0,
                                  const IntegratorConfig& cfg,
                                  const std::optional<StateVector>& equilibrium_hint = std::nullopt) {
  cfg.validate();
  const long steps = cfg.steps();
  Trajectory traj;
  auto record = [&](long step, const StateVector& x) {
    const double t = static_cast<double>(step) * cfg.dt;
    traj.times.push_back(t);
    traj.diagnostics.push_back(diagnose(x, field(x.values(), t), equilibrium_hint));
    traj.states.push_back(x);
  };
  StateVector x = x0;
  record(0, x);
  for (long s = 0; s < steps; ++s) {
    x = rk4_step(field, x, static_cast<double>(s) * cfg.dt, cfg.dt, cfg.projection_floor);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) record(s + 1, x);
  }
  return traj;
}

inline Trajectory integrate(const HyperTensorSet& tensors, const StateVector& x0, const IntegratorConfig& cfg,
                            const InputSignal* input = nullptr,
                            const std::optional<StateVector>& equilibrium_hint = std::nullopt) {
  detail::check_dimension(tensors, x0.values());
  if (input) return integrate_field(forced_field(tensors, *input), x0, cfg, equilibrium_hint);
  return integrate_field(nominal_field(tensors), x0, cfg, equilibrium_hint);
}

struct SteadyState {
  bool reached = false;
  StateVector state;
  double residual = 0.0;  // ||f(x_final)||_inf
};

inline SteadyState detect_steady_state(const HyperTensorSet& tensors, const Trajectory& traj, double tol) {
  if (traj.empty()) throw ValidationError("detect_steady_state: empty trajectory");
  const StateVector& x = traj.final_state();
  const double r = detail::raw_field(tensors, x.values()).lpNorm<Eigen::Infinity>();
  return SteadyState{r <= tol, x, r};
}

}  // namespace hyperflow
