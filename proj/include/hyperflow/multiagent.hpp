#pragma once

// Planar double-integrator swarm with momentum-conserving, state-dependent
// Laplacian coupling:
//
//   dp_i/dt = v_i,   dv_i/dt = u_i,
//   u = -k_p L(x) p - k_d L(x) v + w(t),
//   L(x) = D(x) - W(x),  W(x) = S (1 + alpha (||p||_F^2 + ||v||_F^2)).

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "hyperflow/errors.hpp"
#include "hyperflow/hypergraph.hpp"
#include "hyperflow/random.hpp"
#include "hyperflow/state.hpp"

namespace hyperflow {

using PlanarMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct AgentSwarmState {
  PlanarMatrix p;  // positions, one row per agent
  PlanarMatrix v;  // velocities

  int agents() const { return static_cast<int>(p.rows()); }

  void validate() const {
    if (p.rows() < 2) throw ValidationError("swarm: at least two agents are required");
    if (v.rows() != p.rows()) throw ValidationError("swarm: position and velocity counts differ");
    if (!p.allFinite() || !v.allFinite()) throw ValidationError("swarm: non-finite state");
  }
};

using Disturbance = std::function<PlanarMatrix(double)>;

inline Disturbance zero_disturbance(int m) {
  return [m](double) { return PlanarMatrix(PlanarMatrix::Zero(m, 2)); };
}

/// w_1 = -w_2 = [a sin(2 pi f t), 0], w_i = 0 otherwise.
inline Disturbance pair_disturbance(int m, double amplitude, double frequency) {
  return [=](double t) {
    PlanarMatrix w = PlanarMatrix::Zero(m, 2);
    const double s = amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
    w(0, 0) = s;
    w(1, 0) = -s;
    return w;
  };
}

struct MasConfig {
  int m = 6;
  double k_p = 1.0;
  double k_d = 1.2;
  double alpha = 0.02;
  Matrix base;  // S, symmetric, zero diagonal, nonnegative
  double dt = 0.02;
  double t_final = 40.0;
  int record_every = 1;
  Disturbance disturbance;

  void validate() const {
    if (m < 2) throw ValidationError("multiagent: m must be >= 2");
    if (!(k_p > 0.0) || !(k_d > 0.0)) throw ValidationError("multiagent: gains must be positive");
    if (!(alpha >= 0.0)) throw ValidationError("multiagent: alpha must be nonnegative");
    if (base.rows() != m || base.cols() != m) throw ValidationError("multiagent: S must be m x m");
    for (int i = 0; i < m; ++i) {
      if (base(i, i) != 0.0) throw ValidationError("multiagent: S must have zero diagonal");
      for (int k = 0; k < m; ++k) {
        if (base(i, k) < 0.0) throw ValidationError("multiagent: S must be nonnegative");
        if (base(i, k) != base(k, i)) throw ValidationError("multiagent: S must be symmetric");
      }
    }
    if (!(dt > 0.0) || !(t_final >= dt)) throw ValidationError("multiagent: need dt > 0 and t_final >= dt");
    if (record_every < 1) throw ValidationError("multiagent: record_every must be positive");
  }
};

inline Matrix coupling_matrix(const AgentSwarmState& x, const MasConfig& cfg) {
  const double scale = 1.0 + cfg.alpha * (x.p.squaredNorm() + x.v.squaredNorm());
  const Matrix W = cfg.base * scale;
  Matrix L = -W;
  L.diagonal() += W.rowwise().sum();
  return L;
}

inline PlanarMatrix control_law(const AgentSwarmState& x, const MasConfig& cfg, double t) {
  const Matrix L = coupling_matrix(x, cfg);
  PlanarMatrix u = -cfg.k_p * (L * x.p) - cfg.k_d * (L * x.v);
  if (cfg.disturbance) {
    const PlanarMatrix w = cfg.disturbance(t);
    if (w.rows() != u.rows()) throw ValidationError("multiagent: disturbance has wrong shape");
    if (w.colwise().sum().cwiseAbs().maxCoeff() > 1e-12)
      throw ValidationError("multiagent: disturbance is not zero-sum");
    u += w;
  }
  return u;
}

struct SwarmTrajectory {
  std::vector<double> times;
  std::vector<AgentSwarmState> states;
  std::vector<Eigen::Vector2d> momentum;  // sum_i v_i
  std::vector<double> mean_distance;      // mean_i ||p_i - centroid||

  std::size_t size() const { return times.size(); }
};

inline double mean_centroid_distance(const AgentSwarmState& x) {
  const Eigen::RowVector2d centroid = x.p.colwise().mean();
  return (x.p.rowwise() - centroid).rowwise().norm().mean();
}

inline AgentSwarmState swarm_rk4_step(const AgentSwarmState& x, const MasConfig& cfg, double t, double dt) {
  auto deriv = [&](const AgentSwarmState& s, double tau) {
    return AgentSwarmState{s.v, control_law(s, cfg, tau)};
  };
  auto shift = [](const AgentSwarmState& s, const AgentSwarmState& d, double h) {
    return AgentSwarmState{s.p + h * d.p, s.v + h * d.v};
  };
  const AgentSwarmState k1 = deriv(x, t);
  const AgentSwarmState k2 = deriv(shift(x, k1, 0.5 * dt), t + 0.5 * dt);
  const AgentSwarmState k3 = deriv(shift(x, k2, 0.5 * dt), t + 0.5 * dt);
  const AgentSwarmState k4 = deriv(shift(x, k3, dt), t + dt);
  return AgentSwarmState{x.p + (dt / 6.0) * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
                         x.v + (dt / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

inline SwarmTrajectory simulate_swarm(const MasConfig& cfg, const AgentSwarmState& initial) {
  cfg.validate();
  initial.validate();
  if (initial.agents() != cfg.m) throw ValidationError("multiagent: initial state has wrong agent count");
  SwarmTrajectory traj;
  auto record = [&](double t, const AgentSwarmState& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.momentum.push_back(x.v.colwise().sum().transpose());
    traj.mean_distance.push_back(mean_centroid_distance(x));
  };
  const long steps = std::lround(cfg.t_final / cfg.dt);
  AgentSwarmState x = initial;
  record(0.0, x);
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * cfg.dt;
    x = swarm_rk4_step(x, cfg, t, cfg.dt);
    if (!x.p.allFinite() || !x.v.allFinite()) throw StepError("multiagent: state blew up", t + cfg.dt);
    if ((s + 1) % cfg.record_every == 0 || s + 1 == steps) record(static_cast<double>(s + 1) * cfg.dt, x);
  }
  return traj;
}

inline double momentum_drift(const SwarmTrajectory& traj) {
  if (traj.size() == 0) throw ValidationError("momentum_drift: empty trajectory");
  double drift = 0.0;
  for (const auto& m : traj.momentum) drift = std::max(drift, (m - traj.momentum.front()).norm());
  return drift;
}

// ---------------------------------------------------------------------------
// Seeded defaults for the swarm experiment

/// Symmetric Erdos-Renyi mask (edge probability p_edge) with weights uniform
/// in [0.5, 1.5], redrawn until the graph is connected.
inline Matrix random_connected_topology(int m, std::uint64_t seed, double p_edge = 0.6) {
  if (m < 2) throw ValidationError("topology: m must be >= 2");
  Rng rng(seed);
  std::bernoulli_distribution edge(p_edge);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Matrix S = Matrix::Zero(m, m);
    SupportGraph g;
    g.n = m;
    for (int i = 0; i < m; ++i)
      for (int k = i + 1; k < m; ++k)
        if (edge(rng)) {
          S(i, k) = S(k, i) = weight(rng);
          g.undirected.emplace(i, k);
        }
    if (is_connected(g, ConnectivityMode::undirected)) return S;
  }
  throw NumericalError("topology: no connected sample found");
}

/// Anchors evenly spaced on the segment (-8, -8) -> (4, 4), each offset by a
/// uniform draw from [-0.5, 0.5]^2; zero velocities.
inline AgentSwarmState scattered_initial_state(int m, std::uint64_t seed, double offset = 0.5) {
  if (m < 2) throw ValidationError("initial state: m must be >= 2");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-offset, offset);
  AgentSwarmState x{PlanarMatrix::Zero(m, 2), PlanarMatrix::Zero(m, 2)};
  for (int i = 0; i < m; ++i) {
    const double s = static_cast<double>(i) / (m - 1);
    x.p(i, 0) = -8.0 + 12.0 * s + u(rng);
    x.p(i, 1) = -8.0 + 12.0 * s + u(rng);
  }
  return x;
}

}  // namespace hyperflow
