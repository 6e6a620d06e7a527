// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

#include "hyperflow/commands.hpp"
#include "test_support.hpp"

using namespace hyperflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!out.pass) ++failures;
  std::printf("%s %s: %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", name.c_str(), out.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The baseline experiment: n = 8, alpha = 0.8, dt = 1e-2, t_final = 20, seed 42.
struct Baseline {
  ExperimentConfig cfg;
  BuiltSystem sys;
  Trajectory traj;
};

Baseline baseline() {
  ExperimentConfig cfg;
  BuiltSystem sys = build_system(cfg);
  Trajectory traj = integrate(sys.tensors, initial_state(cfg, 8), cfg.integrator(), nullptr, sys.v);
  return Baseline{cfg, std::move(sys), std::move(traj)};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hyperflow_acceptance_" + name);
  fs::remove_all(dir);
  return dir;
}

int quiet(const std::string& cmd, const ExperimentConfig& cfg) {
  std::ostringstream out, err;
  const int rc = run_command(cmd, cfg, out, err);
  if (rc != 0) throw std::runtime_error(cmd + " failed: " + err.str());
  return rc;
}

}  // namespace

int main() {
  criterion("mass conservation", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const Baseline b = baseline();
    const double secs = seconds_since(t0);
    double drift = 0.0;
    for (const auto& x : b.traj.states) drift = std::max(drift, std::abs(x.values().sum() - 1.0));
    return Outcome{drift <= 1e-10 && secs < 5.0, fmt("max |1^T x - 1| = %.3g (tol 1e-10), runtime %.2fs (< 5s)", drift, secs)};
  });

  criterion("global convergence", [] {
    const Baseline b = baseline();
    const double dist = (b.traj.final_state().values() - Vector::Constant(8, 1.0 / 8.0)).lpNorm<Eigen::Infinity>();
    double worst_rise = -INFINITY;
    for (std::size_t s = 1; s < b.traj.size(); ++s)
      worst_rise = std::max(worst_rise, b.traj.diagnostics[s].entropy - b.traj.diagnostics[s - 1].entropy);
    return Outcome{dist <= 1e-6 && worst_rise <= 1e-10,
                   fmt("||x(T) - 1/8||_inf = %.3g (tol 1e-6), max V increase = %.3g (slack 1e-10)", dist, worst_rise)};
  });

  criterion("entropy-dissipation identity", [] {
    Rng rng(2024);
    double worst = 0.0, max_rate = -INFINITY;
    int states = 0, systems = 0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed, ++systems) {
      const int n = 3 + static_cast<int>(seed % 8);  // 4..10
      const auto sys = testkit::random_tgdb_system(n, 3, 1000 + seed);
      for (int s = 0; s < 25; ++s, ++states) {
        const auto x = sample_simplex(n, rng);
        const double closed = entropy_rate_closed_form(sys.tensors, x, sys.v);
        const double chain = entropy_gradient(x, sys.v).dot(vector_field(sys.tensors, x).values());
        worst = std::max(worst, std::abs(closed - chain));
        max_rate = std::max(max_rate, closed);
      }
    }
    return Outcome{worst <= 1e-10 && max_rate <= 0.0 && states >= 100 && systems >= 5,
                   fmt("%g states, max |closed - chain| = %.3g (tol 1e-10), max rate = %.3g (<= 0)", states, worst,
                       max_rate) +
                       " over " + std::to_string(systems) + " systems"};
  });

  criterion("jacobian correctness", [] {
    Rng rng(77);
    double worst = 0.0, worst_col = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const int n = 3 + static_cast<int>(seed % 8);
      const auto sys = testkit::random_tgdb_system(n, 3, 2000 + seed);
      const auto x = sample_simplex(n, rng);
      const Matrix J = jacobian(sys.tensors, x);
      worst = std::max(worst, testkit::max_rel_error(J, testkit::fd_jacobian(sys.tensors, x.values())));
      worst_col = std::max(worst_col, J.colwise().sum().cwiseAbs().maxCoeff());
    }
    return Outcome{worst <= 1e-5 && worst_col <= 1e-10,
                   fmt("50 pairs, max relative FD error = %.3g (tol 1e-5), max column sum = %.3g (tol 1e-10)", worst,
                       worst_col)};
  });

  criterion("spectral gap oracle", [] {
    double worst = 0.0;
    for (double s : {0.5, 1.0, 2.0})
      for (int n : {3, 5, 8})
        worst = std::max(worst, std::abs(spectral_gap(complete_graph(n, s), StateVector::uniform(n)).c_gap - n * s));
    return Outcome{worst <= 1e-8, fmt("max |c_gap - n s| = %.3g over 9 complete graphs (tol 1e-8)", worst)};
  });

  criterion("equilibrium solvers agree", [] {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const int n = 3 + static_cast<int>(seed % 8);
      const auto sys = testkit::random_tgdb_system(n, 3, 3000 + seed);
      const auto ratio = equilibrium_from_tgdb(sys.tensors);
      const auto newton = equilibrium_newton(sys.tensors, StateVector::uniform(n));
      worst = std::max(worst, (ratio.values() - newton.x.values()).lpNorm<Eigen::Infinity>());
    }
    bool rejected = false;
    try {
      equilibrium_from_tgdb(load_spec(fs::path(HYPERFLOW_DATA_DIR) / "nonunique.json"));
    } catch (const ConnectivityError&) {
      rejected = true;
    }
    return Outcome{worst <= 1e-10 && rejected,
                   fmt("20 systems, max ||ratio - newton||_inf = %.3g (tol 1e-10); ", worst) +
                       "nonuniqueness example " + (rejected ? "rejected with a connectivity error" : "NOT rejected")};
  });

  criterion("sensitivity scaling", [] {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;  // nine levels in [0, 0.6], asymmetric
    const SweepResult res = run_sweep(cfg);
    // first-order agreement at small norms, on their own seed streams
    const Matrix S = base_matrix_for(cfg);
    const StateVector v = StateVector::uniform(8);
    SweepSettings settings;
    double worst_rel = 0.0;
    int small = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double level = 0.0125 * static_cast<double>(i + 1);  // 0.0125 .. 0.05
      const SweepRow r = compute_sweep_level(S, v, level, derive_seed(cfg.seed, streams::sweep_level + 50 + i), settings);
      if (r.post_norm > 0.0 && r.post_norm <= 0.05 + 1e-12) {
        worst_rel = std::max(worst_rel, std::abs(r.predicted_shift - r.measured_shift) / r.measured_shift);
        worst_rel = std::max(worst_rel, r.gap / r.measured_shift);
        ++small;
      }
    }
    const double secs = seconds_since(t0);
    const bool pass = res.slope >= 0.85 && res.slope <= 1.15 && small > 0 && worst_rel <= 0.10 && secs < 60.0;
    return Outcome{pass, fmt("log-log slope = %.4f over nine levels (target [0.85, 1.15]); ", res.slope) +
                             fmt("max relative prediction error at post-clip norm <= 0.05 = %.3g over %g levels (tol 0.10); ",
                                 worst_rel, small) +
                             fmt("runtime %.2fs (< 60s)", secs)};
  });

  criterion("quadratic remainder", [] {
    ExperimentConfig cfg;
    const Matrix S = base_matrix_for(cfg);
    const auto nominal = make_structured_system(S, cfg.system.alpha);
    const StateVector v = StateVector::uniform(8);
    double lo = INFINITY, hi = -INFINITY;
    for (std::uint64_t d = 0; d < 10; ++d) {
      const Matrix dS = generate_perturbation(8, 1.0, false, derive_seed(cfg.seed, 500 + d));
      const double big = sensitivity_first_order(nominal.tensors, encode_direction(0.2 * dS, cfg.system.alpha), v)
                             .first_order_gap;
      const double half = sensitivity_first_order(nominal.tensors, encode_direction(0.1 * dS, cfg.system.alpha), v)
                              .first_order_gap;
      lo = std::min(lo, big / half);
      hi = std::max(hi, big / half);
    }
    return Outcome{lo >= 3.0 && hi <= 5.0,
                   fmt("gap ratio under halving in [%.4f, %.4f] over 10 directions (target [3, 5])", lo, hi)};
  });

  criterion("quadratic dissipation certificate", [] {
    const Baseline b = baseline();
    const StabilityCertificate cert = certify(b.sys, b.cfg.seed);
    double worst = -INFINITY;  // max of dV/dt + c ||x - v||^2
    for (std::size_t s = 0; s < b.traj.size(); ++s) {
      const double d = b.traj.diagnostics[s].distance;
      const double rate = entropy_rate_closed_form(b.sys.tensors, b.traj.states[s], b.sys.v);
      worst = std::max(worst, rate + cert.c * d * d);
    }
    return Outcome{cert.c > 0.0 && worst <= 0.0,
                   fmt("c = %.4g, max over %g states of dV/dt + c||x - v||^2 = %.3g (<= 0)", cert.c,
                       static_cast<double>(b.traj.size()), worst)};
  });

  criterion("ISS envelope", [] {
    ExperimentConfig cfg;
    cfg.output_dir = scratch("iss");
    quiet("perturbed", cfg);
    const auto rep = nlohmann::json::parse(read_file(cfg.output_dir / "report.json"));
    const long violations = rep["envelope"]["violations"].get<long>();
    const double pre = rep["perturbation"]["pre_clip_norm"].get<double>();

    const Baseline b = baseline();
    const StabilityCertificate cert = certify(b.sys, cfg.seed);
    IssOptions o;
    o.seed = derive_seed(cfg.seed, streams::iss_sampling);
    const IssConstants k = iss_constants(b.sys.tensors, b.sys.v, b.sys.v.values().minCoeff() / 2.0, cert, o);
    const double V0 = b.traj.diagnostics.front().entropy;
    long nominal_bad = 0;
    for (std::size_t s = 0; s < b.traj.size(); ++s)
      if (b.traj.diagnostics[s].entropy > std::exp(-k.eta * b.traj.times[s]) * V0 + 1e-9) ++nominal_bad;
    return Outcome{violations == 0 && nominal_bad == 0 && std::abs(pre - 0.3) <= 1e-12,
                   fmt("perturbed run (pre-clip 0.3, rho 0.03): %g violations; nominal run: %g samples above "
                       "exp(-eta t) V(0) + 1e-9 (eta = %.4g)",
                       static_cast<double>(violations), static_cast<double>(nominal_bad), k.eta)};
  });

  criterion("multi-agent swarm", [] {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    MasConfig mas = swarm_config(cfg);
    const AgentSwarmState x0 = scattered_initial_state(mas.m, derive_seed(cfg.seed, streams::swarm_initial));
    const SwarmTrajectory traj = simulate_swarm(mas, x0);
    const double drift = momentum_drift(traj);
    const double d0 = traj.mean_distance.front(), d40 = traj.mean_distance.back();
    // bounded thereafter: continue another 40 time units
    MasConfig tail = mas;
    const double t_end = traj.times.back();
    tail.disturbance = [d = mas.disturbance, t_end](double t) { return d(t + t_end); };
    const SwarmTrajectory later = simulate_swarm(tail, traj.states.back());
    double later_max = 0.0;
    for (double d : later.mean_distance) later_max = std::max(later_max, d);
    const double secs = seconds_since(t0);
    const bool pass = drift <= 1e-9 && d40 < 0.1 * d0 && later_max < 0.1 * d0 && secs < 10.0;
    return Outcome{pass, fmt("momentum drift = %.3g (tol 1e-9), mean distance %.4g -> %.4g at t = 40", drift, d0, d40) +
                             fmt(", max over t in [40, 80] = %.4g (< 10%% of initial), runtime %.2fs (< 10s)",
                                 later_max, secs)};
  });

  criterion("determinism", [] {
    std::string mismatched;
    int compared = 0;
    for (const std::string cmd : {"simulate", "perturbed", "sweep", "multiagent"}) {
      ExperimentConfig a, b;
      a.output_dir = scratch(cmd + "_a");
      b.output_dir = scratch(cmd + "_b");
      quiet(cmd, a);
      quiet(cmd, b);
      for (const auto& entry : fs::directory_iterator(a.output_dir)) {
        if (entry.path().extension() != ".csv") continue;
        ++compared;
        if (read_file(entry.path()) != read_file(b.output_dir / entry.path().filename()))
          mismatched += " " + cmd + "/" + entry.path().filename().string();
      }
    }
    return Outcome{mismatched.empty() && compared == 4,
                   std::to_string(compared) + " CSV outputs compared across repeated runs" +
                       (mismatched.empty() ? ", all byte-identical" : ", differing:" + mismatched)};
  });

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
