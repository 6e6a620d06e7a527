#pragma once

// Experiment configuration and the command pipelines behind the CLI. Every
// command writes its artifacts into the output directory together with a
// manifest.json carrying a config echo and SHA-256 file hashes.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperflow/certificate.hpp"
#include "hyperflow/equilibrium.hpp"
#include "hyperflow/experiment.hpp"
#include "hyperflow/iss.hpp"
#include "hyperflow/multiagent.hpp"
#include "hyperflow/output.hpp"
#include "hyperflow/spec_io.hpp"

namespace hyperflow {

struct SystemConfig {
  std::string generator = "paper";  // "paper", "complete" or "spec"
  std::string spec_path;            // resolved path when generator == "spec"
  int n = 8;
  double alpha = 0.8;
  double weight = 1.0;  // uniform weight of the "complete" generator
};

struct PerturbationConfig {
  double delta_norm = 0.3;
  bool symmetric = false;
};

struct InputConfig {
  double amplitude = 0.03;
  double frequency = 0.25;
  int first = 0;  // 0-based; the JSON form is 1-based
  int second = 1;
};

struct IssConfig {
  std::optional<double> theta;  // defaults to min_i v_i / 2
  int samples = 256;
};

struct SwarmConfig {
  int m = 6;
  double k_p = 1.0;
  double k_d = 1.2;
  double alpha = 0.02;
  double dt = 0.02;
  double t_final = 40.0;
  double amplitude = 0.6;
  double frequency = 0.25;
  double edge_probability = 0.6;
  double offset = 0.5;
};

struct ExperimentConfig {
  SystemConfig system;
  std::uint64_t seed = 42;
  double dt = 1e-2;
  double t_final = 20.0;
  int record_every = 1;
  std::string initial = "random";  // "random" or "uniform"
  PerturbationConfig perturbation;
  InputConfig input;
  std::vector<double> levels = linspace(0.0, 0.6, 9);
  IssConfig iss;
  SwarmConfig swarm;
  std::filesystem::path output_dir = "out";

  void validate() const {
    if (system.generator != "paper" && system.generator != "complete" && system.generator != "spec")
      throw ValidationError("config: unknown generator '" + system.generator + "'");
    if (system.generator != "spec" && system.n < 2) throw ValidationError("config: system.n must be >= 2");
    if (!(system.alpha >= 0.0)) throw ValidationError("config: system.alpha must be nonnegative");
    if (!(system.weight > 0.0)) throw ValidationError("config: system.weight must be positive");
    IntegratorConfig{dt, t_final, kDefaultProjectionFloor, record_every}.validate();
    if (initial != "random" && initial != "uniform")
      throw ValidationError("config: initial must be \"random\" or \"uniform\"");
    if (!(perturbation.delta_norm >= 0.0)) throw ValidationError("config: delta_norm must be nonnegative");
    if (!(input.amplitude >= 0.0) || !std::isfinite(input.frequency))
      throw ValidationError("config: input amplitude must be nonnegative and frequency finite");
    if (input.first == input.second || input.first < 0 || input.second < 0)
      throw ValidationError("config: input.pair must name two distinct nodes");
    if (levels.empty()) throw ValidationError("config: sweep.levels must be nonempty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!(levels[i] >= 0.0)) throw ValidationError("config: sweep levels must be nonnegative");
      if (i > 0 && levels[i] < levels[i - 1]) throw ValidationError("config: sweep levels must be nondecreasing");
    }
    if (iss.theta && !(*iss.theta > 0.0)) throw ValidationError("config: iss.theta must be positive");
    if (iss.samples < 0) throw ValidationError("config: iss.samples must be nonnegative");
    if (swarm.m < 2) throw ValidationError("config: multiagent.m must be >= 2");
    if (!(swarm.k_p > 0.0) || !(swarm.k_d > 0.0)) throw ValidationError("config: multiagent gains must be positive");
    if (!(swarm.alpha >= 0.0)) throw ValidationError("config: multiagent.alpha must be nonnegative");
    if (!(swarm.dt > 0.0) || !(swarm.t_final >= swarm.dt))
      throw ValidationError("config: multiagent needs dt > 0 and t_final >= dt");
    if (!(swarm.edge_probability > 0.0 && swarm.edge_probability <= 1.0))
      throw ValidationError("config: multiagent.edge_probability must lie in (0, 1]");
  }

  IntegratorConfig integrator() const { return IntegratorConfig{dt, t_final, kDefaultProjectionFloor, record_every}; }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::vector<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config: " + where + "." + key + " has the wrong type");
  }
}

}  // namespace detail

/// Parses the JSON mirror of ExperimentConfig. Relative spec paths resolve
/// against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
  using detail::read;
  ExperimentConfig cfg;
  detail::reject_unknown(doc,
                         {"system", "seed", "dt", "t_final", "record_every", "initial", "perturbation", "input",
                          "sweep", "iss", "multiagent", "output_dir"},
                         "config");
  if (doc.contains("system")) {
    const auto& s = doc["system"];
    detail::reject_unknown(s, {"generator", "spec", "n", "alpha", "weight"}, "system");
    read(s, "generator", cfg.system.generator, "system");
    read(s, "n", cfg.system.n, "system");
    read(s, "alpha", cfg.system.alpha, "system");
    read(s, "weight", cfg.system.weight, "system");
    if (s.contains("spec")) {
      std::string p;
      read(s, "spec", p, "system");
      const std::filesystem::path path(p);
      cfg.system.spec_path = (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
      if (!s.contains("generator")) cfg.system.generator = "spec";
    }
    if (cfg.system.generator == "spec" && cfg.system.spec_path.empty())
      throw ValidationError("config: generator \"spec\" needs system.spec");
  }
  read(doc, "seed", cfg.seed, "config");
  read(doc, "dt", cfg.dt, "config");
  read(doc, "t_final", cfg.t_final, "config");
  read(doc, "record_every", cfg.record_every, "config");
  read(doc, "initial", cfg.initial, "config");
  if (doc.contains("perturbation")) {
    const auto& p = doc["perturbation"];
    detail::reject_unknown(p, {"delta_norm", "symmetric"}, "perturbation");
    read(p, "delta_norm", cfg.perturbation.delta_norm, "perturbation");
    read(p, "symmetric", cfg.perturbation.symmetric, "perturbation");
  }
  if (doc.contains("input")) {
    const auto& in = doc["input"];
    detail::reject_unknown(in, {"amplitude", "frequency", "pair"}, "input");
    read(in, "amplitude", cfg.input.amplitude, "input");
    read(in, "frequency", cfg.input.frequency, "input");
    if (in.contains("pair")) {
      std::vector<int> pair;
      read(in, "pair", pair, "input");
      if (pair.size() != 2) throw ValidationError("config: input.pair must have two entries");
      cfg.input.first = pair[0] - 1;
      cfg.input.second = pair[1] - 1;
    }
  }
  if (doc.contains("sweep")) {
    const auto& s = doc["sweep"];
    detail::reject_unknown(s, {"levels"}, "sweep");
    read(s, "levels", cfg.levels, "sweep");
  }
  if (doc.contains("iss")) {
    const auto& s = doc["iss"];
    detail::reject_unknown(s, {"theta", "samples"}, "iss");
    if (s.contains("theta") && !s["theta"].is_null()) {
      double theta = 0.0;
      read(s, "theta", theta, "iss");
      cfg.iss.theta = theta;
    }
    read(s, "samples", cfg.iss.samples, "iss");
  }
  if (doc.contains("multiagent")) {
    const auto& s = doc["multiagent"];
    detail::reject_unknown(
        s, {"m", "k_p", "k_d", "alpha", "dt", "t_final", "amplitude", "frequency", "edge_probability", "offset"},
        "multiagent");
    read(s, "m", cfg.swarm.m, "multiagent");
    read(s, "k_p", cfg.swarm.k_p, "multiagent");
    read(s, "k_d", cfg.swarm.k_d, "multiagent");
    read(s, "alpha", cfg.swarm.alpha, "multiagent");
    read(s, "dt", cfg.swarm.dt, "multiagent");
    read(s, "t_final", cfg.swarm.t_final, "multiagent");
    read(s, "amplitude", cfg.swarm.amplitude, "multiagent");
    read(s, "frequency", cfg.swarm.frequency, "multiagent");
    read(s, "edge_probability", cfg.swarm.edge_probability, "multiagent");
    read(s, "offset", cfg.swarm.offset, "multiagent");
  }
  if (doc.contains("output_dir")) {
    std::string out;
    read(doc, "output_dir", out, "config");
    cfg.output_dir = out;
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: malformed JSON: ") + e.what());
  } catch (const std::runtime_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json sys = {{"generator", cfg.system.generator}};
  if (cfg.system.generator == "spec") {
    sys["spec"] = cfg.system.spec_path;
  } else {
    sys["n"] = cfg.system.n;
    sys["alpha"] = cfg.system.alpha;
    if (cfg.system.generator == "complete") sys["weight"] = cfg.system.weight;
  }
  return {{"system", sys},
          {"seed", cfg.seed},
          {"dt", cfg.dt},
          {"t_final", cfg.t_final},
          {"record_every", cfg.record_every},
          {"initial", cfg.initial},
          {"perturbation", {{"delta_norm", cfg.perturbation.delta_norm}, {"symmetric", cfg.perturbation.symmetric}}},
          {"input",
           {{"amplitude", cfg.input.amplitude},
            {"frequency", cfg.input.frequency},
            {"pair", {cfg.input.first + 1, cfg.input.second + 1}}}},
          {"sweep", {{"levels", cfg.levels}}},
          {"iss", {{"theta", cfg.iss.theta ? nlohmann::json(*cfg.iss.theta) : nlohmann::json()},
                   {"samples", cfg.iss.samples}}},
          {"multiagent",
           {{"m", cfg.swarm.m},
            {"k_p", cfg.swarm.k_p},
            {"k_d", cfg.swarm.k_d},
            {"alpha", cfg.swarm.alpha},
            {"dt", cfg.swarm.dt},
            {"t_final", cfg.swarm.t_final},
            {"amplitude", cfg.swarm.amplitude},
            {"frequency", cfg.swarm.frequency},
            {"edge_probability", cfg.swarm.edge_probability},
            {"offset", cfg.swarm.offset}}},
          {"output_dir", cfg.output_dir.string()}};
}

// ---------------------------------------------------------------------------
// System assembly

/// A concrete system with its equilibrium. `kernel` is set for structured
/// generators so certificates can use the exact kernel infimum.
struct BuiltSystem {
  HyperTensorSet tensors;
  std::optional<StructuredKernel> kernel;
  StateVector v;
};

inline Matrix base_matrix_for(const ExperimentConfig& cfg) {
  if (cfg.system.generator == "paper")
    return symmetric_base_matrix(cfg.system.n, derive_seed(cfg.seed, streams::base_matrix));
  if (cfg.system.generator == "complete") {
    Matrix S = Matrix::Constant(cfg.system.n, cfg.system.n, cfg.system.weight);
    S.diagonal().setZero();
    return S;
  }
  throw ValidationError("config: spec systems have no base matrix");
}

inline BuiltSystem build_system(const ExperimentConfig& cfg) {
  if (cfg.system.generator == "spec") {
    HyperTensorSet t = load_spec(cfg.system.spec_path);
    StateVector v = equilibrium_from_tgdb(t);
    return BuiltSystem{std::move(t), std::nullopt, std::move(v)};
  }
  const double alpha = cfg.system.generator == "paper" ? cfg.system.alpha : 0.0;
  StructuredSystem s = make_structured_system(base_matrix_for(cfg), alpha);
  StateVector v = equilibrium_from_tgdb(s.tensors);
  return BuiltSystem{std::move(s.tensors), s.kernel, std::move(v)};
}

inline StateVector initial_state(const ExperimentConfig& cfg, int n) {
  if (cfg.initial == "uniform") return StateVector::uniform(n);
  Rng rng(derive_seed(cfg.seed, streams::initial_state));
  return sample_simplex(n, rng);
}

inline StabilityCertificate certify(const BuiltSystem& sys, std::uint64_t seed) {
  DissipationOptions opts;
  opts.seed = derive_seed(seed, streams::kernel_sampling);
  return dissipation_constant(sys.tensors, sys.v, support_graph(sys.tensors),
                              sys.kernel ? &*sys.kernel : nullptr, opts);
}

namespace detail {

inline nlohmann::json vec_json(const Vector& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

inline nlohmann::json spectrum_json(const std::vector<std::complex<double>>& spec) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& z : spec) out.push_back({z.real(), z.imag()});
  return out;
}

inline nlohmann::json tgdb_json(const TgdbReport& r) {
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : r.violations) viol.push_back({{"entry", describe(v.key)}, {"residual", v.residual}});
  return {{"holds", r.holds}, {"reference", vec_json(r.reference)}, {"max_residual", r.max_residual},
          {"violations", viol}};
}

inline nlohmann::json certificate_json(const StabilityCertificate& c) {
  return {{"v", vec_json(c.v)},
          {"c_gap", c.c_gap},
          {"reduced_spectrum", spectrum_json(c.spectrum)},
          {"c", c.c},
          {"v_min", c.v_min},
          {"v_max", c.v_max},
          {"q_bar", c.q_bar},
          {"q_bar_method", c.q_bar_method},
          {"lambda_star", c.lambda_star},
          {"tgdb_holds", c.tgdb_holds}};
}

inline std::vector<Series> component_series(const Trajectory& traj) {
  std::vector<Series> out;
  const int n = traj.states.front().size();
  for (int i = 0; i < n; ++i) {
    Series s{"x" + std::to_string(i + 1), traj.times, {}};
    for (const auto& x : traj.states) s.ys.push_back(x[i]);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands. Each returns the JSON summary also stored in the manifest.

inline nlohmann::json cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const BuiltSystem sys = build_system(cfg);
  const StabilityCertificate cert = certify(sys, cfg.seed);
  const Trajectory traj = integrate(sys.tensors, initial_state(cfg, sys.tensors.size()), cfg.integrator(),
                                    nullptr, sys.v);

  double mass_drift = 0.0;
  for (const auto& d : traj.diagnostics) mass_drift = std::max(mass_drift, std::abs(d.mass_residual));
  const double final_distance = (traj.final_state().values() - sys.v.values()).lpNorm<Eigen::Infinity>();

  nlohmann::json certificate = detail::certificate_json(cert);
  certificate["final_distance_inf"] = final_distance;
  certificate["max_mass_residual"] = mass_drift;

  RunManifest manifest(cfg.output_dir);
  manifest.emit("trajectory.csv", trajectory_table(traj).str());
  manifest.emit("certificate.json", certificate.dump(2) + "\n");
  manifest.emit("trajectory.svg", emit_svg(detail::component_series(traj),
                                           PlotOptions{"state components", "t", "x_i"}));
  nlohmann::json summary = {{"command", "simulate"},
                            {"final_distance_inf", final_distance},
                            {"max_mass_residual", mass_drift},
                            {"c", cert.c},
                            {"c_gap", cert.c_gap}};
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", summary}};
  manifest.finish();
  return summary;
}

inline nlohmann::json cmd_perturbed(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.system.generator == "spec")
    throw ValidationError("perturbed: needs a structured generator (\"paper\" or \"complete\")");
  const BuiltSystem sys = build_system(cfg);
  const int n = sys.tensors.size();
  if (cfg.input.first >= n || cfg.input.second >= n) throw ValidationError("config: input.pair is out of range");
  const StabilityCertificate cert = certify(sys, cfg.seed);

  const Matrix S = sys.kernel->base;
  const double alpha = sys.kernel->alpha;
  const ClippedPerturbation pert = clip_perturbation(
      S, generate_perturbation(n, cfg.perturbation.delta_norm, cfg.perturbation.symmetric,
                               derive_seed(cfg.seed, streams::perturbation)));
  const StructuredSystem perturbed = make_structured_system(pert.perturbed, alpha);
  const HyperTensorSet delta = encode_direction(pert.effective, alpha);
  const InputSignal w = sinusoidal_pair_input(n, cfg.input.amplitude, cfg.input.frequency, cfg.input.first,
                                              cfg.input.second);

  const Trajectory traj =
      integrate(perturbed.tensors, initial_state(cfg, n), cfg.integrator(), &w, sys.v);

  const double theta = cfg.iss.theta.value_or(sys.v.values().minCoeff() / 2.0);
  IssOptions iopts;
  iopts.seed = derive_seed(cfg.seed, streams::iss_sampling);
  iopts.samples = cfg.iss.samples;
  const HyperTensorSet pattern = pattern_union(sys.tensors, delta);
  const IssConstants k = iss_constants(sys.tensors, sys.v, theta, cert, iopts, &pattern);
  const double delta_norm = frobenius_norm(delta);
  const double input_sup = cfg.input.amplitude * std::sqrt(2.0);
  const EnvelopeCheck env = iss_envelope_check(traj, k, delta_norm, input_sup);

  const NewtonResult shifted = equilibrium_newton(perturbed.tensors, sys.v);
  const Vector shift = shifted.x.values() - sys.v.values();
  double max_dev = 0.0;
  for (const auto& x : traj.states) max_dev = std::max(max_dev, (x.values() - sys.v.values()).lpNorm<Eigen::Infinity>());

  nlohmann::json report = {
      {"perturbation",
       {{"requested_norm", cfg.perturbation.delta_norm},
        {"pre_clip_norm", pert.pre_norm},
        {"post_clip_norm", pert.post_norm},
        {"tensor_norm", delta_norm},
        {"symmetric", cfg.perturbation.symmetric}}},
      {"input", {{"description", w.description()}, {"sup_norm", input_sup}}},
      {"iss_constants",
       {{"theta", k.theta},
        {"kappa", k.kappa},
        {"L_A", k.L_A},
        {"m", k.m_lo},
        {"M", k.M_hi},
        {"c", k.c},
        {"C1", k.C1},
        {"C2", k.C2},
        {"eta", k.eta}}},
      {"envelope",
       {{"violations", env.violations},
        {"margin", env.margin},
        {"checked", env.checked},
        {"outside_omega", env.outside_omega},
        {"anchor_time", env.anchor_time},
        {"floor", env.floor},
        {"final_V", traj.diagnostics.back().entropy}}},
      {"equilibrium_shift",
       {{"perturbed_equilibrium", detail::vec_json(shifted.x.values())},
        {"shift_norm", shift.norm()},
        {"shift_inf", shift.lpNorm<Eigen::Infinity>()},
        {"newton_iterations", shifted.iterations},
        {"newton_residual", shifted.residual}}},
      {"max_deviation_inf", max_dev},
      {"certificate", detail::certificate_json(cert)}};

  RunManifest manifest(cfg.output_dir);
  manifest.emit("trajectory.csv", trajectory_table(traj).str());
  manifest.emit("report.json", report.dump(2) + "\n");
  manifest.emit("trajectory.svg", emit_svg(detail::component_series(traj),
                                           PlotOptions{"perturbed state components", "t", "x_i"}));
  nlohmann::json summary = {{"command", "perturbed"},
                            {"post_clip_norm", pert.post_norm},
                            {"envelope_violations", env.violations},
                            {"shift_norm", shift.norm()}};
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", summary}, {"post_clip_norm", pert.post_norm}};
  manifest.finish();
  return summary;
}

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;        // over all levels with positive post-clip norm
  double slope_small = 0.0;  // over post-clip norms in (0, 0.3]
};

inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  if (cfg.system.generator == "spec")
    throw ValidationError("sweep: needs a structured generator (\"paper\" or \"complete\")");
  const Matrix S = base_matrix_for(cfg);
  const StateVector v = equilibrium_from_tgdb(make_structured_system(S, cfg.system.alpha).tensors);
  SweepSettings settings;
  settings.alpha = cfg.system.generator == "paper" ? cfg.system.alpha : 0.0;
  settings.symmetric = cfg.perturbation.symmetric;
  settings.dt = cfg.dt;
  settings.t_final = cfg.t_final;
  SweepResult out;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i)
    out.rows.push_back(
        compute_sweep_level(S, v, cfg.levels[i], derive_seed(cfg.seed, streams::sweep_level + i), settings));
  out.slope = loglog_slope(out.rows);
  out.slope_small = loglog_slope(out.rows, 0.3);
  return out;
}

inline nlohmann::json cmd_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const SweepResult res = run_sweep(cfg);
  CsvTable table;
  table.header = {"level", "pre_norm", "post_norm", "measured_shift", "predicted_shift", "gap"};
  Series measured{"measured", {}, {}}, predicted{"predicted", {}, {}};
  for (const auto& r : res.rows) {
    table.rows.push_back({r.level, r.pre_norm, r.post_norm, r.measured_shift, r.predicted_shift, r.gap});
    measured.xs.push_back(r.post_norm);
    measured.ys.push_back(r.measured_shift);
    predicted.xs.push_back(r.post_norm);
    predicted.ys.push_back(r.predicted_shift);
  }
  RunManifest manifest(cfg.output_dir);
  manifest.emit("sweep.csv", table.str());
  PlotOptions opt{"equilibrium shift vs perturbation norm", "post-clip ||dS||_F", "||v~ - v||"};
  opt.log_x = opt.log_y = opt.markers = true;
  bool drawable = false;
  for (const auto& r : res.rows) drawable = drawable || (r.post_norm > 0.0 && r.measured_shift > 0.0);
  if (drawable) manifest.emit("loglog.svg", emit_svg({measured, predicted}, opt));
  auto finite_or_null = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  nlohmann::json summary = {{"command", "sweep"},
                            {"levels", res.rows.size()},
                            {"slope", finite_or_null(res.slope)},
                            {"slope_small", finite_or_null(res.slope_small)}};
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", summary}};
  manifest.finish();
  return summary;
}

/// Writes certificate.json. A support graph that is not strongly connected
/// is reported in the file and then raised as a ConnectivityError.
inline nlohmann::json cmd_spectral(const ExperimentConfig& cfg) {
  cfg.validate();
  HyperTensorSet tensors = HyperTensorSet::empty(1);
  std::optional<StructuredKernel> kernel;
  if (cfg.system.generator == "spec") {
    tensors = load_spec(cfg.system.spec_path);
  } else {
    const double alpha = cfg.system.generator == "paper" ? cfg.system.alpha : 0.0;
    StructuredSystem s = make_structured_system(base_matrix_for(cfg), alpha);
    tensors = s.tensors;
    kernel = s.kernel;
  }
  const SupportGraph g = support_graph(tensors);
  const bool strong = is_connected(g, ConnectivityMode::strong);
  const bool undirected = is_connected(g, ConnectivityMode::undirected);
  nlohmann::json doc = {{"n", tensors.size()},
                        {"connectivity", {{"strongly_connected", strong}, {"undirected_connected", undirected}}}};
  RunManifest manifest(cfg.output_dir);
  if (!strong) {
    doc["unique_equilibrium"] = false;
    doc["error"] = "support graph is not strongly connected; the balanced equilibrium is not unique";
    manifest.emit("certificate.json", doc.dump(2) + "\n");
    manifest.info() = {{"config", config_to_json(cfg)}, {"summary", {{"command", "spectral"}, {"ok", false}}}};
    manifest.finish();
    throw ConnectivityError("spectral: support graph is not strongly connected; equilibrium is not unique");
  }
  const BuiltSystem sys{tensors, kernel, equilibrium_from_tgdb(tensors)};
  const StabilityCertificate cert = certify(sys, cfg.seed);
  doc["unique_equilibrium"] = true;
  doc["certificate"] = detail::certificate_json(cert);
  doc["tgdb"] = detail::tgdb_json(check_tgdb(tensors, sys.v));
  manifest.emit("certificate.json", doc.dump(2) + "\n");
  nlohmann::json summary = {{"command", "spectral"}, {"ok", true}, {"c_gap", cert.c_gap}, {"c", cert.c}};
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", summary}};
  manifest.finish();
  return summary;
}

/// Structural validation of a system: entry checks happen at load, then TGDB
/// and connectivity are reported without requiring them to hold.
inline nlohmann::json cmd_check(const ExperimentConfig& cfg) {
  cfg.validate();
  HyperTensorSet tensors = cfg.system.generator == "spec"
                               ? load_spec(cfg.system.spec_path)
                               : make_structured_system(base_matrix_for(cfg),
                                                        cfg.system.generator == "paper" ? cfg.system.alpha : 0.0)
                                     .tensors;
  const SupportGraph g = support_graph(tensors);
  nlohmann::json doc = {{"valid", true},
                        {"n", tensors.size()},
                        {"max_order", tensors.max_order()},
                        {"entries", tensors.entry_count()},
                        {"connectivity",
                         {{"strongly_connected", is_connected(g, ConnectivityMode::strong)},
                          {"undirected_connected", is_connected(g, ConnectivityMode::undirected)}}}};
  try {
    const StateVector v = equilibrium_from_tgdb(tensors);
    doc["tgdb"] = detail::tgdb_json(check_tgdb(tensors, v));
  } catch (const NumericalError& e) {
    doc["tgdb"] = {{"holds", false}, {"reason", e.what()}};
  }
  RunManifest manifest(cfg.output_dir);
  manifest.emit("check.json", doc.dump(2) + "\n");
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", {{"command", "check"}}}};
  manifest.finish();
  return doc;
}

inline MasConfig swarm_config(const ExperimentConfig& cfg) {
  MasConfig m;
  m.m = cfg.swarm.m;
  m.k_p = cfg.swarm.k_p;
  m.k_d = cfg.swarm.k_d;
  m.alpha = cfg.swarm.alpha;
  m.dt = cfg.swarm.dt;
  m.t_final = cfg.swarm.t_final;
  m.record_every = cfg.record_every;
  m.base = random_connected_topology(cfg.swarm.m, derive_seed(cfg.seed, streams::swarm_topology),
                                     cfg.swarm.edge_probability);
  m.disturbance = pair_disturbance(cfg.swarm.m, cfg.swarm.amplitude, cfg.swarm.frequency);
  return m;
}

inline nlohmann::json cmd_multiagent(const ExperimentConfig& cfg) {
  cfg.validate();
  const MasConfig mas = swarm_config(cfg);
  const AgentSwarmState x0 =
      scattered_initial_state(cfg.swarm.m, derive_seed(cfg.seed, streams::swarm_initial), cfg.swarm.offset);
  const SwarmTrajectory traj = simulate_swarm(mas, x0);
  const double drift = momentum_drift(traj);

  std::vector<Series> paths;
  for (int i = 0; i < mas.m; ++i) {
    Series s{"agent " + std::to_string(i + 1), {}, {}};
    for (const auto& x : traj.states) {
      s.xs.push_back(x.p(i, 0));
      s.ys.push_back(x.p(i, 1));
    }
    paths.push_back(std::move(s));
  }
  RunManifest manifest(cfg.output_dir);
  manifest.emit("swarm.csv", swarm_table(traj).str());
  manifest.emit("trajectories.svg", emit_svg(paths, PlotOptions{"agent paths", "p_x", "p_y"}));
  manifest.emit("meandist.svg", emit_svg({Series{"mean distance", traj.times, traj.mean_distance}},
                                         PlotOptions{"mean distance to centroid", "t", "distance"}));
  nlohmann::json summary = {{"command", "multiagent"},
                            {"momentum_drift", drift},
                            {"initial_mean_distance", traj.mean_distance.front()},
                            {"final_mean_distance", traj.mean_distance.back()}};
  manifest.info() = {{"config", config_to_json(cfg)}, {"summary", summary}, {"momentum_drift", drift}};
  manifest.finish();
  return summary;
}

/// Dispatches a command and maps failures to exit codes: 0 success,
/// 1 validation, 2 numerical.
inline int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  try {
    nlohmann::json summary;
    if (name == "simulate")
      summary = cmd_simulate(cfg);
    else if (name == "perturbed")
      summary = cmd_perturbed(cfg);
    else if (name == "sweep")
      summary = cmd_sweep(cfg);
    else if (name == "spectral")
      summary = cmd_spectral(cfg);
    else if (name == "check")
      summary = cmd_check(cfg);
    else if (name == "multiagent")
      summary = cmd_multiagent(cfg);
    else
      throw ValidationError("unknown command '" + name + "'");
    out << summary.dump(2) << '\n';
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hyperflow
