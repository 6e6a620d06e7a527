#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "hyperflow/commands.hpp"

using namespace hyperflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hyperflow_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig quick_config(const std::string& name) {
  ExperimentConfig cfg;
  cfg.t_final = 2.0;
  cfg.output_dir = scratch(name);
  return cfg;
}

std::string data(const std::string& file) { return std::string(HYPERFLOW_DATA_DIR) + "/" + file; }

int run_quiet(const std::string& cmd, const ExperimentConfig& cfg) {
  std::ostringstream out, err;
  return run_command(cmd, cfg, out, err);
}

}  // namespace

TEST(Format, RoundTripPrecision) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(std::stod(format_number(0.125)), 0.125);
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333333");
  EXPECT_EQ(format_number(NAN), "nan");
}

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Csv, TrajectoryColumns) {
  const auto sys = make_structured_system(symmetric_base_matrix(8, 1), 0.8);
  IntegratorConfig cfg;
  cfg.t_final = 0.1;
  const auto traj = integrate(sys.tensors, StateVector::uniform(8), cfg, nullptr, StateVector::uniform(8));
  const auto table = trajectory_table(traj);
  EXPECT_EQ(table.header.size(), 12u);
  EXPECT_EQ(table.header.front(), "t");
  EXPECT_EQ(table.header[8], "x8");
  EXPECT_EQ(table.header.back(), "dVdt");
  const std::string text = table.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x1,x2,x3,x4,x5,x6,x7,x8,mass,V,dVdt");
  EXPECT_THROW(trajectory_table(Trajectory{}), ValidationError);
}

TEST(Svg, TwoPointSeries) {
  const std::string svg = emit_svg({Series{"a", {0.0, 1.0}, {1.0, 2.0}}}, PlotOptions{"t"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t count = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++count;
  EXPECT_EQ(count, 1u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Svg, EmptyInputRaises) {
  EXPECT_THROW(emit_svg({}, PlotOptions{}), ValidationError);
  EXPECT_THROW(emit_svg({Series{"a", {}, {}}}, PlotOptions{}), ValidationError);
  PlotOptions log;
  log.log_y = true;
  EXPECT_THROW(emit_svg({Series{"a", {1.0}, {0.0}}}, log), ValidationError);
}

TEST(Manifest, HashesMatchFiles) {
  const auto dir = scratch("manifest");
  RunManifest m(dir);
  m.emit("a.txt", "hello\n");
  m.finish();
  EXPECT_TRUE(verify_manifest(dir));
  write_file_atomic(dir / "a.txt", "tampered\n");
  EXPECT_FALSE(verify_manifest(dir));
}

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = config_from_json(nlohmann::json::parse(
      R"({"seed": 7, "perturbation": {"delta_norm": 0.1}, "sweep": {"levels": [0, 0.1]},
          "input": {"pair": [2, 3]}, "iss": {"theta": null}})"));
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.system.n, 8);
  EXPECT_DOUBLE_EQ(cfg.perturbation.delta_norm, 0.1);
  EXPECT_EQ(cfg.levels.size(), 2u);
  EXPECT_EQ(cfg.input.first, 1);
  EXPECT_FALSE(cfg.iss.theta.has_value());
  EXPECT_EQ(ExperimentConfig{}.levels.size(), 9u);
}

TEST(Config, RejectsBadInput) {
  using nlohmann::json;
  EXPECT_THROW(config_from_json(json::parse(R"({"bogus": 1})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse(R"({"dt": "fast"})")), ValidationError);
  EXPECT_THROW(config_from_json(json::parse(R"({"system": {"generator": "spec"}})")), ValidationError);
  auto bad = config_from_json(json::parse(R"({"perturbation": {"delta_norm": -1}})"));
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = config_from_json(json::parse(R"({"sweep": {"levels": [0.2, 0.1]}})"));
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = config_from_json(json::parse(R"({"multiagent": {"m": 1}})"));
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Config, SpecPathResolvesAgainstConfigDir) {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({"system": {"spec": "two_node.json"}})"),
                                    HYPERFLOW_DATA_DIR);
  EXPECT_EQ(cfg.system.generator, "spec");
  EXPECT_EQ(fs::path(cfg.system.spec_path), fs::path(data("two_node.json")));
}

TEST(Config, ShippedConfigsLoad) {
  const fs::path dir = fs::path(HYPERFLOW_DATA_DIR).parent_path() / "configs";
  const auto baseline = load_config(dir / "baseline.json");
  baseline.validate();
  ExperimentConfig defaults;
  ASSERT_EQ(baseline.levels.size(), defaults.levels.size());
  for (std::size_t i = 0; i < defaults.levels.size(); ++i) EXPECT_NEAR(baseline.levels[i], defaults.levels[i], 1e-15);
  auto lhs = config_to_json(baseline);
  auto rhs = config_to_json(defaults);
  lhs.erase("sweep");
  rhs.erase("sweep");
  EXPECT_EQ(lhs, rhs);
  const auto triangle = load_config(dir / "triangle.json");
  triangle.validate();
  EXPECT_EQ(triangle.system.generator, "spec");
  EXPECT_TRUE(fs::exists(triangle.system.spec_path));
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.iss.theta = 0.01;
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
}

TEST(Perturbation, NormSeedAndClipping) {
  const Matrix d = generate_perturbation(8, 0.3, false, 5);
  EXPECT_NEAR(d.norm(), 0.3, 1e-12);
  EXPECT_EQ(d.diagonal().cwiseAbs().sum(), 0.0);
  EXPECT_EQ(d, generate_perturbation(8, 0.3, false, 5));
  EXPECT_EQ(generate_perturbation(8, 0.0, false, 5).norm(), 0.0);
  const Matrix s = generate_perturbation(5, 1.0, true, 5);
  EXPECT_EQ(s, s.transpose());
  const Matrix S = Matrix::Constant(2, 2, 0.1) - 0.1 * Matrix::Identity(2, 2);
  const auto c = clip_perturbation(S, Matrix{{0.0, -0.5}, {0.05, 0.0}});
  EXPECT_DOUBLE_EQ(c.perturbed(0, 1), 0.0);
  EXPECT_NEAR(c.post_norm, std::hypot(0.1, 0.05), 1e-15);
  EXPECT_GT(c.pre_norm, c.post_norm);
}

TEST(Commands, SimulateWritesArtifacts) {
  const auto cfg = quick_config("simulate");
  ASSERT_EQ(run_quiet("simulate", cfg), 0);
  for (const char* f : {"trajectory.csv", "certificate.json", "trajectory.svg", "manifest.json"})
    EXPECT_TRUE(fs::exists(cfg.output_dir / f)) << f;
  EXPECT_TRUE(verify_manifest(cfg.output_dir));
  const auto cert = nlohmann::json::parse(read_file(cfg.output_dir / "certificate.json"));
  EXPECT_TRUE(cert.at("tgdb_holds").get<bool>());
  EXPECT_GT(cert.at("c_gap").get<double>(), 0.0);
}

TEST(Commands, SimulateIsDeterministic) {
  auto a = quick_config("det_a");
  auto b = quick_config("det_b");
  ASSERT_EQ(run_quiet("simulate", a), 0);
  ASSERT_EQ(run_quiet("simulate", b), 0);
  EXPECT_EQ(read_file(a.output_dir / "trajectory.csv"), read_file(b.output_dir / "trajectory.csv"));
  b.seed = 43;
  ASSERT_EQ(run_quiet("simulate", b), 0);
  EXPECT_NE(read_file(a.output_dir / "trajectory.csv"), read_file(b.output_dir / "trajectory.csv"));
}

TEST(Commands, ShortHorizonIsValidationError) {
  auto cfg = quick_config("short");
  cfg.t_final = 0.0;
  EXPECT_EQ(run_quiet("simulate", cfg), 1);
  EXPECT_EQ(run_quiet("nonsense", quick_config("nonsense")), 1);
}

TEST(Commands, PerturbedWithoutPerturbationMatchesSimulate) {
  auto sim = quick_config("nominal");
  auto pert = quick_config("nominal_p");
  pert.perturbation.delta_norm = 0.0;
  pert.input.amplitude = 0.0;
  ASSERT_EQ(run_quiet("simulate", sim), 0);
  ASSERT_EQ(run_quiet("perturbed", pert), 0);
  EXPECT_EQ(read_file(sim.output_dir / "trajectory.csv"), read_file(pert.output_dir / "trajectory.csv"));
}

TEST(Commands, PerturbedReportsShiftAndEnvelope) {
  auto cfg = quick_config("perturbed");
  cfg.t_final = 20.0;
  ASSERT_EQ(run_quiet("perturbed", cfg), 0);
  const auto rep = nlohmann::json::parse(read_file(cfg.output_dir / "report.json"));
  EXPECT_EQ(rep["envelope"]["violations"].get<long>(), 0);
  EXPECT_GT(rep["equilibrium_shift"]["shift_norm"].get<double>(), 1e-6);
  EXPECT_NEAR(rep["perturbation"]["pre_clip_norm"].get<double>(), 0.3, 1e-12);
  EXPECT_TRUE(verify_manifest(cfg.output_dir));
}

TEST(Commands, SweepSingleZeroLevel) {
  auto cfg = quick_config("sweep0");
  cfg.levels = {0.0};
  ASSERT_EQ(run_quiet("sweep", cfg), 0);
  const std::string csv = read_file(cfg.output_dir / "sweep.csv");
  EXPECT_EQ(csv, "level,pre_norm,post_norm,measured_shift,predicted_shift,gap\n0,0,0,0,0,0\n");
  EXPECT_FALSE(fs::exists(cfg.output_dir / "loglog.svg"));
}

TEST(Commands, SpectralCompleteK3) {
  auto cfg = quick_config("k3");
  cfg.system.generator = "complete";
  cfg.system.n = 3;
  ASSERT_EQ(run_quiet("spectral", cfg), 0);
  const auto doc = nlohmann::json::parse(read_file(cfg.output_dir / "certificate.json"));
  EXPECT_NEAR(doc["certificate"]["c_gap"].get<double>(), 3.0, 1e-10);
  EXPECT_TRUE(doc["tgdb"]["holds"].get<bool>());
}

TEST(Commands, SpectralNonuniqueReportsConnectivityFailure) {
  auto cfg = quick_config("nonunique");
  cfg.system.generator = "spec";
  cfg.system.spec_path = data("nonunique.json");
  EXPECT_EQ(run_quiet("spectral", cfg), 2);
  const auto doc = nlohmann::json::parse(read_file(cfg.output_dir / "certificate.json"));
  EXPECT_FALSE(doc["unique_equilibrium"].get<bool>());
  EXPECT_FALSE(doc["connectivity"]["strongly_connected"].get<bool>());
  EXPECT_FALSE(doc.contains("certificate"));
}

TEST(Commands, CheckReportsWithoutFailing) {
  auto cfg = quick_config("check");
  cfg.system.generator = "spec";
  cfg.system.spec_path = data("nonunique.json");
  ASSERT_EQ(run_quiet("check", cfg), 0);
  const auto doc = nlohmann::json::parse(read_file(cfg.output_dir / "check.json"));
  EXPECT_FALSE(doc["tgdb"]["holds"].get<bool>());
  cfg.system.spec_path = data("triangle_hyper.json");
  ASSERT_EQ(run_quiet("check", cfg), 0);
  EXPECT_TRUE(nlohmann::json::parse(read_file(cfg.output_dir / "check.json"))["tgdb"]["holds"].get<bool>());
  cfg.system.spec_path = data("missing.json");
  EXPECT_EQ(run_quiet("check", cfg), 1);
}

TEST(Commands, MultiagentArtifactsAndValidation) {
  auto cfg = quick_config("swarm");
  ASSERT_EQ(run_quiet("multiagent", cfg), 0);
  for (const char* f : {"swarm.csv", "trajectories.svg", "meandist.svg", "manifest.json"})
    EXPECT_TRUE(fs::exists(cfg.output_dir / f)) << f;
  const std::string csv = read_file(cfg.output_dir / "swarm.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')).find("t,p1_x,p1_y,v1_x,v1_y,p2_x"), 0u);
  const auto manifest = nlohmann::json::parse(read_file(cfg.output_dir / "manifest.json"));
  EXPECT_LE(manifest["momentum_drift"].get<double>(), 1e-9);
  cfg.swarm.m = 1;
  EXPECT_EQ(run_quiet("multiagent", cfg), 1);
}
