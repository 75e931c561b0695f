#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bsrd/run_config.hpp"
#include "bsrd/runner.hpp"

using namespace bsrd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bsrd_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config gets defaults and provenance") {
  const RunConfig cfg =
      parse_config(R"({"command": "simulate", "model": "toy_conserving"})");
  CHECK(cfg.command == "simulate");
  CHECK(cfg.model == "toy_conserving");
  CHECK(cfg.n_r == 32);
  CHECK(cfg.n_theta == 64);
  CHECK(cfg.provenance.at("command") == "user");
  CHECK(cfg.provenance.count("mesh.n_r") == 0);  // defaulted, not user-set
  const std::string echo = cfg.echo_json();
  CHECK(echo.find("\"n_r\": 32") != std::string::npos);
}

TEST_CASE("strict mode rejects unknown keys with suggestions") {
  try {
    parse_config(R"({"command": "simulate", "moddel": "toy_conserving"})");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("moddel") != std::string::npos);
    CHECK(msg.find("did you mean \"model\"") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"command": "simulate", "mesh": {"n_red": 3}})"),
                  ConfigError);
}

TEST_CASE("type mismatches report the offending path") {
  try {
    parse_config(R"({"command": "simulate", "mesh": {"n_r": "many"}})");
    CHECK(false);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("mesh.n_r") != std::string::npos);
  }
}

TEST_CASE("bulk/surface node-count mismatch is named in the error") {
  try {
    parse_config(
        R"({"command": "simulate", "mesh": {"n_theta": 64, "surface_n_theta": 32}})");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("n_theta") != std::string::npos);
    CHECK(msg.find("surface_n_theta") != std::string::npos);
  }
}

TEST_CASE("invalid command and invalid JSON are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"command": "simulte"})"), ConfigError);
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("simulate run writes manifest, monitors and snapshots; exit 0 on passed assertions") {
  const fs::path dir = temp_dir("simulate");
  RunConfig cfg = parse_config(R"({
    "command": "simulate",
    "model": "toy_conserving",
    "mesh": {"n_r": 6, "n_theta": 12},
    "time": {"t_end": 0.2}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);

  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["result"]["outcome"]["status"] == "completed");
  CHECK(manifest["all_assertions_passed"] == true);
  CHECK(manifest.contains("output_hash"));
  bool saw_conservation = false;
  for (const auto& a : manifest["result"]["assertions"])
    if (a["name"] == "conservation_total_mass") {
      saw_conservation = true;
      CHECK(a["passed"] == true);
    }
  CHECK(saw_conservation);

  const std::string monitors = slurp(dir / "run" / "monitors.csv");
  CHECK(monitors.find("time,name,value") == 0);
  CHECK(monitors.find("conserved_total_mass") != std::string::npos);
  CHECK(fs::exists(dir / "run" / "snapshot_u1_0.csv"));
}

TEST_CASE("simulate run on the blow-up preset reports the detection as success") {
  const fs::path dir = temp_dir("blowup");
  RunConfig cfg = parse_config(R"({
    "command": "simulate",
    "model": "blowup_ode",
    "mesh": {"n_r": 4, "n_theta": 16},
    "time": {"t_end": 10.0}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["result"]["outcome"]["status"] == "blowup_detected");
  const double t_est = manifest["result"]["outcome"]["t_est"].get<double>();
  CHECK(t_est >= 0.45);
  CHECK(t_est <= 0.55);
}

TEST_CASE("check run emits the verdict report with a violation witness for toy_open") {
  const fs::path dir = temp_dir("check");
  RunConfig cfg = parse_config(R"({
    "command": "check",
    "model": "toy_open",
    "checker": {"samples": 128}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);  // a not-verified verdict is a finding, not an error
  CHECK(result.summary.find("not-verified") != std::string::npos);
  CHECK(result.summary.find("sampling evidence") != std::string::npos);

  const auto report = nlohmann::json::parse(slurp(dir / "run" / "checker_report.json"));
  CHECK(report["verdict"]["status"] == "not-verified");
  bool has_witness = false;
  for (const auto& rep : report["verdict"]["reports"])
    if (rep["condition"] == "V2" && rep["status"] == "violated" && rep.contains("witness"))
      has_witness = true;
  CHECK(has_witness);
}

TEST_CASE("converge run fits the expected spatial order") {
  const fs::path dir = temp_dir("converge");
  RunConfig cfg = parse_config(R"({
    "command": "converge",
    "converge": {"preset": "surface_eigenmode", "levels": [16, 32, 64], "dt": 1e-4,
                  "t_end": 0.5}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  const double order = manifest["result"]["fitted_order"].get<double>();
  CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  CHECK(fs::exists(dir / "run" / "orders.csv"));
}

TEST_CASE("converge rejects short ladders") {
  RunConfig cfg = parse_config(R"({
    "command": "converge",
    "converge": {"preset": "surface_eigenmode", "levels": [16, 32]}
  })");
  const fs::path dir = temp_dir("converge_short");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status != 0);  // precondition failure recorded in the manifest
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest.contains("error"));
}

TEST_CASE("initial-data expressions in the config shape the sampled fields") {
  const fs::path dir = temp_dir("initial_expr");
  RunConfig cfg = parse_config(R"({
    "command": "simulate",
    "model": "toy_conserving",
    "mesh": {"n_r": 6, "n_theta": 12},
    "time": {"t_end": 0.1},
    "initial": {"u": ["1 + 0.1 * r^2"], "v": ["0.5"]}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["result"]["outcome"]["status"] == "completed");
  CHECK(manifest.contains("config_text"));
  // Total mass is conserved, so the final bulk + surface total matches
  // the quadrature of the initial expressions: pi (1 + 0.05) for
  // 1 + 0.1 r^2 over the disk plus pi for 0.5 on the circle.
  const double total =
      manifest["result"]["monitor_summary"]["final_bulk_mass"][0].get<double>() +
      manifest["result"]["monitor_summary"]["final_surf_mass"][0].get<double>();
  CHECK(total == doctest::Approx(3.14159265 * 2.05).epsilon(0.02));
}

TEST_CASE("user model files drive a simulate run end to end") {
  const fs::path dir = temp_dir("model_file");
  const fs::path model_path = dir / "model.json";
  {
    std::ofstream out(model_path);
    out << R"json({
      "name": "exchange_example",
      "species": {"bulk": ["u1"], "surface": ["v1"]},
      "D": [1.0],
      "D_tilde": [0.5],
      "params": {"a": 2.0, "cap": 3.0},
      "H": ["0"],
      "F": ["a * u1 * max0(cap - v1)"],
      "G": ["-a * u1 * max0(cap - v1)"],
      "quasi_positive": true,
      "conserved": [{"cu": [1.0], "cv": [1.0], "label": "total"}],
      "initial": {"u": ["1 + 0.1 * r^2"], "v": ["0.5"]}
    })json";
  }
  RunConfig cfg = parse_config(R"({
    "command": "simulate",
    "model_file": ")" + model_path.string() + R"(",
    "mesh": {"n_r": 6, "n_theta": 12},
    "time": {"t_end": 0.2}
  })");
  cfg.out_dir = (dir / "run").string();
  const RunResult result = run(cfg);
  CHECK(result.exit_status == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(manifest["result"]["outcome"]["status"] == "completed");
  bool saw = false;
  for (const auto& a : manifest["result"]["assertions"])
    if (a["name"] == "conservation_total") {
      saw = true;
      CHECK(a["passed"] == true);
    }
  CHECK(saw);
}

TEST_CASE("reproducibility: identical config and seed give identical manifest hashes") {
  auto run_once = [](const std::string& tag) {
    const fs::path dir = temp_dir("repro_" + tag);
    RunConfig cfg = parse_config(R"({
      "command": "simulate",
      "model": "min_system",
      "mesh": {"n_r": 6, "n_theta": 12},
      "time": {"t_end": 0.1},
      "seed": 42
    })");
    cfg.out_dir = (dir / "run").string();
    run(cfg);
    const auto manifest = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
    return manifest["output_hash"].get<std::string>();
  };
  CHECK(run_once("a") == run_once("b"));
}
