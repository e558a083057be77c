#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oscq/errors.hpp"
#include "oscq/io.hpp"
#include "oscq/scenario.hpp"
#include "support.hpp"

using namespace oscq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("oscq_test_" + tag + "_" + std::to_string(testing::seed()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path scenario_file(const std::string& name) { return fs::path(OSCQ_SCENARIO_DIR) / (name + ".json"); }

std::string config_error(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigInvalid);
    return e.what();
  }
  FAIL("expected ConfigInvalid");
  return {};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("numbers round trip through their text form") {
  auto rng = testing::make_rng(90);
  for (int i = 0; i < 200; ++i) {
    const double v = testing::normal_vec(rng, 1)(0) * std::pow(10.0, testing::uniform(rng, -12, 12));
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("trajectory and error CSV layouts") {
  const fs::path dir = scratch("csv");
  Trajectory tr;
  tr.dim = 2;
  tr.times = {0.0, 0.5};
  tr.real_states = Mat::Zero(2, 4);
  tr.real_states(1, 0) = 1.5;
  write_trajectory_csv(dir / "a.csv", tr);
  auto lines = lines_of(read_text_file(dir / "a.csv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "t,x1,x2,v1,v2");
  CHECK(lines[2] == "0.5,1.5,0,0,0");

  Trajectory cx;
  cx.kind = TrajectoryKind::ComplexState;
  cx.dim = 1;
  cx.times = {0.0};
  cx.complex_states = CMat::Constant(1, 1, cplx(0.25, -1.0));
  write_trajectory_csv(dir / "b.csv", cx);
  lines = lines_of(read_text_file(dir / "b.csv"));
  CHECK(lines[0] == "t,re1,im1");
  CHECK(lines[1] == "0,0.25,-1");

  write_error_csv(dir / "sub" / "e.csv", {0.0, 1.0}, {0.0, 2e-9});
  lines = lines_of(read_text_file(dir / "sub" / "e.csv"));
  CHECK(lines[0] == "t,err");
  CHECK(lines.size() == 3);

  CsvTable table({"k", "v"});
  table.add_row({"1", "2"});
  CHECK_THROWS_AS(table.add_row({"only one"}), Error);
  table.write(dir / "t.csv");
  CHECK(read_text_file(dir / "t.csv") == "k,v\n1,2\n");
  CHECK_THROWS_AS(read_text_file(dir / "missing.csv"), Error);
  fs::remove_all(dir);
}

TEST_CASE("pipeline tags and exit codes") {
  for (const char* tag : {"linear", "forced", "nonlinear", "td-stiffness", "td-forced", "nls-direct", "nls-carleman"}) {
    CHECK(pipeline_name(parse_pipeline(tag)) == tag);
  }
  CHECK_THROWS_AS(parse_pipeline("quantum"), Error);
  CHECK(exit_code_for(Error(ErrorCode::ConfigInvalid, "")) == kExitConfigError);
  CHECK(exit_code_for(Error(ErrorCode::BoundViolated, "")) == kExitCheckFailed);
  CHECK(exit_code_for(Error(ErrorCode::RegimeViolated, "")) == kExitCheckFailed);
  CHECK(exit_code_for(Error(ErrorCode::NotHermitian, "")) == kExitInternalError);
}

TEST_CASE("config validation names the offending field") {
  CHECK(config_error("{ not json").find("JSON") != std::string::npos);
  CHECK(config_error(R"({"pipeline": "linear", "t": 1, "samples": 5, "system": {"masses": [1], "stiffness": [[1]], "x0": [1], "v0": [0]}})")
            .find("name") != std::string::npos);
  CHECK(config_error(R"({"name": "x", "pipeline": "linear", "t": 1, "samples": 1, "system": {"masses": [1], "stiffness": [[1]], "x0": [1], "v0": [0]}})")
            .find("samples") != std::string::npos);
  CHECK(config_error(R"({"name": "x", "pipeline": "linear", "t": 1, "samples": 5, "colour": 3, "system": {"masses": [1], "stiffness": [[1]], "x0": [1], "v0": [0]}})")
            .find("colour") != std::string::npos);
  CHECK(config_error(R"({"name": "x", "pipeline": "linear", "t": 1, "samples": 5, "epsilon": 0.1, "system": {"masses": [1], "stiffness": [[1, 2]], "x0": [1], "v0": [0]}})")
            .find("stiffness") != std::string::npos);
  CHECK(config_error(R"({"name": "x", "pipeline": "forced", "t": 1, "samples": 5, "epsilon": 0.01, "system": {"masses": [1], "stiffness": [[1]], "x0": [1], "v0": [0]}})")
            .find("forcing") != std::string::npos);
  CHECK(config_error(R"({"name": "x", "pipeline": "linear", "t": 1, "samples": 5, "system": {"masses": [-1], "stiffness": [[1]], "x0": [1], "v0": [0]}})")
            .size() > 0);
}

TEST_CASE("bundled scenarios load") {
  for (const char* name : {"harmonic_1d", "forced_1d", "chain_3", "nonlinear_1d", "mathieu_1d", "td_forced_1d",
                           "nls_scalar", "nls_direct_2"}) {
    INFO(name);
    const Scenario sc = load_scenario(scenario_file(name));
    CHECK(sc.name == name);
    CHECK(sc.samples >= 2);
  }
}

TEST_CASE("harmonic scenario writes a cosine trajectory and passes") {
  const fs::path dir = scratch("harmonic");
  const RunResult r = run_scenario(load_scenario(scenario_file("harmonic_1d")), dir);
  CHECK(r.exit_code == kExitPass);
  CHECK(r.pass);
  CHECK(fs::exists(dir / "harmonic_1d_trajectory.csv"));
  CHECK(fs::exists(dir / "harmonic_1d_report.json"));
  CHECK(fs::exists(dir / "harmonic_1d_error.csv"));
  const auto lines = lines_of(read_text_file(dir / "harmonic_1d_trajectory.csv"));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string t, x;
    std::getline(ss, t, ',');
    std::getline(ss, x, ',');
    CHECK(std::abs(std::stod(x) - std::cos(std::stod(t))) <= 1e-8);
  }
  fs::remove_all(dir);
}

TEST_CASE("forced scenario echoes the fictitious mass") {
  const fs::path dir = scratch("forced");
  const RunResult r = run_scenario(load_scenario(scenario_file("forced_1d")), dir);
  CHECK(r.pass);
  const std::string report = read_text_file(dir / "forced_1d_report.json");
  CHECK(report.find("\"m_f\"") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("repeated runs are byte identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const char* name : {"nls_scalar", "nonlinear_1d", "td_forced_1d"}) {
    const Scenario sc = load_scenario(scenario_file(name));
    run_scenario(sc, a);
    run_scenario(sc, b);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    CHECK(read_text_file(entry.path()) == read_text_file(b / entry.path().filename()));
    ++compared;
  }
  CHECK(compared == 9);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("eta sweep on the scalar NLS case") {
  const fs::path dir = scratch("sweep");
  const Scenario sc = load_scenario(scenario_file("nls_scalar"));
  const RunResult r = run_sweep(sc, SweepParam::Eta, {4, 8, 16, 32, 64}, dir);
  const auto lines = lines_of(read_text_file(dir / "nls_scalar_sweep_eta.csv"));
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "param,value,k,eta,t,measured_error,bound,pass,first_block_error");
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string cell;
    for (int c = 0; c < 6; ++c) std::getline(ss, cell, ',');
    const double err = std::stod(cell);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(r.summary.find("slope") != std::string::npos);
  CHECK_THROWS_AS(run_sweep(sc, SweepParam::Eta, {}, dir), Error);
  CHECK_THROWS_AS(run_sweep(sc, SweepParam::K, {1.5}, dir), Error);
  CHECK_THROWS_AS(run_sweep(sc, SweepParam::MF, {10}, dir), Error);
  fs::remove_all(dir);
}

TEST_CASE("m_f sweep on the forced case") {
  const fs::path dir = scratch("mf");
  const Scenario sc = load_scenario(scenario_file("forced_1d"));
  const RunResult r = run_sweep(sc, SweepParam::MF, {200, 2000, 20000}, dir);
  CHECK(r.pass);
  CHECK(lines_of(read_text_file(dir / "forced_1d_sweep_m_f.csv")).size() == 4);
  fs::remove_all(dir);
}

TEST_CASE("validation probes pass on every bundled scenario") {
  for (const char* name : {"harmonic_1d", "forced_1d", "nonlinear_1d", "mathieu_1d", "td_forced_1d", "nls_scalar"}) {
    INFO(name);
    const RunResult r = validate_scenario(load_scenario(scenario_file(name)), testing::seed());
    CHECK(r.pass);
    CHECK(r.files.empty());
  }
}
