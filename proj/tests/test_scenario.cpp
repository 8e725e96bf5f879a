#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "comblab/scenario.hpp"

using namespace comblab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "comblab_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json invariance_json() {
  return nlohmann::json::parse(R"({
    "experiment": "invariance", "p": 2, "boundary": {"expression": "y/2"},
    "k_range": [2, 6], "overrides": [0, 0.5, 1]
  })");
}

}  // namespace

TEST_CASE("scenario validation") {
  CHECK_NOTHROW(parse_scenario(invariance_json()));
  auto j = invariance_json();
  j["p"] = 0.5;
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = invariance_json();
  j["colour"] = "red";
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = invariance_json();
  j.erase("boundary");
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = invariance_json();
  j["boundary"] = "y/";
  try {
    parse_scenario(j);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("boundary") != std::string::npos);
  }
  j = invariance_json();
  j["probes"] = {{0.5, 0.1}};
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
  j = nlohmann::json::parse(R"({"experiment": "regularity", "boundary": "y", "k": 2,
      "points": [{"at": [0.5, 1], "sheet": "upper", "direction": [0, -1]}]})");
  CHECK_THROWS_AS(parse_scenario(j), ConfigError);
}

TEST_CASE("syntax errors report line and column") {
  const auto dir = scratch("syntax");
  std::ofstream(dir / "bad.json") << "{\n  \"experiment\": \"bracket\",\n  \"p\": [2,,]\n}\n";
  try {
    load_scenario(dir / "bad.json");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.json:3:") != std::string::npos);
  }
}

TEST_CASE("invariance scenario writes bracket rows") {
  const auto dir = scratch("inv");
  auto cfg = parse_scenario(invariance_json());
  RunOptions opts;
  opts.out_dir = dir;
  opts.threads = 3;
  const auto res = run_scenario(cfg, opts);
  CHECK(res.exit_code == 0);
  const auto csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("experiment,p,k,h,probe_x,probe_y,upper,lower,width,extra\n", 0) == 0);
  int bracket_rows = 0;
  std::istringstream lines(csv);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("invariance,", 0) == 0) ++bracket_rows;
  CHECK(bracket_rows == 5);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["pass"] == true);

  // same config, different thread count: identical bytes
  const auto dir2 = scratch("inv2");
  opts.out_dir = dir2;
  opts.threads = 1;
  run_scenario(cfg, opts);
  CHECK(slurp(dir / "results.csv") == slurp(dir2 / "results.csv"));
  CHECK(slurp(dir / "summary.json") == slurp(dir2 / "summary.json"));
}

TEST_CASE("failing property and failing solve give distinct exit codes") {
  const auto dir = scratch("codes");
  RunOptions opts;
  opts.out_dir = dir;
  auto j = nlohmann::json::parse(R"({"experiment": "blowup", "k": 6, "J": 2})");
  auto res = run_scenario(parse_scenario(j), opts);
  CHECK(res.exit_code == 2);
  CHECK(res.error.find("ill-posed") != std::string::npos);
  j = nlohmann::json::parse(R"({"experiment": "blowup", "k": 6, "J": 1, "slack": -1})");
  res = run_scenario(parse_scenario(j), opts);
  CHECK(res.exit_code == 1);
}

TEST_CASE("suites are reproducible for a seed") {
  const auto j = nlohmann::json::parse(R"({"experiment": "comparison-suite", "p": [1.5, 3], "seed": 5, "cases": 4})");
  const auto a = scratch("suite_a"), b = scratch("suite_b");
  RunOptions opts;
  opts.out_dir = a;
  CHECK(run_scenario(parse_scenario(j), opts).exit_code == 0);
  opts.out_dir = b;
  run_scenario(parse_scenario(j), opts);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
}

TEST_CASE("solution export") {
  const auto m = generate_rectangle_mesh({0, 0}, {1, 1}, 2, 2);
  Solution s;
  s.u.assign(m.points.size(), 2.5);
  s.converged = true;
  std::ostringstream vtk, csv;
  export_solution(vtk, s, m, ExportFormat::Vtk);
  export_solution(csv, s, m, ExportFormat::Csv);
  CHECK(vtk.str().find("SCALARS u double 1") != std::string::npos);
  CHECK(vtk.str().find("SCALARS sheet int 1") != std::string::npos);
  std::istringstream rows(csv.str());
  std::string line;
  std::getline(rows, line);
  CHECK(line == "x,y,sheet,u");
  while (std::getline(rows, line)) CHECK(line.substr(line.rfind(',') + 1) == "2.5");
  CHECK_THROWS_AS(parse_export_format("png"), ConfigError);
  s.converged = false;
  std::ostringstream sink;
  CHECK_THROWS_AS(export_solution(sink, s, m, ExportFormat::Csv), SolverError);
  CHECK_NOTHROW(export_solution(sink, s, m, ExportFormat::Csv, true));
}

TEST_CASE("two-sided data survives export across a tooth") {
  MeshOptions o;
  o.h_target = 1.0 / 8;
  const auto m = generate_mesh(truncate(build_comb(2), 1), o);
  const auto tr = BoundaryTrace::from_function(m, [](const BoundaryNode& b) { return static_cast<double>(b.ext.sheet.sign()); });
  PSolverConfig cfg;
  const auto s = solve_dirichlet(m, tr, cfg);
  std::ostringstream os;
  export_solution(os, s, m, ExportFormat::Csv);
  const auto text = os.str();
  CHECK(text.find("0.5,1,upper(0),1\n") != std::string::npos);
  CHECK(text.find("0.5,1,lower(0),-1\n") != std::string::npos);
}
