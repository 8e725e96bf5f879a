#pragma once

// Batch scenarios: a JSON file names one experiment and its parameters; the
// runner writes results.csv, summary.json and optional solution exports.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "comblab/perron.hpp"

namespace comblab {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Bracket, Invariance, Regularity, Jump, Blowup, ComparisonSuite, ValidationSuite };

std::string to_string(ExperimentKind k);

struct RegularityTarget {
  ExtendedPoint at;
  Point direction;
};

struct ExportSpec {
  std::string format = "vtk";  // vtk | csv
};

struct ScenarioConfig {
  ExperimentKind experiment = ExperimentKind::Bracket;
  std::vector<double> ps{2.0};
  std::optional<BoundaryFunctionSpec> boundary;
  std::optional<DomainSpec> domain;  // export domain for suites; Psi_k otherwise
  std::vector<int> ks{2, 3, 4, 5, 6};
  MeshOptions mesh;
  PSolverConfig solver;
  std::vector<Point> probes = default_probes();
  std::vector<double> overrides;
  std::vector<RegularityTarget> points;
  double regularity_tol = 5e-2;
  std::vector<JumpSpec> jumps;
  std::pair<double, double> override_values{0.0, 1.0};
  int levels = 3;
  Approach approach;
  int J = 1;
  double slack = 0.1;
  std::uint64_t seed = 0;
  int cases = 0;  // suites: 0 means the suite default
  double check_tol = 1e-6;
  std::filesystem::path output_dir = "out";
  std::optional<ExportSpec> export_spec;
};

/// Validates everything before any solve; throws ConfigError naming the field.
ScenarioConfig parse_scenario(const nlohmann::json& j);
/// Reads and parses a file; JSON syntax errors carry line and column.
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  int threads = 1;
  bool allow_unconverged = false;
};

struct Property {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CsvRow {
  std::string experiment;
  double p = 0.0;
  int k = -1;
  double h = 0.0;
  double probe_x = 0.0, probe_y = 0.0;
  double upper = 0.0, lower = 0.0, width = 0.0;
  std::string extra;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 property failure, 2 solver failure, 3 config error
  std::vector<Property> properties;
  std::vector<CsvRow> rows;
  std::string error;
};

/// Runs the experiment and writes the artifacts into the output directory.
RunOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& opts);

enum class ExportFormat { Vtk, Csv };
ExportFormat parse_export_format(const std::string& name);

/// VTK with point scalars "u" and "sheet", or CSV with x,y,sheet,u.
/// Unconverged solutions are refused unless allow_unconverged is set.
void export_solution(std::ostream& os, const Solution& solution, const SlitMesh& mesh, ExportFormat format,
                     bool allow_unconverged = false);

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows);

}  // namespace comblab
