#pragma once

// Perron upper/lower solutions emulated by the exhaustion Psi_k: solve on the
// truncated comb with the boundary data on the comb part of the boundary and
// sup f (resp. inf f) on the cut. The experiments below check invariance under
// data on the inaccessible part, boundary regularity, jump perturbations and
// the blow-up construction for unbounded continuous data.

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "comblab/expression.hpp"
#include "comblab/solver.hpp"

namespace comblab {

class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Jumps

/// A jump at `at` between the boundary directions alpha1 < alpha2 (radians),
/// with one-sided limits a1 along alpha1 and a2 along alpha2.
struct JumpSpec {
  ExtendedPoint at;
  double a1 = 0.0;
  double a2 = 1.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;

  /// Jump on the right wall at height y: directions up (pi/2) and down (3pi/2).
  static JumpSpec outer_wall(double y, double a_up, double a_down);
  /// Jump at the tip of tooth j: upper sheet at angle 0, lower sheet at 2pi.
  static JumpSpec tooth_tip(int j, double a_upper, double a_lower);

  /// {"kind": "outer_wall", "y", "a_up", "a_down"} or
  /// {"kind": "tooth_tip", "j", "a_upper", "a_lower"}.
  static JumpSpec from_json(const nlohmann::json& j);
};

/// Angle of `q` seen from the jump point, on the branch (alpha1, alpha1 + 2pi]
/// with the sheet of q deciding the two faces of a slit through the jump.
double jump_angle(const JumpSpec& jump, const ExtendedPoint& q);

/// Linear-in-angle interpolant A1 + (A2 - A1)(theta - alpha1)/(alpha2 - alpha1).
/// Throws ExperimentError unless theta lies strictly between the directions.
double jump_reference_U(double a1, double a2, double alpha1, double alpha2, double theta);
double jump_reference_U(const JumpSpec& jump, const ExtendedPoint& point);
double jump_reference_U(Point x0, double a1, double a2, double alpha1, double alpha2, Point point);

// ---------------------------------------------------------------------------
// Boundary data

struct ExpressionTerm {
  Expression expr;
};

/// amplitude * (1 - |x - center| / radius)_+
struct BumpTerm {
  Point center;
  double radius = 1.0;
  double amplitude = 1.0;
};

/// The jump's reference function, with angles clamped to [alpha1, alpha2].
struct JumpTerm {
  JumpSpec jump;
};

using BoundaryTerm = std::variant<ExpressionTerm, BumpTerm, JumpTerm>;

struct PointOverride {
  Point at;
  double value = 0.0;
};

struct BoundaryFunctionSpec {
  std::vector<std::pair<double, BoundaryTerm>> terms;  // sum of coefficient * term
  std::optional<double> value_on_I;
  std::optional<double> value_at_origin;
  std::vector<PointOverride> overrides;  // every sheet at that position
  std::optional<std::pair<double, double>> bounds;  // explicit [inf, sup] on the prime-end boundary
  std::string description;

  static BoundaryFunctionSpec expression(const std::string& source);
  static BoundaryFunctionSpec constant(double c);
  static BoundaryFunctionSpec bump(Point center, double radius, double amplitude = 1.0);
  static BoundaryFunctionSpec jump(const JumpSpec& jump);

  /// Value at a boundary point of the given class. Cut points are rejected.
  double operator()(const ExtendedPoint& x, BoundaryClass cls) const;
  /// inf and sup over the prime-end boundary (explicit bounds or dense sampling).
  std::pair<double, double> range() const;

  static BoundaryFunctionSpec from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Experiments

struct LabConfig {
  PSolverConfig solver;
  MeshOptions mesh;
  /// Solver tolerance used by the sandwich / monotonicity checks.
  double check_tol = 1e-6;
  int threads = 1;
};

/// Mesh of Psi_k with h = min(h_target, 2^-k) and the lab's refinement points.
SlitMesh mesh_truncated(int k, const MeshOptions& base, std::vector<RefinePoint> extra = {});

/// Dirichlet trace of f on the truncated comb with `cut_value` on the cut.
BoundaryTrace truncated_trace(const SlitMesh& mesh, const BoundaryFunctionSpec& f, double cut_value);

struct BracketRow {
  int k = 0;
  double h = 0.0;
  std::size_t vertices = 0;
  Point probe;
  double upper = 0.0;
  double lower = 0.0;
  double width() const { return upper - lower; }
};

struct ExhaustionReport {
  double p = 2.0;
  double inf_f = 0.0;
  double sup_f = 0.0;
  std::vector<BracketRow> rows;  // ordered by (k, probe)
  bool ordered = true;           // upper >= lower - tol everywhere

  /// Rows for one probe, ordered by k.
  std::vector<BracketRow> for_probe(std::size_t probe_index, std::size_t num_probes) const;
};

std::vector<Point> default_probes();

ExhaustionReport perron_bracket(const BoundaryFunctionSpec& f, const std::vector<int>& ks,
                                const std::vector<Point>& probes, const LabConfig& cfg);

struct OverrideRow {
  int k = 0;
  double requested = 0.0;
  double used = 0.0;
  bool clipped = false;
  std::vector<double> probe_values;
};

struct InvarianceReport {
  ExhaustionReport bracket;
  std::vector<OverrideRow> overrides;
  /// Per k: max over probes of the largest pairwise override difference.
  std::vector<std::pair<int, double>> max_pairwise;
  bool inside_bracket = true;
  bool pairwise_within_width = true;
  bool widths_decreasing = true;
};

InvarianceReport invariance_experiment(const BoundaryFunctionSpec& f,
                                       const std::vector<double>& overrides,
                                       const std::vector<int>& ks, const std::vector<Point>& probes,
                                       const LabConfig& cfg);

struct Approach {
  Point direction{-1.0, 0.0};
  double r0 = 0.0625;
  double ratio = 0.5;
  int steps = 5;
};

struct ApproachRow {
  double r = 0.0;
  Point point;
  double dist_ext = 0.0;
  double u = 0.0;
  double target = 0.0;  // f(x0) or U(point)
  double discrepancy() const { return std::abs(u - target); }
};

struct RegularityReport {
  ExtendedPoint x0;
  BoundaryClass cls = BoundaryClass::OuterRegular;
  double f_x0 = 0.0;
  int k = 0;
  double h = 0.0;
  std::vector<ApproachRow> rows;
  bool decreasing = false;
};

RegularityReport regularity_probe(const BoundaryFunctionSpec& f, const ExtendedPoint& x0,
                                  const Approach& approach, int k, const LabConfig& cfg);

struct JumpLevel {
  double h = 0.0;
  std::size_t vertices = 0;
  std::vector<double> probe_difference;  // per probe, |u_a - u_b|
};

struct JumpReport {
  std::vector<JumpLevel> levels;
  std::vector<std::vector<ApproachRow>> approaches;  // per jump point
  bool difference_decreasing = true;
  bool approach_decreasing = true;
};

JumpReport jump_experiment(const BoundaryFunctionSpec& f, const std::vector<JumpSpec>& jumps,
                           std::pair<double, double> override_values, int k,
                           const std::vector<Point>& probes, const Approach& approach,
                           const LabConfig& cfg, int levels = 3);

struct BlowupReport {
  int k = 0;
  Point probe;
  std::vector<double> bump_values;  // c_j = u_{f_2j}(probe)
  std::vector<double> u_J;          // solution of sum_{j<=J} 2j f_2j / c_j at the probe
  double slack = 0.1;
  bool bounds_ok = false;
  bool increasing = false;
};

/// Centre y_j = (1, 3 * 2^-(j+1)) and radius 2^-(j+2) of the bump f_j.
BumpTerm blowup_bump(int j);

BlowupReport blowup_probe(int J, Point probe, int k, const LabConfig& cfg, double slack = 0.1,
                          bool refine_bumps = true);

}  // namespace comblab
