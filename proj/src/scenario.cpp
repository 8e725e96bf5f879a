#include "comblab/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "comblab/suites.hpp"

namespace comblab {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Bracket: return "bracket";
    case ExperimentKind::Invariance: return "invariance";
    case ExperimentKind::Regularity: return "regularity";
    case ExperimentKind::Jump: return "jump";
    case ExperimentKind::Blowup: return "blowup";
    case ExperimentKind::ComparisonSuite: return "comparison-suite";
    case ExperimentKind::ValidationSuite: return "validation-suite";
  }
  return "?";
}

namespace {

const std::map<std::string, ExperimentKind>& experiment_names() {
  static const std::map<std::string, ExperimentKind> names = {
      {"bracket", ExperimentKind::Bracket},
      {"invariance", ExperimentKind::Invariance},
      {"regularity", ExperimentKind::Regularity},
      {"jump", ExperimentKind::Jump},
      {"blowup", ExperimentKind::Blowup},
      {"comparison-suite", ExperimentKind::ComparisonSuite},
      {"validation-suite", ExperimentKind::ValidationSuite}};
  return names;
}

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

// Runs fn, rewrapping any exception with the field name.
template <class Fn>
auto in_field(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    field_error(field, e.what());
  }
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) field_error(where, "expected an object");
  for (const auto& [key, v] : j.items())
    if (!allowed.contains(key)) field_error(where.empty() ? key : where + "." + key, "unknown key");
}

Point to_point(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Sheet sheet_for(const std::string& name, const Point& at) {
  const int j = dyadic_level(at.y);
  if (name == "free") return Sheet::free();
  if (j < 0) throw ConfigError("point is not on a tooth");
  if (name == "upper") return Sheet::upper(j);
  if (name == "lower") return Sheet::lower(j);
  if (name == "tip") return Sheet::tip(j);
  throw ConfigError("sheet must be free, upper, lower or tip");
}

void check_p(double p) {
  PSolverConfig c;
  c.p = p;
  c.validate();
}

}  // namespace

ScenarioConfig parse_scenario(const json& j) {
  only_keys(j,
            {"experiment", "p", "boundary", "domain", "k_range", "k", "h_target", "mesh", "solver", "probes",
             "overrides", "points", "regularity_tol", "jumps", "override_values", "levels", "approach", "J", "slack",
             "seed", "cases", "check_tol", "output", "export"},
            "");
  ScenarioConfig c;
  if (!j.contains("experiment")) field_error("experiment", "required");
  in_field("experiment", [&] {
    const auto name = j.at("experiment").get<std::string>();
    const auto it = experiment_names().find(name);
    if (it == experiment_names().end()) throw ConfigError("unknown experiment '" + name + "'");
    c.experiment = it->second;
  });

  if (j.contains("p"))
    in_field("p", [&] {
      const auto& v = j["p"];
      c.ps = v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
      if (c.ps.empty()) throw ConfigError("empty list");
      for (const double p : c.ps) check_p(p);
    });

  if (j.contains("solver"))
    in_field("solver", [&] {
      const auto& s = j["solver"];
      only_keys(s, {"eps_schedule", "grad_tol", "max_newton_iters"}, "solver");
      if (s.contains("eps_schedule")) c.solver.eps_schedule = s["eps_schedule"].get<std::vector<double>>();
      if (s.contains("grad_tol")) c.solver.grad_tol = s["grad_tol"].get<double>();
      if (s.contains("max_newton_iters")) c.solver.max_newton_iters = s["max_newton_iters"].get<int>();
      c.solver.validate();
    });

  if (j.contains("mesh"))
    in_field("mesh", [&] {
      const auto& m = j["mesh"];
      only_keys(m, {"h_target", "grading", "tip_levels", "coarsening"}, "mesh");
      c.mesh.h_target = m.value("h_target", c.mesh.h_target);
      c.mesh.grading = m.value("grading", c.mesh.grading);
      c.mesh.tip_levels = m.value("tip_levels", c.mesh.tip_levels);
      c.mesh.coarsening = m.value("coarsening", c.mesh.coarsening);
    });
  if (j.contains("h_target")) c.mesh.h_target = in_field("h_target", [&] { return j["h_target"].get<double>(); });
  if (!(c.mesh.h_target > 0.0)) field_error("h_target", "must be positive");
  if (!(c.mesh.grading > 0.0 && c.mesh.grading <= 1.0)) field_error("mesh.grading", "must lie in (0, 1]");

  if (j.contains("k_range") && j.contains("k")) field_error("k", "give either k or k_range");
  if (j.contains("k_range"))
    in_field("k_range", [&] {
      const auto r = j["k_range"].get<std::vector<int>>();
      if (r.size() != 2 || r[0] < 0 || r[1] < r[0]) throw ConfigError("expected [k_min, k_max] with 0 <= k_min <= k_max");
      c.ks.clear();
      for (int k = r[0]; k <= r[1]; ++k) c.ks.push_back(k);
    });
  if (j.contains("k"))
    in_field("k", [&] {
      const int k = j["k"].get<int>();
      if (k < 0) throw ConfigError("must be >= 0");
      c.ks = {k};
    });

  if (j.contains("boundary")) c.boundary = in_field("boundary", [&] { return BoundaryFunctionSpec::from_json(j["boundary"]); });
  if (j.contains("domain")) c.domain = in_field("domain", [&] { return domain_from_json(j["domain"]); });

  if (j.contains("probes"))
    in_field("probes", [&] {
      c.probes.clear();
      for (const auto& p : j["probes"]) c.probes.push_back(to_point(p));
      if (c.probes.empty()) throw ConfigError("empty list");
      for (const int k : c.ks) {
        const DomainSpec d = truncate(build_comb(k + 1), k);
        for (const auto& z : c.probes)
          if (!contains(d, z)) throw ConfigError("probe outside Psi_" + std::to_string(k));
      }
    });
  if (j.contains("overrides")) c.overrides = in_field("overrides", [&] { return j["overrides"].get<std::vector<double>>(); });

  if (j.contains("points"))
    in_field("points", [&] {
      for (const auto& p : j["points"]) {
        only_keys(p, {"at", "sheet", "direction"}, "points[]");
        const Point at = to_point(p.at("at"));
        const Sheet sh = sheet_for(p.value("sheet", "free"), at);
        const Point dir = p.contains("direction") ? to_point(p["direction"]) : Point{-1.0, 0.0};
        if (sh.kind == SheetKind::ToothUpper && !(dir.y > 0.0)) throw ConfigError("upper-sheet point needs an upward approach");
        if (sh.kind == SheetKind::ToothLower && !(dir.y < 0.0)) throw ConfigError("lower-sheet point needs a downward approach");
        c.points.push_back({ExtendedPoint::make(at, sh), dir});
      }
    });
  if (j.contains("regularity_tol")) c.regularity_tol = in_field("regularity_tol", [&] { return j["regularity_tol"].get<double>(); });

  if (j.contains("jumps"))
    in_field("jumps", [&] {
      for (const auto& e : j["jumps"]) c.jumps.push_back(JumpSpec::from_json(e));
      for (const auto& e : c.jumps)
        if (e.at.xy == Point{0.0, 0.0}) throw ConfigError("the origin cannot carry a jump");
    });
  if (j.contains("override_values"))
    in_field("override_values", [&] {
      const auto v = j["override_values"].get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("expected [a, b]");
      c.override_values = {v[0], v[1]};
    });
  if (j.contains("levels"))
    in_field("levels", [&] {
      c.levels = j["levels"].get<int>();
      if (c.levels < 1) throw ConfigError("must be >= 1");
    });
  if (j.contains("approach"))
    in_field("approach", [&] {
      const auto& a = j["approach"];
      only_keys(a, {"r0", "ratio", "steps"}, "approach");
      c.approach.r0 = a.value("r0", c.approach.r0);
      c.approach.ratio = a.value("ratio", c.approach.ratio);
      c.approach.steps = a.value("steps", c.approach.steps);
      if (!(c.approach.r0 > 0.0) || !(c.approach.ratio > 0.0 && c.approach.ratio < 1.0) || c.approach.steps < 1)
        throw ConfigError("need r0 > 0, ratio in (0, 1), steps >= 1");
    });
  if (j.contains("J"))
    in_field("J", [&] {
      c.J = j["J"].get<int>();
      if (c.J < 1) throw ConfigError("must be >= 1");
    });
  if (j.contains("slack")) c.slack = in_field("slack", [&] { return j["slack"].get<double>(); });
  if (j.contains("seed")) c.seed = in_field("seed", [&] { return j["seed"].get<std::uint64_t>(); });
  if (j.contains("cases"))
    in_field("cases", [&] {
      c.cases = j["cases"].get<int>();
      if (c.cases < 1) throw ConfigError("must be >= 1");
    });
  if (j.contains("check_tol")) c.check_tol = in_field("check_tol", [&] { return j["check_tol"].get<double>(); });
  if (j.contains("output")) c.output_dir = in_field("output", [&] { return j["output"].get<std::string>(); });
  if (j.contains("export"))
    in_field("export", [&] {
      const auto& e = j["export"];
      only_keys(e, {"format"}, "export");
      ExportSpec s;
      s.format = e.value("format", s.format);
      parse_export_format(s.format);
      c.export_spec = s;
    });

  // Cross-field requirements.
  using K = ExperimentKind;
  const K x = c.experiment;
  if ((x == K::Bracket || x == K::Invariance || x == K::Regularity || x == K::Jump) && !c.boundary)
    field_error("boundary", "required for " + to_string(x));
  if (x == K::Invariance && c.overrides.empty()) field_error("overrides", "required for invariance");
  if (x == K::Regularity && c.points.empty()) field_error("points", "required for regularity");
  if (x == K::Jump && c.jumps.empty()) field_error("jumps", "required for jump");
  if ((x == K::Regularity || x == K::Jump || x == K::Blowup) && c.ks.size() != 1)
    field_error("k", "this experiment takes a single k");
  if (c.export_spec && x != K::Bracket && x != K::Invariance)
    field_error("export", "only bracket and invariance runs export solutions");
  for (const auto& z : c.probes)
    for (const int k : c.ks)
      if (!contains(truncate(build_comb(k + 1), k), z)) field_error("probes", "probe outside Psi_" + std::to_string(k));
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Output

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string kv(const std::string& key, double v) { return key + "=" + num(v); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
  os << "experiment,p,k,h,probe_x,probe_y,upper,lower,width,extra\n";
  for (const auto& r : rows)
    os << csv_field(r.experiment) << ',' << num(r.p) << ',' << r.k << ',' << num(r.h) << ',' << num(r.probe_x) << ','
       << num(r.probe_y) << ',' << num(r.upper) << ',' << num(r.lower) << ',' << num(r.width) << ','
       << csv_field(r.extra) << '\n';
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "vtk") return ExportFormat::Vtk;
  if (name == "csv") return ExportFormat::Csv;
  throw ConfigError("unknown export format '" + name + "' (vtk or csv)");
}

void export_solution(std::ostream& os, const Solution& solution, const SlitMesh& mesh, ExportFormat format,
                     bool allow_unconverged) {
  if (!solution.converged && !allow_unconverged)
    throw SolverError("refusing to export an unconverged solution (use --allow-unconverged)");
  if (solution.u.size() != mesh.points.size()) throw SolverError("solution does not match the mesh");
  if (format == ExportFormat::Vtk) {
    write_vtk(os, mesh, {{"u", solution.u}}, "comblab solution");
    return;
  }
  os << "x,y,sheet,u\n";
  for (std::size_t v = 0; v < mesh.points.size(); ++v)
    os << num(mesh.points[v].x) << ',' << num(mesh.points[v].y) << ',' << to_string(mesh.sheets[v]) << ','
       << num(solution.u[v]) << '\n';
}

// ---------------------------------------------------------------------------
// Runner

namespace {

struct Runner {
  const ScenarioConfig& cfg;
  const RunOptions& opts;
  std::filesystem::path out;
  RunOutcome res;

  void prop(std::string name, bool pass, std::string detail = {}) {
    res.properties.push_back({std::move(name), pass, std::move(detail)});
  }

  LabConfig lab(double p) const {
    LabConfig l;
    l.solver = cfg.solver;
    l.solver.p = p;
    l.mesh = cfg.mesh;
    l.check_tol = cfg.check_tol;
    l.threads = opts.threads;
    return l;
  }

  std::string pname(const char* what, double p) const {
    std::ostringstream os;
    os << what << " p=" << p;
    return os.str();
  }

  void bracket_rows(const std::string& name, const ExhaustionReport& rep) {
    for (const auto& r : rep.rows)
      res.rows.push_back({name, rep.p, r.k, r.h, r.probe.x, r.probe.y, r.upper, r.lower, r.width(),
                          "vertices=" + std::to_string(r.vertices)});
  }

  void bracket_props(const ExhaustionReport& rep, double p) {
    prop(pname("ordered", p), rep.ordered);
    const std::size_t np = cfg.probes.size();
    bool dec = true, halved = true;
    std::string detail;
    for (std::size_t q = 0; q < np; ++q) {
      const auto rows = rep.for_probe(q, np);
      for (std::size_t i = 1; i < rows.size(); ++i)
        if (!(rows[i].width() < rows[i - 1].width())) dec = false;
      if (rows.size() >= 2 && !(rows.back().width() <= rows.front().width() / 2.0)) halved = false;
      if (!rows.empty()) detail += kv("width_last", rows.back().width()) + " ";
    }
    prop(pname("widths_decreasing", p), dec, detail);
    if (cfg.ks.size() >= 2) prop(pname("width_halved", p), halved);
  }

  void export_upper(double p) {
    const auto fmt = parse_export_format(cfg.export_spec->format);
    for (const int k : cfg.ks) {
      const SlitMesh mesh = mesh_truncated(k, cfg.mesh);
      auto sc = cfg.solver;
      sc.p = p;
      const auto sol = solve_dirichlet(mesh, truncated_trace(mesh, *cfg.boundary, cfg.boundary->range().second), sc);
      const auto path = out / ("solution_p" + num(p) + "_k" + std::to_string(k) + "." + cfg.export_spec->format);
      std::ofstream os(path);
      export_solution(os, sol, mesh, fmt, opts.allow_unconverged);
    }
  }

  void bracket() {
    for (const double p : cfg.ps) {
      const auto rep = perron_bracket(*cfg.boundary, cfg.ks, cfg.probes, lab(p));
      bracket_rows("bracket", rep);
      bracket_props(rep, p);
      if (cfg.export_spec) export_upper(p);
    }
  }

  void invariance() {
    for (const double p : cfg.ps) {
      const auto rep = invariance_experiment(*cfg.boundary, cfg.overrides, cfg.ks, cfg.probes, lab(p));
      bracket_rows("invariance", rep.bracket);
      for (const auto& o : rep.overrides)
        for (std::size_t q = 0; q < cfg.probes.size(); ++q)
          res.rows.push_back({"invariance-override", p, o.k, std::min(cfg.mesh.h_target, tooth_height(o.k)),
                              cfg.probes[q].x, cfg.probes[q].y, o.probe_values[q], o.probe_values[q], 0.0,
                              kv("requested", o.requested) + ";" + kv("used", o.used) +
                                  (o.clipped ? ";clipped" : "")});
      bracket_props(rep.bracket, p);
      prop(pname("inside_bracket", p), rep.inside_bracket);
      prop(pname("pairwise_within_width", p), rep.pairwise_within_width);
      if (cfg.export_spec) export_upper(p);
    }
  }

  void regularity() {
    const int k = cfg.ks.front();
    for (const double p : cfg.ps)
      for (const auto& t : cfg.points) {
        Approach a = cfg.approach;
        a.direction = t.direction;
        const auto rep = regularity_probe(*cfg.boundary, t.at, a, k, lab(p));
        const std::string where = "(" + num(t.at.xy.x) + " " + num(t.at.xy.y) + " " + to_string(t.at.sheet) + ")";
        for (const auto& r : rep.rows)
          res.rows.push_back({"regularity", p, k, rep.h, r.point.x, r.point.y, r.u, r.target, r.discrepancy(),
                              "x0=" + where + ";" + kv("r", r.r) + ";" + kv("dist_ext", r.dist_ext)});
        const double last = rep.rows.back().discrepancy();
        prop(pname("decreasing", p) + " x0=" + where, rep.decreasing);
        prop(pname("final_discrepancy", p) + " x0=" + where, last <= cfg.regularity_tol, kv("value", last));
      }
  }

  void jump() {
    const int k = cfg.ks.front();
    for (const double p : cfg.ps) {
      const auto rep = jump_experiment(*cfg.boundary, cfg.jumps, cfg.override_values, k, cfg.probes, cfg.approach,
                                       lab(p), cfg.levels);
      for (const auto& l : rep.levels)
        for (std::size_t q = 0; q < cfg.probes.size(); ++q)
          res.rows.push_back({"jump-refinement", p, k, l.h, cfg.probes[q].x, cfg.probes[q].y, 0.0, 0.0,
                              l.probe_difference[q], "vertices=" + std::to_string(l.vertices)});
      for (std::size_t i = 0; i < rep.approaches.size(); ++i)
        for (const auto& r : rep.approaches[i])
          res.rows.push_back({"jump-approach", p, k, 0.0, r.point.x, r.point.y, r.u, r.target, r.discrepancy(),
                              "jump=" + std::to_string(i) + ";" + kv("r", r.r) + ";" + kv("dist_ext", r.dist_ext)});
      prop(pname("difference_decreasing", p), rep.difference_decreasing);
      prop(pname("approach_decreasing", p), rep.approach_decreasing);
    }
  }

  void blowup() {
    const int k = cfg.ks.front();
    for (const double p : cfg.ps) {
      const auto rep = blowup_probe(cfg.J, cfg.probes.front(), k, lab(p), cfg.slack);
      for (std::size_t n = 0; n < rep.u_J.size(); ++n)
        res.rows.push_back({"blowup", p, k, std::min(cfg.mesh.h_target, tooth_height(k)), rep.probe.x, rep.probe.y,
                            rep.u_J[n], 2.0 * static_cast<double>(n + 1) * (1.0 - rep.slack), 0.0,
                            "J=" + std::to_string(n + 1) + ";" + kv("c", rep.bump_values[n])});
      prop(pname("lower_bound", p), rep.bounds_ok);
      prop(pname("increasing", p), rep.increasing);
    }
  }

  void suite_rows(const SuiteResult& s) {
    for (const auto& c : s.cases) res.rows.push_back({s.name, c.p, -1, 0.0, 0.0, 0.0, 0.0, 0.0, c.value, c.label});
    prop(s.name, s.pass, kv("worst", s.worst));
  }

  void comparison() {
    suite_rows(comparison_suite(cfg.cases > 0 ? cfg.cases : 20, cfg.ps, cfg.seed, cfg.check_tol));
  }

  void validation() {
    suite_rows(linear_exactness_suite(cfg.ps));
    std::vector<double> radial_ps;
    for (const double p : cfg.ps)
      if (p != 2.0) radial_ps.push_back(p);
    if (radial_ps.empty()) radial_ps = {1.5, 3.0};
    const auto rad = radial_suite(radial_ps, {1.0 / 16, 1.0 / 32});
    for (const auto& r : rad.rows)
      res.rows.push_back({"radial", r.p, -1, r.h, 0.0, 0.0, 0.0, 0.0, r.error,
                          "vertices=" + std::to_string(r.vertices)});
    std::string detail;
    for (const auto& [p, o] : rad.orders) detail += kv("order_p" + num(p), o) + " ";
    prop("radial", rad.pass, detail);
    suite_rows(gradient_check_suite(cfg.cases > 0 ? cfg.cases : 10, cfg.seed));
    comparison();
  }

  void run() {
    switch (cfg.experiment) {
      case ExperimentKind::Bracket: bracket(); break;
      case ExperimentKind::Invariance: invariance(); break;
      case ExperimentKind::Regularity: regularity(); break;
      case ExperimentKind::Jump: jump(); break;
      case ExperimentKind::Blowup: blowup(); break;
      case ExperimentKind::ComparisonSuite: comparison(); break;
      case ExperimentKind::ValidationSuite: validation(); break;
    }
  }
};

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  Runner r{cfg, opts, opts.out_dir.value_or(cfg.output_dir), {}};
  try {
    std::filesystem::create_directories(r.out);
  } catch (const std::exception& e) {
    r.res.exit_code = 3;
    r.res.error = std::string("cannot create output directory: ") + e.what();
    return r.res;
  }
  try {
    r.run();
    bool all = true;
    for (const auto& p : r.res.properties) all = all && p.pass;
    r.res.exit_code = all ? 0 : 1;
  } catch (const ConfigError& e) {
    r.res.exit_code = 3;
    r.res.error = e.what();
  } catch (const std::exception& e) {
    r.res.exit_code = 2;
    r.res.error = e.what();
  }

  {
    std::ofstream os(r.out / "results.csv");
    write_csv(os, r.res.rows);
  }
  json summary;
  summary["experiment"] = to_string(cfg.experiment);
  summary["p"] = cfg.ps;
  summary["k"] = cfg.ks;
  summary["h_target"] = cfg.mesh.h_target;
  summary["seed"] = cfg.seed;
  summary["properties"] = json::array();
  for (const auto& p : r.res.properties)
    summary["properties"].push_back({{"name", p.name}, {"pass", p.pass}, {"detail", p.detail}});
  summary["exit_code"] = r.res.exit_code;
  summary["pass"] = r.res.exit_code == 0;
  if (!r.res.error.empty()) summary["error"] = r.res.error;
  std::ofstream(r.out / "summary.json") << summary.dump(2) << '\n';
  return r.res;
}

}  // namespace comblab
