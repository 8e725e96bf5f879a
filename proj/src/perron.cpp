#include "comblab/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "comblab/parallel.hpp"

namespace comblab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string fmt_point(const Point& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}
}  // namespace

// ---------------------------------------------------------------------------
// Jumps

JumpSpec JumpSpec::outer_wall(double y, double a_up, double a_down) {
  const auto at = ExtendedPoint::make({1.0, y});
  return JumpSpec{at, a_up, a_down, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi};
}

JumpSpec JumpSpec::tooth_tip(int j, double a_upper, double a_lower) {
  const auto at = ExtendedPoint::make({0.0, tooth_height(j)}, Sheet::tip(j));
  return JumpSpec{at, a_upper, a_lower, 0.0, kTwoPi};
}

double jump_angle(const JumpSpec& jump, const ExtendedPoint& q) {
  const double dx = q.xy.x - jump.at.xy.x;
  const double dy = q.xy.y - jump.at.xy.y;
  if (dx == 0.0 && dy == 0.0) throw ExperimentError("angle at the jump point itself is undefined");
  const double lo = std::min(jump.alpha1, jump.alpha2);
  const double hi = std::max(jump.alpha1, jump.alpha2);
  double rel = std::fmod(std::atan2(dy, dx) - lo, kTwoPi);
  if (rel < 0.0) rel += kTwoPi;
  // On the lower face of a slit through the jump point the angle wraps to the
  // far end of a full-turn sector.
  if (rel == 0.0 && hi - lo >= kTwoPi && q.sheet.kind == SheetKind::ToothLower) rel = kTwoPi;
  return lo + rel;
}

double jump_reference_U(double a1, double a2, double alpha1, double alpha2, double theta) {
  if (alpha1 > alpha2) {
    std::swap(a1, a2);
    std::swap(alpha1, alpha2);
  }
  if (!(alpha2 > alpha1) || alpha2 - alpha1 > kTwoPi * (1.0 + 1e-15))
    throw ExperimentError("jump directions need alpha1 < alpha2 <= alpha1 + 2pi");
  if (!(theta > alpha1 && theta < alpha2)) {
    std::ostringstream os;
    os << "angle " << theta << " outside the sector (" << alpha1 << ", " << alpha2 << ")";
    throw ExperimentError(os.str());
  }
  return a1 + (a2 - a1) * (theta - alpha1) / (alpha2 - alpha1);
}

double jump_reference_U(const JumpSpec& jump, const ExtendedPoint& point) {
  return jump_reference_U(jump.a1, jump.a2, jump.alpha1, jump.alpha2, jump_angle(jump, point));
}

double jump_reference_U(Point x0, double a1, double a2, double alpha1, double alpha2, Point point) {
  const JumpSpec jump{ExtendedPoint{x0, {}}, a1, a2, alpha1, alpha2};
  return jump_reference_U(jump, ExtendedPoint{point, {}});
}

// ---------------------------------------------------------------------------
// Boundary data

BoundaryFunctionSpec BoundaryFunctionSpec::expression(const std::string& source) {
  BoundaryFunctionSpec f;
  f.terms.emplace_back(1.0, ExpressionTerm{Expression(source)});
  f.description = source;
  return f;
}

BoundaryFunctionSpec BoundaryFunctionSpec::constant(double c) {
  std::ostringstream os;
  os.precision(17);
  os << c;
  auto f = expression(os.str());
  f.bounds = {c, c};
  return f;
}

BoundaryFunctionSpec BoundaryFunctionSpec::bump(Point center, double radius, double amplitude) {
  BoundaryFunctionSpec f;
  f.terms.emplace_back(1.0, BumpTerm{center, radius, amplitude});
  f.description = "bump at " + fmt_point(center);
  return f;
}

BoundaryFunctionSpec BoundaryFunctionSpec::jump(const JumpSpec& jump) {
  BoundaryFunctionSpec f;
  f.terms.emplace_back(1.0, JumpTerm{jump});
  f.description = "jump at " + fmt_point(jump.at.xy);
  return f;
}

namespace {

double eval_term(const BoundaryTerm& term, const ExtendedPoint& x) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ExpressionTerm>) {
          return t.expr(ExpressionVars{x.xy.x, x.xy.y, static_cast<double>(x.sheet.sign())});
        } else if constexpr (std::is_same_v<T, BumpTerm>) {
          return t.amplitude * std::max(0.0, 1.0 - distance(x.xy, t.center) / t.radius);
        } else {
          const JumpSpec& j = t.jump;
          if (x.xy == j.at.xy) return 0.5 * (j.a1 + j.a2);
          const double lo = std::min(j.alpha1, j.alpha2), hi = std::max(j.alpha1, j.alpha2);
          const double a_lo = j.alpha1 <= j.alpha2 ? j.a1 : j.a2;
          const double a_hi = j.alpha1 <= j.alpha2 ? j.a2 : j.a1;
          const double theta = std::clamp(jump_angle(j, x), lo, hi);
          return a_lo + (a_hi - a_lo) * (theta - lo) / (hi - lo);
        }
      },
      term);
}

std::vector<ExtendedPoint> prime_end_samples() {
  std::vector<ExtendedPoint> out;
  constexpr int n = 2000;
  const auto add = [&](Point p) {
    if (p.y > 0.0 && p.x > 0.0 && dyadic_level(p.y) >= 0) {
      const int j = dyadic_level(p.y);
      out.push_back({p, Sheet::upper(j)});
      out.push_back({p, Sheet::lower(j)});
    } else if (p.x == 0.0 && dyadic_level(p.y) >= 0) {
      out.push_back({p, Sheet::tip(dyadic_level(p.y))});
    } else {
      out.push_back({p, {}});
    }
  };
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    add({-1.0, 2.0 * t});        // left wall
    add({-1.0 + 2.0 * t, 2.0});  // top
    if (i > 0) add({1.0, 2.0 * t});  // right wall
    add({-t, 0.0});              // bottom left of the origin
  }
  for (int j = 0; j <= 40; ++j) {
    add({0.0, tooth_height(j)});
    for (int i = 1; i <= 200; ++i) add({i / 200.0, tooth_height(j)});
  }
  return out;
}

}  // namespace

double BoundaryFunctionSpec::operator()(const ExtendedPoint& x, BoundaryClass cls) const {
  if (cls == BoundaryClass::Cut) throw ExperimentError("boundary data is not defined on the cut");
  if (cls == BoundaryClass::InaccessibleI && value_on_I) return *value_on_I;
  if (cls == BoundaryClass::OriginAccessible && value_at_origin) return *value_at_origin;
  for (const auto& o : overrides)
    if (o.at == x.xy) return o.value;
  double v = 0.0;
  for (const auto& [c, term] : terms) v += c * eval_term(term, x);
  return v;
}

std::pair<double, double> BoundaryFunctionSpec::range() const {
  if (bounds) return *bounds;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const auto take = [&](const ExtendedPoint& x) {
    const auto cls = classify_boundary(CombSpec{1}, x);
    if (!on_prime_end_boundary(cls)) return;
    const double v = (*this)(x, cls);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& x : prime_end_samples()) take(x);
  for (const auto& [c, term] : terms) {
    if (const auto* b = std::get_if<BumpTerm>(&term)) {
      try {
        take(ExtendedPoint{b->center, {}});
      } catch (const GeometryError&) {
        // centre in the interior: not a boundary value
      }
    }
    if (const auto* j = std::get_if<JumpTerm>(&term)) {
      lo = std::min({lo, c * j->jump.a1, c * j->jump.a2});
      hi = std::max({hi, c * j->jump.a1, c * j->jump.a2});
    }
  }
  for (const auto& o : overrides) {
    lo = std::min(lo, o.value);
    hi = std::max(hi, o.value);
  }
  if (value_at_origin) {
    lo = std::min(lo, *value_at_origin);
    hi = std::max(hi, *value_at_origin);
  }
  return {lo, hi};
}

// ---------------------------------------------------------------------------

SlitMesh mesh_truncated(int k, const MeshOptions& base, std::vector<RefinePoint> extra) {
  MeshOptions o = base;
  o.h_target = std::min(base.h_target, tooth_height(k));
  o.refine.insert(o.refine.end(), extra.begin(), extra.end());
  return generate_mesh(truncate(build_comb(k + 1), k), o);
}

BoundaryTrace truncated_trace(const SlitMesh& mesh, const BoundaryFunctionSpec& f, double cut_value) {
  return BoundaryTrace::from_function(
      mesh,
      [&](const BoundaryNode& b) { return b.cls == BoundaryClass::Cut ? cut_value : f(b.ext, b.cls); },
      f.description);
}

namespace {

Solution solve_or_throw(const SlitMesh& mesh, const BoundaryTrace& trace, const PSolverConfig& cfg,
                        const std::string& context) {
  Solution s;
  try {
    s = solve_dirichlet(mesh, trace, cfg);
  } catch (const std::exception& e) {
    throw SolverError(context + ": " + e.what());
  }
  if (!s.converged) throw SolverError(context + ": solver did not converge (" + s.message + ")");
  return s;
}

std::string ctx(const char* what, int k, double p) {
  std::ostringstream os;
  os << what << " k=" << k << " p=" << p;
  return os.str();
}

void check_probes(const std::vector<Point>& probes, int k) {
  const DomainSpec d = truncate(build_comb(k + 1), k);
  for (const auto& z : probes)
    if (!contains(d, z)) throw ExperimentError("probe " + fmt_point(z) + " is not interior to Psi_" + std::to_string(k));
}

}  // namespace

std::vector<Point> default_probes() { return {{-0.5, 1.0}}; }

std::vector<BracketRow> ExhaustionReport::for_probe(std::size_t probe_index, std::size_t num_probes) const {
  std::vector<BracketRow> out;
  for (std::size_t i = probe_index; i < rows.size(); i += num_probes) out.push_back(rows[i]);
  return out;
}

ExhaustionReport perron_bracket(const BoundaryFunctionSpec& f, const std::vector<int>& ks,
                                const std::vector<Point>& probes, const LabConfig& cfg) {
  ExhaustionReport rep;
  rep.p = cfg.solver.p;
  std::tie(rep.inf_f, rep.sup_f) = f.range();
  if (!std::isfinite(rep.inf_f) || !std::isfinite(rep.sup_f))
    throw ExperimentError("boundary data must be bounded on the prime-end boundary");
  for (const int k : ks) check_probes(probes, k);

  std::vector<std::vector<BracketRow>> per_k(ks.size());
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    const int k = ks[i];
    const SlitMesh mesh = mesh_truncated(k, cfg.mesh);
    const auto up = solve_or_throw(mesh, truncated_trace(mesh, f, rep.sup_f), cfg.solver, ctx("upper", k, rep.p));
    const auto lo = solve_or_throw(mesh, truncated_trace(mesh, f, rep.inf_f), cfg.solver, ctx("lower", k, rep.p));
    const PointLocator loc(mesh);
    for (const auto& z : probes)
      per_k[i].push_back({k, mesh.h_target, mesh.points.size(), z, loc.interpolate(up.u, z), loc.interpolate(lo.u, z)});
  });
  for (auto& rows : per_k)
    for (auto& r : rows) {
      if (r.upper < r.lower - cfg.check_tol) rep.ordered = false;
      rep.rows.push_back(r);
    }
  return rep;
}

InvarianceReport invariance_experiment(const BoundaryFunctionSpec& f,
                                       const std::vector<double>& overrides,
                                       const std::vector<int>& ks, const std::vector<Point>& probes,
                                       const LabConfig& cfg) {
  InvarianceReport rep;
  rep.bracket = perron_bracket(f, ks, probes, cfg);
  const double m = rep.bracket.inf_f, M = rep.bracket.sup_f;

  std::vector<std::vector<OverrideRow>> per_k(ks.size());
  parallel_for(ks.size(), cfg.threads, [&](std::size_t i) {
    const int k = ks[i];
    const SlitMesh mesh = mesh_truncated(k, cfg.mesh);
    const PointLocator loc(mesh);
    for (const double o : overrides) {
      OverrideRow row;
      row.k = k;
      row.requested = o;
      row.used = std::clamp(o, m, M);
      row.clipped = row.used != o;
      const auto s = solve_or_throw(mesh, truncated_trace(mesh, f, row.used), cfg.solver, ctx("override", k, cfg.solver.p));
      for (const auto& z : probes) row.probe_values.push_back(loc.interpolate(s.u, z));
      per_k[i].push_back(std::move(row));
    }
  });

  const std::size_t np = probes.size();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double worst = 0.0;
    for (std::size_t q = 0; q < np; ++q) {
      const auto& b = rep.bracket.rows[i * np + q];
      double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
      for (const auto& row : per_k[i]) {
        const double v = row.probe_values[q];
        if (v < b.lower - cfg.check_tol || v > b.upper + cfg.check_tol) rep.inside_bracket = false;
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
      }
      if (!per_k[i].empty()) {
        worst = std::max(worst, vmax - vmin);
        if (vmax - vmin > b.width() + cfg.check_tol) rep.pairwise_within_width = false;
      }
    }
    rep.max_pairwise.emplace_back(ks[i], worst);
    for (auto& row : per_k[i]) rep.overrides.push_back(std::move(row));
  }
  for (std::size_t q = 0; q < np; ++q) {
    const auto rows = rep.bracket.for_probe(q, np);
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (!(rows[i].width() < rows[i - 1].width())) rep.widths_decreasing = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> approach_radii(const Approach& a) {
  if (a.steps < 1 || !(a.r0 > 0.0) || !(a.ratio > 0.0 && a.ratio < 1.0))
    throw ExperimentError("approach needs steps >= 1, r0 > 0 and ratio in (0, 1)");
  std::vector<double> r;
  for (int i = 0; i < a.steps; ++i) r.push_back(a.r0 * std::pow(a.ratio, i));
  return r;
}

bool strictly_decreasing(const std::vector<ApproachRow>& rows, double floor_tol) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double d = rows[i].discrepancy();
    if (!(d < rows[i - 1].discrepancy()) && d > floor_tol) return false;
  }
  return true;
}

}  // namespace

RegularityReport regularity_probe(const BoundaryFunctionSpec& f, const ExtendedPoint& x0,
                                  const Approach& approach, int k, const LabConfig& cfg) {
  RegularityReport rep;
  rep.x0 = x0;
  rep.k = k;
  rep.cls = classify_boundary(CombSpec{k + 1}, x0);
  if (!on_prime_end_boundary(rep.cls)) throw ExperimentError("regularity probes need a prime-end boundary point");
  const DomainSpec domain = truncate(build_comb(k + 1), k);
  const auto radii = approach_radii(approach);
  const double norm = std::hypot(approach.direction.x, approach.direction.y);
  if (!(norm > 0.0)) throw ExperimentError("approach direction is zero");
  const Point dir{approach.direction.x / norm, approach.direction.y / norm};
  if (x0.sheet.kind == SheetKind::ToothUpper && !(dir.y > 0.0))
    throw ExperimentError("upper-sheet point must be approached from above");
  if (x0.sheet.kind == SheetKind::ToothLower && !(dir.y < 0.0))
    throw ExperimentError("lower-sheet point must be approached from below");
  std::vector<Point> pts;
  for (const double r : radii) {
    const Point y{x0.xy.x + r * dir.x, x0.xy.y + r * dir.y};
    if (!contains(domain, y)) throw ExperimentError("approach point " + fmt_point(y) + " leaves Psi_" + std::to_string(k));
    pts.push_back(y);
  }

  const auto [m, M] = f.range();
  const SlitMesh mesh = mesh_truncated(k, cfg.mesh, {{x0.xy, 0.5 * radii.back()}});
  rep.h = mesh.h_target;
  const auto sol = solve_or_throw(mesh, truncated_trace(mesh, f, M), cfg.solver, ctx("regularity", k, cfg.solver.p));
  (void)m;
  rep.f_x0 = f(x0, rep.cls);
  const PointLocator loc(mesh);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ApproachRow row;
    row.r = radii[i];
    row.point = pts[i];
    row.dist_ext = dist_ext(ExtendedPoint{pts[i], {}}, x0);
    row.u = loc.interpolate(sol.u, pts[i]);
    row.target = rep.f_x0;
    rep.rows.push_back(row);
  }
  rep.decreasing = strictly_decreasing(rep.rows, cfg.check_tol);
  return rep;
}

JumpReport jump_experiment(const BoundaryFunctionSpec& f, const std::vector<JumpSpec>& jumps,
                           std::pair<double, double> override_values, int k,
                           const std::vector<Point>& probes, const Approach& approach,
                           const LabConfig& cfg, int levels) {
  if (levels < 1) throw ExperimentError("need at least one refinement level");
  for (const auto& e : jumps) {
    if (e.at.xy == Point{0.0, 0.0}) throw ExperimentError("the origin cannot carry a jump");
    if (!on_prime_end_boundary(classify_boundary(CombSpec{k + 1}, e.at)))
      throw ExperimentError("jump points must lie on the prime-end boundary");
  }
  check_probes(probes, k);
  JumpReport rep;
  const double h0 = std::min(cfg.mesh.h_target, tooth_height(k));

  const auto with_overrides = [&](double value) {
    BoundaryFunctionSpec g = f;
    for (const auto& e : jumps) g.overrides.push_back({e.at.xy, value});
    return g;
  };
  const auto fa = with_overrides(override_values.first);
  const auto fb = with_overrides(override_values.second);
  const double cut = std::max(fa.range().second, fb.range().second);

  rep.levels.resize(static_cast<std::size_t>(levels));
  parallel_for(static_cast<std::size_t>(levels), cfg.threads, [&](std::size_t l) {
    MeshOptions o = cfg.mesh;
    o.h_target = std::ldexp(h0, -static_cast<int>(l));
    const SlitMesh mesh = generate_mesh(truncate(build_comb(k + 1), k), o);
    for (const auto& e : jumps)
      if (mesh.vertices_at(e.at.xy).empty())
        throw MeshError("no mesh node at jump point " + fmt_point(e.at.xy));
    const auto ua = solve_or_throw(mesh, truncated_trace(mesh, fa, cut), cfg.solver, ctx("jump a", k, cfg.solver.p));
    const auto ub = solve_or_throw(mesh, truncated_trace(mesh, fb, cut), cfg.solver, ctx("jump b", k, cfg.solver.p));
    const PointLocator loc(mesh);
    auto& lvl = rep.levels[l];
    lvl.h = o.h_target;
    lvl.vertices = mesh.points.size();
    for (const auto& z : probes) lvl.probe_difference.push_back(std::abs(loc.interpolate(ua.u, z) - loc.interpolate(ub.u, z)));
  });
  if (!jumps.empty())
    for (std::size_t l = 1; l < rep.levels.size(); ++l)
      for (std::size_t q = 0; q < probes.size(); ++q)
        if (!(rep.levels[l].probe_difference[q] < rep.levels[l - 1].probe_difference[q]))
          rep.difference_decreasing = false;

  const auto radii = approach_radii(approach);
  rep.approaches.resize(jumps.size());
  parallel_for(jumps.size(), cfg.threads, [&](std::size_t i) {
    const auto& e = jumps[i];
    const double beta = 0.5 * (e.alpha1 + e.alpha2);
    MeshOptions o = cfg.mesh;
    o.h_target = std::ldexp(h0, -(levels - 1));
    o.refine.push_back({e.at.xy, radii.back() / 64.0});
    const SlitMesh mesh = generate_mesh(truncate(build_comb(k + 1), k), o);
    // Unmodified data here: a single node carrying an override leaves an
    // O(h/r) footprint that would swamp the approach error at fixed h.
    const auto sol = solve_or_throw(mesh, truncated_trace(mesh, f, cut), cfg.solver, ctx("jump approach", k, cfg.solver.p));
    const PointLocator loc(mesh);
    const DomainSpec domain = truncate(build_comb(k + 1), k);
    for (const double r : radii) {
      const Point y{e.at.xy.x + r * std::cos(beta), e.at.xy.y + r * std::sin(beta)};
      if (!contains(domain, y)) throw ExperimentError("jump approach point " + fmt_point(y) + " leaves the domain");
      ApproachRow row;
      row.r = r;
      row.point = y;
      row.dist_ext = dist_ext(ExtendedPoint{y, {}}, e.at);
      row.u = loc.interpolate(sol.u, y);
      row.target = jump_reference_U(e, ExtendedPoint{y, {}});
      rep.approaches[i].push_back(row);
    }
  });
  for (const auto& rows : rep.approaches)
    if (!strictly_decreasing(rows, cfg.check_tol)) rep.approach_decreasing = false;
  return rep;
}

// ---------------------------------------------------------------------------

BumpTerm blowup_bump(int j) {
  return BumpTerm{{1.0, 3.0 * std::ldexp(1.0, -(j + 1))}, std::ldexp(1.0, -(j + 2)), 1.0};
}

BlowupReport blowup_probe(int J, Point probe, int k, const LabConfig& cfg, double slack, bool refine_bumps) {
  if (J < 1) throw ExperimentError("blow-up needs J >= 1");
  check_probes({probe}, k);
  BlowupReport rep;
  rep.k = k;
  rep.probe = probe;
  rep.slack = slack;
  std::vector<BumpTerm> bumps;
  std::vector<RefinePoint> refine;
  for (int j = 1; j <= J; ++j) {
    const BumpTerm b = blowup_bump(2 * j);
    if (!(b.center.y - b.radius > tooth_height(k))) {
      std::ostringstream os;
      os << "bump f_" << 2 * j << " reaches below the wall of Psi_" << k << "; increase k";
      throw ExperimentError(os.str());
    }
    bumps.push_back(b);
    if (refine_bumps) refine.push_back({b.center, b.radius / 4.0});
  }
  const SlitMesh mesh = mesh_truncated(k, cfg.mesh, refine);
  const PointLocator loc(mesh);

  // Lower Perron surrogate: the data are >= 0 with infimum 0, which goes on the cut.
  rep.bump_values.resize(bumps.size());
  parallel_for(bumps.size(), cfg.threads, [&](std::size_t i) {
    BoundaryFunctionSpec f;
    f.terms.emplace_back(1.0, bumps[i]);
    f.description = "f_" + std::to_string(2 * (i + 1));
    const auto s = solve_or_throw(mesh, truncated_trace(mesh, f, 0.0), cfg.solver, ctx("bump", k, cfg.solver.p));
    rep.bump_values[i] = loc.interpolate(s.u, probe);
  });
  for (std::size_t i = 0; i < bumps.size(); ++i)
    if (!(rep.bump_values[i] >= 1e-12)) {
      std::ostringstream os;
      os << "ill-posed bump f_" << 2 * (i + 1) << ": c = " << rep.bump_values[i]
         << " < 1e-12 at the probe (mesh too coarse near the bump, or the bump is screened)";
      throw ExperimentError(os.str());
    }

  rep.u_J.resize(bumps.size());
  parallel_for(bumps.size(), cfg.threads, [&](std::size_t n) {
    BoundaryFunctionSpec f;
    for (std::size_t i = 0; i <= n; ++i)
      f.terms.emplace_back(2.0 * static_cast<double>(i + 1) / rep.bump_values[i], bumps[i]);
    f.description = "blow-up J=" + std::to_string(n + 1);
    const auto s = solve_or_throw(mesh, truncated_trace(mesh, f, 0.0), cfg.solver, ctx("blow-up", k, cfg.solver.p));
    rep.u_J[n] = loc.interpolate(s.u, probe);
  });
  rep.bounds_ok = true;
  rep.increasing = true;
  for (std::size_t n = 0; n < rep.u_J.size(); ++n) {
    if (rep.u_J[n] < 2.0 * static_cast<double>(n + 1) * (1.0 - slack)) rep.bounds_ok = false;
    if (n > 0 && !(rep.u_J[n] > rep.u_J[n - 1])) rep.increasing = false;
  }
  return rep;
}

}  // namespace comblab

// ---------------------------------------------------------------------------
// JSON

namespace comblab {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw ExperimentError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ExperimentError(std::string("unknown key '") + key + "' in " + what);
  }
}

Point point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw ExperimentError("points are [x, y] arrays");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

JumpSpec JumpSpec::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"kind", "y", "a_up", "a_down", "j", "a_upper", "a_lower"}, "jump");
  const std::string kind = j.value("kind", "");
  if (kind == "outer_wall") return outer_wall(j.at("y").get<double>(), j.at("a_up").get<double>(), j.at("a_down").get<double>());
  if (kind == "tooth_tip") return tooth_tip(j.at("j").get<int>(), j.at("a_upper").get<double>(), j.at("a_lower").get<double>());
  throw ExperimentError("jump kind must be outer_wall or tooth_tip");
}

BoundaryFunctionSpec BoundaryFunctionSpec::from_json(const nlohmann::json& j) {
  if (j.is_string()) return expression(j.get<std::string>());
  if (j.is_number()) return constant(j.get<double>());
  reject_unknown(j, {"expression", "constant", "bumps", "jumps", "value_on_I", "value_at_origin", "overrides", "bounds"},
                 "boundary function");
  BoundaryFunctionSpec f;
  std::vector<std::string> parts;
  if (j.contains("expression")) {
    const auto src = j["expression"].get<std::string>();
    f.terms.emplace_back(1.0, ExpressionTerm{Expression(src)});
    parts.push_back(src);
  }
  if (j.contains("constant")) {
    const double c = j["constant"].get<double>();
    f.terms.emplace_back(c, ExpressionTerm{Expression("1")});
    parts.push_back("constant");
  }
  if (j.contains("bumps"))
    for (const auto& b : j["bumps"]) {
      reject_unknown(b, {"center", "radius", "amplitude"}, "bump");
      BumpTerm t{point_from_json(b.at("center")), b.at("radius").get<double>(), b.value("amplitude", 1.0)};
      if (!(t.radius > 0.0)) throw ExperimentError("bump radius must be positive");
      f.terms.emplace_back(1.0, t);
      parts.push_back("bump");
    }
  if (j.contains("jumps"))
    for (const auto& e : j["jumps"]) {
      f.terms.emplace_back(1.0, JumpTerm{JumpSpec::from_json(e)});
      parts.push_back("jump");
    }
  if (j.contains("value_on_I")) f.value_on_I = j["value_on_I"].get<double>();
  if (j.contains("value_at_origin")) f.value_at_origin = j["value_at_origin"].get<double>();
  if (j.contains("overrides"))
    for (const auto& o : j["overrides"]) {
      reject_unknown(o, {"at", "value"}, "override");
      f.overrides.push_back({point_from_json(o.at("at")), o.at("value").get<double>()});
    }
  if (j.contains("bounds")) {
    const auto& b = j["bounds"];
    if (!b.is_array() || b.size() != 2 || b[0].get<double>() > b[1].get<double>())
      throw ExperimentError("bounds must be [inf, sup]");
    f.bounds = std::pair{b[0].get<double>(), b[1].get<double>()};
  }
  if (f.terms.empty() && f.overrides.empty()) throw ExperimentError("boundary function has no terms");
  for (std::size_t i = 0; i < parts.size(); ++i) f.description += (i ? " + " : "") + parts[i];
  return f;
}

}  // namespace comblab
