#include "comblab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace comblab {

namespace {

void finish(SuiteResult& r) {
  r.worst = 0.0;
  r.pass = true;
  for (const auto& c : r.cases) {
    r.worst = std::max(r.worst, c.value);
    r.pass = r.pass && c.pass;
  }
}

std::string label_of(const char* what, double p, int i) {
  std::ostringstream os;
  os << what << " p=" << p << " #" << i;
  return os.str();
}

// Interior vertices of a box mesh shifted by up to a fifth of a cell.
SlitMesh jittered_box(int nx, int ny, std::mt19937_64& rng) {
  SlitMesh m = generate_rectangle_mesh({0.0, 0.0}, {1.0, 1.0}, nx, ny);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  std::vector<bool> fixed(m.points.size(), false);
  for (const auto& b : m.boundary) fixed[static_cast<std::size_t>(b.vertex)] = true;
  for (std::size_t v = 0; v < m.points.size(); ++v)
    if (!fixed[v]) {
      m.points[v].x += d(rng) / nx;
      m.points[v].y += d(rng) / ny;
    }
  return m;
}

}  // namespace

SuiteResult linear_exactness_suite(const std::vector<double>& ps, int n, double tol) {
  SuiteResult r;
  r.name = "linear-exactness";
  const SlitMesh mesh = generate_rectangle_mesh({0.0, 0.0}, {1.0, 1.0}, n, n);
  const auto trace = BoundaryTrace::from_function(mesh, [](const BoundaryNode& b) { return b.ext.xy.x; }, "x");
  for (const double p : ps) {
    PSolverConfig cfg;
    cfg.p = p;
    const auto s = solve_dirichlet(mesh, trace, cfg);
    double err = 0.0;
    for (std::size_t v = 0; v < mesh.points.size(); ++v) err = std::max(err, std::abs(s.u[v] - mesh.points[v].x));
    r.cases.push_back({label_of("linear", p, 0), p, err, tol, s.converged && err <= tol});
  }
  finish(r);
  return r;
}

double radial_profile(double r, double p) { return std::pow(r, (p - 2.0) / (p - 1.0)); }

RadialResult radial_suite(const std::vector<double>& ps, const std::vector<double>& hs, double error_tol,
                          double min_order) {
  RadialResult out;
  for (const double p : ps) {
    std::vector<double> errs;
    for (const double h : hs) {
      const SlitMesh mesh = generate_ring_mesh(0.5, 1.0, h);
      const auto exact = [&](const Point& x) { return radial_profile(std::hypot(x.x, x.y), p); };
      const auto trace = BoundaryTrace::from_function(mesh, [&](const BoundaryNode& b) { return exact(b.ext.xy); });
      PSolverConfig cfg;
      cfg.p = p;
      const auto s = solve_dirichlet(mesh, trace, cfg);
      double err = 0.0;
      for (std::size_t v = 0; v < mesh.points.size(); ++v) err = std::max(err, std::abs(s.u[v] - exact(mesh.points[v])));
      if (!s.converged) out.pass = false;
      out.rows.push_back({p, h, mesh.points.size(), err});
      errs.push_back(err);
    }
    if (errs.back() > error_tol) out.pass = false;
    if (hs.size() >= 2) {
      const std::size_t n = hs.size();
      const double order = std::log(errs[n - 2] / errs[n - 1]) / std::log(hs[n - 2] / hs[n - 1]);
      out.orders.emplace_back(p, order);
      if (!(order >= min_order)) out.pass = false;
    }
  }
  return out;
}

SuiteResult gradient_check_suite(int cases, std::uint64_t seed, double tol) {
  SuiteResult r;
  r.name = "gradient-check";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cells(2, 12);
  for (int i = 0; i < cases; ++i) {
    SlitMesh mesh;
    switch (i % 3) {
      case 0: mesh = jittered_box(cells(rng), cells(rng), rng); break;
      case 1: {
        MeshOptions o;
        o.h_target = 0.5;
        o.coarsening = 1;
        mesh = generate_mesh(truncate(build_comb(2), 1), o);
        break;
      }
      default: {
        MeshOptions o;
        o.h_target = unit(rng) < 0.5 ? 1.0 : 0.5;
        o.coarsening = 1;
        mesh = generate_mesh(truncate(build_comb(1), 0), o);
      }
    }
    const double p = 1.1 + 4.9 * unit(rng);
    const double eps = std::pow(10.0, -1.0 - 5.0 * unit(rng));
    std::vector<double> u(mesh.points.size());
    for (auto& x : u) x = 2.0 * unit(rng) - 1.0;
    const auto eg = assemble_energy_gradient(mesh, u, p, eps);
    // Central differences, step scaled to the energy's curvature.
    double num = 0.0, den = 0.0;
    const double step = 1e-6;
    for (std::size_t v = 0; v < u.size(); ++v) {
      auto up = u, dn = u;
      up[v] += step;
      dn[v] -= step;
      const double fd = (assemble_energy_gradient(mesh, up, p, eps).energy -
                         assemble_energy_gradient(mesh, dn, p, eps).energy) / (2.0 * step);
      num = std::max(num, std::abs(fd - eg.gradient[v]));
      den = std::max(den, std::abs(eg.gradient[v]));
    }
    const double rel = num / std::max(den, 1e-300);
    r.cases.push_back({label_of("gradient", p, i), p, rel, tol, rel <= tol});
  }
  finish(r);
  return r;
}

SuiteResult comparison_suite(int cases, const std::vector<double>& ps, std::uint64_t seed, double tol, double h) {
  SuiteResult r;
  r.name = "comparison";
  MeshOptions o;
  o.h_target = h;
  const SlitMesh mesh = generate_mesh(truncate(build_comb(2), 1), o);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const double p : ps) {
    PSolverConfig cfg;
    cfg.p = p;
    for (int i = 0; i < cases; ++i) {
      // Smooth data in even cases, nodal noise in odd ones; the gap is >= 0 either way.
      const double a = unit(rng), bx = unit(rng) - 0.5, by = unit(rng) - 0.5, bs = unit(rng) - 0.5;
      const double g0 = 0.3 * unit(rng), gx = unit(rng), gy = unit(rng);
      const bool noisy = i % 2 == 1;
      BoundaryTrace lower, upper;
      for (const auto& b : mesh.boundary) {
        const Point& x = b.ext.xy;
        const double s = b.ext.sheet.sign();
        const double lo = noisy ? unit(rng) : a + bx * x.x + by * x.y + bs * s * x.x;
        const double gap = noisy ? (unit(rng) < 0.5 ? 0.0 : unit(rng))
                                 : g0 + 0.2 * gx * (1.0 + std::sin(5.0 * x.x)) + 0.2 * gy * x.y * x.y;
        lower.values[b.vertex] = lo;
        upper.values[b.vertex] = lo + gap;
      }
      const auto rep = check_discrete_comparison(mesh, lower, upper, cfg);
      r.cases.push_back({label_of("comparison", p, i), p, std::max(0.0, rep.max_difference), tol,
                         rep.converged && rep.max_difference <= tol});
    }
  }
  finish(r);
  return r;
}

}  // namespace comblab
