#include <doctest.h>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "comblab/solver.hpp"

using namespace comblab;

namespace {

SlitMesh comb_mesh(int k, double h) {
  MeshOptions o;
  o.h_target = h;
  return generate_mesh(truncate(build_comb(k + 1), k), o);
}

PSolverConfig with_p(double p) {
  PSolverConfig c;
  c.p = p;
  return c;
}

BoundaryTrace smooth_trace(const SlitMesh& m) {
  return BoundaryTrace::from_function(m, [](const BoundaryNode& b) {
    const auto& x = b.ext.xy;
    return std::sin(2.0 * x.x) + x.y * x.y + 0.3 * b.ext.sheet.sign();
  });
}

double total_area(const SlitMesh& m) {
  double a = 0.0;
  for (const auto& t : m.triangles)
    a += triangle_area(m.points[static_cast<std::size_t>(t[0])], m.points[static_cast<std::size_t>(t[1])],
                       m.points[static_cast<std::size_t>(t[2])]);
  return a;
}

// Cotangent stiffness with Dirichlet elimination; written independently of
// the energy code.
std::vector<double> cotangent_solve(const SlitMesh& m, const BoundaryTrace& trace) {
  const int n = static_cast<int>(m.points.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& t : m.triangles)
    for (int i = 0; i < 3; ++i) {
      const int a = t[i], b = t[(i + 1) % 3], c = t[(i + 2) % 3];
      const auto& pa = m.points[static_cast<std::size_t>(a)];
      const auto& pb = m.points[static_cast<std::size_t>(b)];
      const auto& pc = m.points[static_cast<std::size_t>(c)];
      // angle at c opposite edge ab
      const double ux = pa.x - pc.x, uy = pa.y - pc.y, vx = pb.x - pc.x, vy = pb.y - pc.y;
      const double w = 0.5 * (ux * vx + uy * vy) / std::abs(ux * vy - uy * vx);
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
      trip.emplace_back(a, a, w);
      trip.emplace_back(b, b, w);
    }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  std::vector<int> map(static_cast<std::size_t>(n), -1);
  int nf = 0;
  for (int v = 0; v < n; ++v)
    if (!trace.values.contains(v)) map[static_cast<std::size_t>(v)] = nf++;
  std::vector<Eigen::Triplet<double>> tf;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int r = map[static_cast<std::size_t>(it.row())];
      if (r < 0) continue;
      const int cc = map[static_cast<std::size_t>(it.col())];
      if (cc >= 0) tf.emplace_back(r, cc, it.value());
      else rhs[r] -= it.value() * trace.values.at(static_cast<int>(it.col()));
    }
  Eigen::SparseMatrix<double> A(nf, nf);
  A.setFromTriplets(tf.begin(), tf.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
  const Eigen::VectorXd x = lu.solve(rhs);
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v)
    u[static_cast<std::size_t>(v)] = map[static_cast<std::size_t>(v)] < 0 ? trace.values.at(v) : x[map[static_cast<std::size_t>(v)]];
  return u;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(with_p(0.5).validate(), SolverError);
  CHECK(with_p(2.0).validate().empty());
  CHECK(with_p(1.05).validate().size() == 1);
  auto c = with_p(2.0);
  c.eps_schedule = {1e-2, 1e-1};
  CHECK_THROWS_AS(c.validate(), SolverError);
}

TEST_CASE("energy of simple fields") {
  const auto m = generate_rectangle_mesh({0, 0}, {1, 1}, 4, 4);
  std::vector<double> c(m.points.size(), 3.0);
  for (const double p : {1.5, 2.0, 4.0}) {
    const double eps = 0.1;
    const auto eg = assemble_energy_gradient(m, c, p, eps);
    CHECK(eg.energy == doctest::Approx(std::pow(eps, p) / p).epsilon(1e-12));
    for (const double g : eg.gradient) CHECK(std::abs(g) < 1e-14);
    std::vector<double> x(m.points.size());
    for (std::size_t v = 0; v < x.size(); ++v) x[v] = m.points[v].x;
    CHECK(assemble_energy_gradient(m, x, p, 1e-9).energy == doctest::Approx(1.0 / p).epsilon(1e-9));
  }
  CHECK(total_area(m) == doctest::Approx(1.0));
  CHECK_THROWS_AS(assemble_energy_gradient(m, c, 2.0, 0.0), SolverError);
}

TEST_CASE("gradient against central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto m = comb_mesh(1, 0.5);
  REQUIRE(m.points.size() <= 200);
  for (const double p : {1.2, 2.0, 4.0}) {
    std::vector<double> x(m.points.size());
    for (auto& v : x) v = u(rng);
    const double eps = 1e-2;
    const auto eg = assemble_energy_gradient(m, x, p, eps);
    double err = 0.0, scale = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v) {
      auto a = x, b = x;
      a[v] += 1e-6;
      b[v] -= 1e-6;
      const double fd = (assemble_energy_gradient(m, a, p, eps).energy - assemble_energy_gradient(m, b, p, eps).energy) / 2e-6;
      err = std::max(err, std::abs(fd - eg.gradient[v]));
      scale = std::max(scale, std::abs(eg.gradient[v]));
    }
    CHECK(err / scale <= 1e-6);
  }
}

TEST_CASE("linear data is reproduced") {
  const auto m = generate_rectangle_mesh({0, 0}, {1, 1}, 16, 16);
  const auto tr = BoundaryTrace::from_function(m, [](const BoundaryNode& b) { return b.ext.xy.x; });
  for (const double p : {1.5, 2.0, 3.0, 4.0}) {
    const auto s = solve_dirichlet(m, tr, with_p(p));
    CHECK(s.converged);
    for (std::size_t v = 0; v < m.points.size(); ++v) CHECK(std::abs(s.u[v] - m.points[v].x) <= 1e-6);
  }
}

TEST_CASE("affine data on a slit mesh") {
  const auto m = comb_mesh(2, 1.0 / 16);
  const auto tr = BoundaryTrace::from_function(m, [](const BoundaryNode& b) { return 0.5 * b.ext.xy.x - b.ext.xy.y + 2.0; });
  const auto s = solve_dirichlet(m, tr, with_p(3.0));
  for (std::size_t v = 0; v < m.points.size(); ++v)
    CHECK(std::abs(s.u[v] - (0.5 * m.points[v].x - m.points[v].y + 2.0)) <= 1e-6);
}

TEST_CASE("constant data") {
  const auto m = comb_mesh(1, 1.0 / 16);
  const auto tr = BoundaryTrace::from_function(m, [](const BoundaryNode&) { return 0.7; });
  const auto s = solve_dirichlet(m, tr, with_p(1.5));
  for (const double v : s.u) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("p = 2 agrees with a direct cotangent solve") {
  const auto m = comb_mesh(2, 1.0 / 16);
  const auto tr = smooth_trace(m);
  const auto s = solve_dirichlet(m, tr, with_p(2.0));
  const auto ref = cotangent_solve(m, tr);
  double err = 0.0;
  for (std::size_t v = 0; v < ref.size(); ++v) err = std::max(err, std::abs(s.u[v] - ref[v]));
  CHECK(err <= 1e-8);
}

TEST_CASE("maximum principle, scaling and translation") {
  const auto m = comb_mesh(2, 1.0 / 16);
  const auto tr = smooth_trace(m);
  for (const double p : {1.5, 2.0, 3.0}) {
    const auto s = solve_dirichlet(m, tr, with_p(p));
    REQUIRE(s.converged);
    CHECK(s.max_energy_increase <= 1e-12 * (1.0 + std::abs(s.energy)));
    for (const double v : s.u) {
      CHECK(v >= tr.min() - 1e-7);
      CHECK(v <= tr.max() + 1e-7);
    }
    BoundaryTrace twice = tr, shifted = tr;
    for (auto& [k, v] : twice.values) v *= 2.0;
    for (auto& [k, v] : shifted.values) v += 1.0;
    const auto s2 = solve_dirichlet(m, twice, with_p(p));
    const auto s3 = solve_dirichlet(m, shifted, with_p(p));
    for (std::size_t v = 0; v < s.u.size(); ++v) {
      CHECK(std::abs(s2.u[v] - 2.0 * s.u[v]) <= 1e-7);
      CHECK(std::abs(s3.u[v] - s.u[v] - 1.0) <= 1e-7);
    }
  }
}

TEST_CASE("residual") {
  const auto m = comb_mesh(1, 1.0 / 8);
  const auto tr = smooth_trace(m);
  auto cfg = with_p(3.0);
  const auto s = solve_dirichlet(m, tr, cfg);
  const double r0 = residual_norm(m, s.u, 3.0, s.final_eps);
  CHECK(r0 <= 1e-8);
  auto bumped = s.u;
  for (std::size_t v = 0; v < bumped.size(); ++v)
    if (!tr.values.contains(static_cast<int>(v))) {
      bumped[v] += 1e-3;
      break;
    }
  CHECK(residual_norm(m, bumped, 3.0, s.final_eps) > r0);
  // shifting trace and field together leaves the residual unchanged
  auto moved = s.u;
  for (auto& v : moved) v += 5.0;
  CHECK(std::abs(residual_norm(m, moved, 3.0, s.final_eps) - r0) <= 1e-6 * r0 + 1e-14);
}

TEST_CASE("discrete comparison") {
  const auto m = comb_mesh(1, 1.0 / 16);
  const auto tr = smooth_trace(m);
  for (const double p : {1.5, 3.0}) {
    const auto same = check_discrete_comparison(m, tr, tr, with_p(p));
    CHECK(same.pass);
    BoundaryTrace up = tr;
    for (auto& [k, v] : up.values) v += 1.0;
    const auto r = check_discrete_comparison(m, tr, up, with_p(p));
    CHECK(r.pass);
    CHECK(r.max_difference == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK_THROWS_AS(check_discrete_comparison(m, up, tr, with_p(p)), SolverError);
  }
}

TEST_CASE("incomplete trace is rejected") {
  const auto m = comb_mesh(0, 1.0 / 8);
  auto tr = smooth_trace(m);
  tr.values.erase(tr.values.begin());
  CHECK_THROWS_AS(solve_dirichlet(m, tr, with_p(2.0)), SolverError);
}
