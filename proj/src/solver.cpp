#include "comblab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace comblab {

std::vector<std::string> PSolverConfig::validate() const {
  if (!(p > 1.0)) throw SolverError("p must exceed 1");
  if (eps_schedule.empty()) throw SolverError("eps schedule is empty");
  for (std::size_t i = 0; i < eps_schedule.size(); ++i) {
    if (!(eps_schedule[i] > 0.0)) throw SolverError("eps values must be positive");
    if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
      throw SolverError("eps schedule must be strictly decreasing");
  }
  if (!(grad_tol > 0.0) || max_newton_iters < 1) throw SolverError("tolerances must be positive");
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0) || !(ls_sufficient_decrease > 0.0 && ls_sufficient_decrease < 0.5))
    throw SolverError("line search parameters out of range");
  std::vector<std::string> warnings;
  if (p <= 1.1 || p >= 10.0) {
    std::ostringstream os;
    os << "p = " << p << " lies outside (1.1, 10); tolerances may be unattainable";
    warnings.push_back(os.str());
  }
  return warnings;
}

BoundaryTrace BoundaryTrace::from_function(const SlitMesh& mesh,
                                           const std::function<double(const BoundaryNode&)>& f,
                                           std::string descriptor) {
  BoundaryTrace t;
  t.descriptor = std::move(descriptor);
  for (const auto& b : mesh.boundary) t.values[b.vertex] = f(b);
  return t;
}

void BoundaryTrace::check_complete(const SlitMesh& mesh) const {
  std::set<int> needed;
  for (const auto& b : mesh.boundary) needed.insert(b.vertex);
  for (const auto& [v, value] : values) {
    if (!needed.count(v)) throw SolverError("trace value on a non-boundary vertex " + std::to_string(v));
    if (!std::isfinite(value)) throw SolverError("non-finite trace value at vertex " + std::to_string(v));
  }
  if (values.size() != needed.size()) throw SolverError("trace does not cover every boundary node");
}

double BoundaryTrace::min() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& [v, value] : values) m = std::min(m, value);
  return m;
}

double BoundaryTrace::max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& [v, value] : values) m = std::max(m, value);
  return m;
}

// ---------------------------------------------------------------------------

PEnergy::PEnergy(const SlitMesh& mesh) : num_vertices_(mesh.points.size()), tris_(mesh.triangles) {
  area_.reserve(tris_.size());
  grad_.reserve(tris_.size());
  for (const auto& t : tris_) {
    const Point& a = mesh.points[static_cast<std::size_t>(t[0])];
    const Point& b = mesh.points[static_cast<std::size_t>(t[1])];
    const Point& c = mesh.points[static_cast<std::size_t>(t[2])];
    const double area = triangle_area(a, b, c);
    if (!(area > 0.0)) throw SolverError("degenerate or inverted triangle in assembly");
    const double s = 1.0 / (2.0 * area);
    area_.push_back(area);
    grad_.push_back({{{(b.y - c.y) * s, (c.x - b.x) * s},
                      {(c.y - a.y) * s, (a.x - c.x) * s},
                      {(a.y - b.y) * s, (b.x - a.x) * s}}});
  }
}

std::array<double, 2> PEnergy::field_gradient(std::size_t t, std::span<const double> u) const {
  std::array<double, 2> g{0.0, 0.0};
  for (std::size_t k = 0; k < 3; ++k) {
    const double uk = u[static_cast<std::size_t>(tris_[t][k])];
    g[0] += uk * grad_[t][k][0];
    g[1] += uk * grad_[t][k][1];
  }
  return g;
}

double PEnergy::energy(std::span<const double> u, double p, double eps) const {
  double e = 0.0;
  const double e2 = eps * eps;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const auto g = field_gradient(t, u);
    e += area_[t] * std::pow(e2 + g[0] * g[0] + g[1] * g[1], 0.5 * p);
  }
  return e / p;
}

EnergyGradient PEnergy::energy_gradient(std::span<const double> u, double p, double eps) const {
  if (u.size() != num_vertices_) throw SolverError("nodal vector has the wrong size");
  EnergyGradient out;
  out.gradient.assign(num_vertices_, 0.0);
  const double e2 = eps * eps;
  double e = 0.0;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const auto g = field_gradient(t, u);
    const double s = e2 + g[0] * g[0] + g[1] * g[1];
    const double w = std::pow(s, 0.5 * p - 1.0);
    e += area_[t] * w * s;
    for (std::size_t k = 0; k < 3; ++k)
      out.gradient[static_cast<std::size_t>(tris_[t][k])] +=
          area_[t] * w * (g[0] * grad_[t][k][0] + g[1] * grad_[t][k][1]);
  }
  out.energy = e / p;
  return out;
}

EnergyGradient assemble_energy_gradient(const SlitMesh& mesh, std::span<const double> u, double p,
                                        double eps) {
  if (!(eps > 0.0)) throw SolverError("eps must be positive");
  return PEnergy(mesh).energy_gradient(u, p, eps);
}

namespace {

std::vector<char> boundary_mask(const SlitMesh& mesh) {
  std::vector<char> fixed(mesh.points.size(), 0);
  for (const auto& b : mesh.boundary) fixed[static_cast<std::size_t>(b.vertex)] = 1;
  return fixed;
}

double masked_norm(const std::vector<double>& g, const std::vector<char>& fixed) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!fixed[i]) s += g[i] * g[i];
  return std::sqrt(s);
}

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Newton machinery on the free (non-Dirichlet) unknowns.
class NewtonSystem {
public:
  NewtonSystem(const PEnergy& energy, const std::vector<char>& fixed) : energy_(energy) {
    free_index_.assign(fixed.size(), -1);
    for (std::size_t v = 0; v < fixed.size(); ++v)
      if (!fixed[v]) free_index_[v] = num_free_++;
    std::vector<Eigen::Triplet<double>> pattern;
    const auto& tris = energy_.triangles();
    for (const auto& t : tris)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int ia = free_index_[static_cast<std::size_t>(t[static_cast<std::size_t>(a)])];
          const int ib = free_index_[static_cast<std::size_t>(t[static_cast<std::size_t>(b)])];
          if (ia >= 0 && ib >= 0) pattern.emplace_back(ia, ib, 1.0);
        }
    hessian_.resize(num_free_, num_free_);
    hessian_.setFromTriplets(pattern.begin(), pattern.end());
    hessian_.makeCompressed();
    slot_.resize(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int ia = free_index_[static_cast<std::size_t>(tris[t][static_cast<std::size_t>(a)])];
          const int ib = free_index_[static_cast<std::size_t>(tris[t][static_cast<std::size_t>(b)])];
          int pos = -1;
          if (ia >= 0 && ib >= 0) {
            const auto* outer = hessian_.outerIndexPtr();
            const auto* inner = hessian_.innerIndexPtr();
            for (int q = outer[ib]; q < outer[ib + 1]; ++q)
              if (inner[q] == ia) { pos = q; break; }
          }
          slot_[t][static_cast<std::size_t>(3 * a + b)] = pos;
        }
    if (num_free_ > 0) solver_.analyzePattern(hessian_);
  }

  int num_free() const { return num_free_; }
  int free_index(std::size_t v) const { return free_index_[v]; }

  /// Fills the Hessian of the regularised energy at u and factorises it.
  bool factorize(std::span<const double> u, double p, double eps) {
    double* values = hessian_.valuePtr();
    std::fill(values, values + hessian_.nonZeros(), 0.0);
    const double e2 = eps * eps;
    for (std::size_t t = 0; t < energy_.num_triangles(); ++t) {
      const auto g = energy_.field_gradient(t, u);
      const double s = e2 + g[0] * g[0] + g[1] * g[1];
      const double w = std::pow(s, 0.5 * p - 1.0);
      const double w2 = (p - 2.0) * std::pow(s, 0.5 * p - 2.0);
      std::array<double, 3> proj{};
      for (int k = 0; k < 3; ++k) {
        const auto& gk = energy_.basis_gradient(t, k);
        proj[static_cast<std::size_t>(k)] = g[0] * gk[0] + g[1] * gk[1];
      }
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int pos = slot_[t][static_cast<std::size_t>(3 * a + b)];
          if (pos < 0) continue;
          const auto& ga = energy_.basis_gradient(t, a);
          const auto& gb = energy_.basis_gradient(t, b);
          values[pos] += energy_.area(t) *
              (w * (ga[0] * gb[0] + ga[1] * gb[1]) +
               w2 * proj[static_cast<std::size_t>(a)] * proj[static_cast<std::size_t>(b)]);
        }
    }
    solver_.factorize(hessian_);
    return solver_.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return solver_.solve(rhs); }
  double diagonal(int i) const { return hessian_.coeff(i, i); }

private:
  const PEnergy& energy_;
  std::vector<int> free_index_;
  int num_free_ = 0;
  SparseMatrix hessian_;
  std::vector<std::array<int, 9>> slot_;
  Eigen::SimplicialLDLT<SparseMatrix> solver_;
};

}  // namespace

double residual_norm(const SlitMesh& mesh, std::span<const double> u, double p, double eps) {
  const auto eg = assemble_energy_gradient(mesh, u, p, eps);
  return masked_norm(eg.gradient, boundary_mask(mesh));
}

Solution solve_dirichlet(const SlitMesh& mesh, const BoundaryTrace& trace,
                         const PSolverConfig& config) {
  config.validate();
  trace.check_complete(mesh);
  const PEnergy energy(mesh);
  const auto fixed = boundary_mask(mesh);
  NewtonSystem system(energy, fixed);
  const int nf = system.num_free();

  Solution sol;
  sol.u.assign(mesh.points.size(), 0.0);
  for (const auto& [v, value] : trace.values) sol.u[static_cast<std::size_t>(v)] = value;

  const auto free_gradient = [&](const std::vector<double>& g) {
    Eigen::VectorXd out(nf);
    for (std::size_t v = 0; v < g.size(); ++v)
      if (const int i = system.free_index(v); i >= 0) out[i] = g[v];
    return out;
  };
  const auto step_to = [&](const Eigen::VectorXd& d, double t) {
    std::vector<double> w = sol.u;
    for (std::size_t v = 0; v < w.size(); ++v)
      if (const int i = system.free_index(v); i >= 0) w[v] += t * d[i];
    return w;
  };

  if (nf == 0) {
    const auto eg = energy.energy_gradient(sol.u, config.p, config.eps_schedule.back());
    sol.energy = eg.energy;
    sol.final_eps = config.eps_schedule.back();
    sol.converged = true;
    sol.message = "no free vertices";
    return sol;
  }

  // Start from the discrete harmonic extension (one Newton step of the p = 2 energy).
  {
    const auto eg = energy.energy_gradient(sol.u, 2.0, 1.0);
    if (!system.factorize(sol.u, 2.0, 1.0)) throw SolverError("stiffness factorisation failed");
    sol.u = step_to(system.solve(-free_gradient(eg.gradient)), 1.0);
  }

  bool all_converged = true;
  std::ostringstream notes;
  for (const double eps : config.eps_schedule) {
    int iters = 0;
    bool stage_ok = false;
    auto eg = energy.energy_gradient(sol.u, config.p, eps);
    double res = masked_norm(eg.gradient, fixed);
    for (;;) {
      if (res <= config.grad_tol * (1.0 + std::abs(eg.energy))) { stage_ok = true; break; }
      if (iters >= config.max_newton_iters) break;
      ++iters;
      const Eigen::VectorXd g = free_gradient(eg.gradient);
      Eigen::VectorXd d;
      bool newton = system.factorize(sol.u, config.p, eps);
      if (newton) {
        d = system.solve(-g);
        newton = d.allFinite() && g.dot(d) < 0.0;
      }
      const auto line_search = [&](const Eigen::VectorXd& dir) -> bool {
        const double slope = g.dot(dir);
        double t = 1.0;
        for (int k = 0; k < config.ls_max_steps; ++k, t *= config.ls_shrink) {
          auto w = step_to(dir, t);
          auto trial = energy.energy_gradient(w, config.p, eps);
          const double rounding = 1e-14 * (1.0 + std::abs(eg.energy));
          const bool armijo = trial.energy <= eg.energy + config.ls_sufficient_decrease * t * slope;
          // Near the minimiser energy differences drown in rounding; accept a
          // full step that still reduces the gradient.
          const double trial_res = masked_norm(trial.gradient, fixed);
          const bool flat = k == 0 && std::abs(slope) <= rounding &&
                            trial.energy <= eg.energy + rounding && trial_res < res;
          if (armijo || flat) {
            sol.max_energy_increase = std::max(sol.max_energy_increase, trial.energy - eg.energy);
            sol.u = std::move(w);
            eg = std::move(trial);
            res = trial_res;
            return true;
          }
        }
        return false;
      };
      if (newton && line_search(d)) continue;
      // Fallback: Jacobi-preconditioned steepest descent.
      ++sol.descent_fallbacks;
      Eigen::VectorXd dd(nf);
      for (int i = 0; i < nf; ++i) {
        const double diag = newton ? system.diagonal(i) : 1.0;
        dd[i] = -g[i] / (diag > 0.0 ? diag : 1.0);
      }
      if (!line_search(dd)) {
        notes << "line search failed at eps=" << eps << "; ";
        break;
      }
    }
    sol.iterations.push_back(iters);
    sol.final_eps = eps;
    sol.energy = eg.energy;
    sol.residual = res;
    if (!stage_ok) {
      all_converged = eps == config.eps_schedule.back() ? false : all_converged;
      notes << "eps=" << eps << " stopped at residual " << res << "; ";
    }
  }
  sol.converged = all_converged;
  sol.message = notes.str();
  if (sol.message.empty()) sol.message = "converged";
  for (const auto& [v, value] : trace.values) sol.u[static_cast<std::size_t>(v)] = value;
  return sol;
}

ComparisonReport check_discrete_comparison(const SlitMesh& mesh, const BoundaryTrace& lower,
                                           const BoundaryTrace& upper, const PSolverConfig& config,
                                           double comparison_tol) {
  for (const auto& [v, value] : lower.values) {
    const auto it = upper.values.find(v);
    if (it == upper.values.end()) throw SolverError("traces cover different nodes");
    if (value > it->second) throw SolverError("comparison needs trace1 <= trace2 nodewise");
  }
  const auto s1 = solve_dirichlet(mesh, lower, config);
  const auto s2 = solve_dirichlet(mesh, upper, config);
  ComparisonReport r;
  r.converged = s1.converged && s2.converged;
  if (!r.converged) throw SolverError("comparison solve did not converge: " + s1.message + s2.message);
  r.max_difference = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < s1.u.size(); ++v) r.max_difference = std::max(r.max_difference, s1.u[v] - s2.u[v]);
  r.tolerance = comparison_tol + config.grad_tol;
  r.pass = r.max_difference <= r.tolerance;
  return r;
}

}  // namespace comblab
