#pragma once

// Dirichlet problem for the p-Laplacian on a SlitMesh: minimise the
// regularised p-energy  sum_T area(T) (eps^2 + |grad u|^2)^(p/2) / p  over
// piecewise-linear fields with fixed boundary values, by damped Newton with
// eps continuation.

#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comblab/mesh.hpp"

namespace comblab {

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct PSolverConfig {
  double p = 2.0;
  std::vector<double> eps_schedule = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  double grad_tol = 1e-10;
  int max_newton_iters = 50;
  double ls_shrink = 0.5;
  double ls_sufficient_decrease = 1e-4;
  int ls_max_steps = 50;

  /// Throws SolverError on invalid settings; returns warnings (p outside (1.1, 10)).
  std::vector<std::string> validate() const;
};

/// Dirichlet values keyed by vertex index; each vertex carries its own sheet.
struct BoundaryTrace {
  std::map<int, double> values;
  std::string descriptor;

  static BoundaryTrace from_function(const SlitMesh& mesh,
                                     const std::function<double(const BoundaryNode&)>& f,
                                     std::string descriptor = {});
  /// Throws SolverError unless every boundary node has exactly one finite value.
  void check_complete(const SlitMesh& mesh) const;
  double min() const;
  double max() const;
};

struct Solution {
  std::vector<double> u;
  double energy = 0.0;
  double residual = 0.0;
  double final_eps = 0.0;
  std::vector<int> iterations;  // per eps stage
  int descent_fallbacks = 0;
  /// Largest energy increase of any accepted step (<= rounding when healthy).
  double max_energy_increase = 0.0;
  bool converged = false;
  std::string message;
};

struct EnergyGradient {
  double energy = 0.0;
  std::vector<double> gradient;
};

/// Per-triangle P1 geometry, reused across evaluations.
class PEnergy {
public:
  explicit PEnergy(const SlitMesh& mesh);

  double energy(std::span<const double> u, double p, double eps) const;
  EnergyGradient energy_gradient(std::span<const double> u, double p, double eps) const;

  std::size_t num_vertices() const { return num_vertices_; }
  std::size_t num_triangles() const { return area_.size(); }
  double area(std::size_t t) const { return area_[t]; }
  /// Gradient of the hat function of local vertex k in triangle t.
  const std::array<double, 2>& basis_gradient(std::size_t t, int k) const {
    return grad_[t][static_cast<std::size_t>(k)];
  }
  const std::vector<Triangle>& triangles() const { return tris_; }

  std::array<double, 2> field_gradient(std::size_t t, std::span<const double> u) const;

private:
  std::size_t num_vertices_ = 0;
  std::vector<Triangle> tris_;
  std::vector<double> area_;
  std::vector<std::array<std::array<double, 2>, 3>> grad_;
};

EnergyGradient assemble_energy_gradient(const SlitMesh& mesh, std::span<const double> u, double p,
                                        double eps);

/// Euclidean norm of the gradient restricted to non-boundary vertices.
double residual_norm(const SlitMesh& mesh, std::span<const double> u, double p, double eps);

Solution solve_dirichlet(const SlitMesh& mesh, const BoundaryTrace& trace,
                         const PSolverConfig& config);

struct ComparisonReport {
  double max_difference = 0.0;  // max over vertices of u1 - u2
  double tolerance = 0.0;
  bool converged = false;
  bool pass = false;
};

ComparisonReport check_discrete_comparison(const SlitMesh& mesh, const BoundaryTrace& lower,
                                           const BoundaryTrace& upper, const PSolverConfig& config,
                                           double comparison_tol = 1e-7);

}  // namespace comblab
