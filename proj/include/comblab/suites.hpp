#pragma once

// Self-checks of the discretisation used by the validation and comparison
// scenarios: exact reproduction of linear data, the radial p-harmonic ring
// solution, gradient vs central differences and the discrete comparison
// principle on random ordered traces.

#include <cstdint>
#include <string>
#include <vector>

#include "comblab/solver.hpp"

namespace comblab {

struct SuiteCase {
  std::string label;
  double p = 2.0;
  double value = 0.0;      // the measured error / difference
  double tolerance = 0.0;
  bool pass = false;
};

struct SuiteResult {
  std::string name;
  std::vector<SuiteCase> cases;
  double worst = 0.0;
  bool pass = true;
};

/// Trace x on a uniform rectangle mesh with n cells per side; max nodal error.
SuiteResult linear_exactness_suite(const std::vector<double>& ps, int n = 16, double tol = 1e-6);

/// r^((p-2)/(p-1)), the radial p-harmonic profile (p != 2).
double radial_profile(double r, double p);

/// Ring 0.5 <= r <= 1 with the radial trace; L-infinity nodal error at each h.
struct RadialRow {
  double p = 2.0;
  double h = 0.0;
  std::size_t vertices = 0;
  double error = 0.0;
};
struct RadialResult {
  std::vector<RadialRow> rows;
  std::vector<std::pair<double, double>> orders;  // (p, observed order between the last two h)
  bool pass = true;
};
RadialResult radial_suite(const std::vector<double>& ps, const std::vector<double>& hs,
                          double error_tol = 5e-2, double min_order = 0.9);

/// Random small meshes (<= 200 vertices), random u, p and eps.
SuiteResult gradient_check_suite(int cases, std::uint64_t seed, double tol = 1e-6);

/// Random ordered trace pairs on the k=1 truncated comb.
SuiteResult comparison_suite(int cases, const std::vector<double>& ps, std::uint64_t seed,
                             double tol = 1e-6, double h = 1.0 / 16.0);

}  // namespace comblab
