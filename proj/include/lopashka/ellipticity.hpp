#pragma once

#include <vector>

#include "lopashka/symbol.hpp"

namespace lopashka {

// Deterministic point sets on the unit sphere S^{dim-1}: uniform angles for
// dim = 2, a Fibonacci lattice for dim = 3, tensor products of angles otherwise.
std::vector<std::vector<double>> sphere_points(int dim, int count);

struct EllipticityReport {
  bool is_even_order = false;
  bool a0_invertible = false;
  double a0_condition = 0.0;
  double a0_min_singular = 0.0;
  bool elliptic = false;
  // Supremum of |arg| of the sampled eigenvalues; pi when not elliptic.
  double angle = 0.0;
  std::vector<double> worst_xi;
  int samples = 0;
  // angle(samples) - angle(samples / 2): a refinement indicator, not a bound.
  double refinement_delta = 0.0;
};

EllipticityReport ellipticity_angle(const InteriorSymbol& sym, int sphere_samples);

// Same analysis on an explicit list of directions (used for nested refinement).
EllipticityReport ellipticity_angle_on(const InteriorSymbol& sym,
                                       const std::vector<std::vector<double>>& directions);

// sup |arg mu| over eigenvalues mu of A(xi + i eta), |xi| = 1, |eta| = eps.
double check_complex_perturbation(const InteriorSymbol& sym, double eps, int samples);

}  // namespace lopashka
