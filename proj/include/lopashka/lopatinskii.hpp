#pragma once

#include <string>
#include <vector>

#include "lopashka/companion.hpp"

namespace lopashka {

// Data-to-trace map of the scaled half-space ODE problem.
struct SolutionMap {
  CMatrix M;        // 2mN x D, D = total data dimension (= mN when square)
  CMatrix stacked;  // D x mN matrix [W^H B0 Q]
  double condition = 0.0;
};

SolutionMap build_solution_map(const CompanionSystem& cs, const std::vector<BoundaryRowMatrix>& rows,
                               const SpectralSplit& split, double kappa_max = tol::kKappaMax);

struct LsSweepOptions {
  int arc_points = 64;
  int directions = 32;
  int radii = 16;
  double kappa_max = tol::kKappaMax;
  bool oracle_check = true;
};

struct LsVerdict {
  bool passes = false;
  std::string failure;  // empty, or the first failure kind encountered
  double worst_condition = 0.0;
  Complex worst_lambda;
  std::vector<double> worst_xi;
  int sweep_size = 0;
  int failures = 0;
  double M_norm_sup = 0.0;
  double oracle_max_error = 0.0;
};

// Sweeps the compact set |sigma| + |b|^{2m} = 1, |arg sigma| <= pi - phi.
LsVerdict ls_sweep(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, double phi,
                   const LsSweepOptions& options = {});

struct OdeOracleResult {
  CVector trace;                 // v(0) in scaled companion coordinates
  std::vector<double> y;         // sample positions (unscaled)
  std::vector<CVector> profile;  // u(y) = first block of v(y)
  double boundary_residual = 0.0;
  double decay_ratio = 0.0;      // |v(y_far)| / |v(0)| with y_far = 3 / (rho gap)
};

// Independent solution of lambda u + A(xi', D_y) u = 0 with the boundary rows:
// sign-function projections, least squares and the full matrix exponential.
OdeOracleResult ode_oracle(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                           std::span<const double> xi_prime, const std::vector<CVector>& row_data,
                           const std::vector<double>& y_samples);

// Oracle trace for stacked, rho-scaled slot data at a compact-set point.
CVector oracle_trace(const CompanionSystem& cs, const std::vector<BoundaryRowMatrix>& rows,
                     const CVector& stacked_data);

// Divide each slot of stacked data by rho^k.
CVector scale_slot_data(const BoundaryOperatorSpec& spec, const CVector& stacked, double rho);

}  // namespace lopashka
