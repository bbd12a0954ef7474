#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lopashka/types.hpp"

namespace lopashka {

// Finite operator family T_nu acting on the discrete space l^p(C^d).
struct OperatorFamily {
  std::vector<CMatrix> members;
  std::vector<Complex> index;  // parameter value of each member (informational)

  int dim() const { return members.empty() ? 0 : static_cast<int>(members.front().rows()); }
};

OperatorFamily make_family(const std::function<CMatrix(Complex)>& generator,
                           const std::vector<Complex>& index_set);

struct RBoundOptions {
  double p = 2.0;
  int trials = 100;
  int subset_size = 4;
  int iterations = 30;
  int sampled_signs = 256;  // sign patterns used when subset_size > 12
  std::uint64_t seed = 0;
};

// Lower-bound semantics: both numbers are attained by explicit test vectors.
struct RBoundEstimate {
  double p = 2.0;
  double estimate = 0.0;           // best observed Rademacher ratio
  double sup_norm = 0.0;           // best observed uniform operator norm
  int trials = 0;
  double confidence_spread = 0.0;  // standard deviation of per-trial best ratios
};

RBoundEstimate estimate_rbound(const OperatorFamily& family, const RBoundOptions& options = {});

// Sign patterns (+-1) with the first sign fixed to +1: all 2^{k-1} for k <= 12.
RMatrix sign_patterns(int k, int sampled, std::uint64_t seed);

// (E |sum eps T_nu x_nu|_p^p)^{1/p} / (E |sum eps x_nu|_p^p)^{1/p}; rows of X are the x_nu.
double rademacher_ratio(const std::vector<const CMatrix*>& ops, const CMatrix& X, double p,
                        const RMatrix& signs);

// l^p -> l^p operator norm (exact for p = 2, power-method lower bound otherwise).
double operator_norm_p(const CMatrix& A, double p, int iterations = 200);

struct NeumannCheck {
  double rho = 0.0;
  double bound = 0.0;
  double resolvent_estimate = 0.0;
  bool passes = false;
};

// Compares the R-estimate of (I - T)^{-1} with 1/(1 - rho) (1 + tol).  If
// rho_known is positive it is used as the R-bound of the family, otherwise the
// estimate of the family is used.
NeumannCheck neumann_rbound_check(const OperatorFamily& family, const RBoundOptions& options,
                                  double tol = 0.05, double rho_known = -1.0);

struct SectorCheck {
  double C = 0.0;                    // R-estimate of {T(lambda)} on the wider sector
  double derivative_estimate = 0.0;  // R-estimate of {lambda T'(lambda)} on the narrower sector
  double bound = 0.0;                // C / sin^2(phi' - phi)
  double fd_disagreement = 0.0;      // step-halving disagreement of the derivative
  bool fd_stable = false;
  bool passes = false;
};

// T is holomorphic on the sector |arg lambda| < pi - phi; phi < phi_prime < pi.
SectorCheck sector_derivative_check(const std::function<CMatrix(Complex)>& T, double phi,
                                     double phi_prime, const RBoundOptions& options,
                                     int moduli = 25, int angles = 9, double tol = 0.05);

// sup |xi^alpha d^alpha m(xi)| for alpha in {0,1}^n over a tensor grid of
// +- log-spaced coordinates.
struct MikhlinGrid {
  double min_abs = 1e-3;
  double max_abs = 1e3;
  int points_per_sign = 25;
  double relative_step = 1e-4;
};

struct MikhlinTable {
  std::vector<std::vector<int>> alphas;
  std::vector<double> sups;
};

MikhlinTable mikhlin_symbol_check(const std::function<Complex(std::span<const double>)>& m, int n,
                                  const MikhlinGrid& grid = {});

// Uniformity of the resolvent symbols mu^k (mu + (lambda + |xi|^{2m})^{1/2m})^{-k}.
struct ResolventSymbolReport {
  std::vector<std::vector<int>> alphas;
  // sups[a][k-1] = sup over mu and xi for multi-index a and power k.
  std::vector<std::vector<double>> sups;
  std::vector<double> spread;  // max_k / min_k per alpha (alpha != 0 with vanishing sups excluded)
  double max_spread = 0.0;
  bool passes = false;
};

ResolventSymbolReport resolvent_symbol_uniformity(int m, Complex lambda, int n, int kmax,
                                                  const std::vector<double>& mus,
                                                  const MikhlinGrid& grid = {},
                                                  double spread_limit = 2.0);

struct CombinatorialReport {
  int samples = 0;
  int violations = 0;
  double worst_log_margin = 0.0;  // max of log(lhs) - log(rhs)
};

// a^M b^N <= M! N! / (M+N)! (a+b)^{M+N}, evaluated in the log domain.
bool combinatorial_inequality_holds(double a, double b, int M, int N, double* log_margin = nullptr);
CombinatorialReport combinatorial_inequality_test(int samples, std::uint64_t seed = 0);

// Khintchine constants (Haagerup) for real Rademacher sums.
double khintchine_lower(double p);
double khintchine_upper(double p);

struct SquareFunctionCheck {
  double rademacher_ratio = 0.0;
  double square_ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passes = false;
};

// Real family and real data: the Rademacher ratio lies within the Khintchine
// window around the square-function ratio.
SquareFunctionCheck square_function_check(const std::vector<RMatrix>& family, double p,
                                          std::uint64_t seed = 0, int subset_size = 6);

}  // namespace lopashka
