#pragma once

#include <string>
#include <vector>

#include "lopashka/grid.hpp"
#include "lopashka/symbol.hpp"

namespace lopashka {

// p_{k,nu}^n(r) = int_0^inf s^{n-2} (1 + s)^{-(k-1-nu)} e^{-(s+1) r} ds for n >= 2, r > 0.
// `tol` is the requested relative quadrature tolerance.
double p_kernel(int k, int nu, int n, double r, double tol = 1e-13);
// log p_{k,nu}^n(r), finite even where p underflows.
double log_p_kernel(int k, int nu, int n, double r, double tol = 1e-13);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // |lhs - rhs| / |rhs|
};

// int_0^inf p_{k,nu}^n(c (y + r)) r^{n-1} dr  against  (n-1)! / c^n p_{k+n,nu}^n(c y).
IdentityCheck lemma_integral_identity_check(int k, int nu, int n, double c, double y);

// min over j <= 3 and sample points of (-1)^j Delta_h^j p(r) with h = r / 10,
// on a geometric grid of r in [r_min, r_max].
double complete_monotonicity_margin(int k, int nu, int n, double r_min = 0.01, double r_max = 50.0,
                                    int points = 40);

// D^alpha of the boundary kernel, F^{-1}[ rho^{-2m} e^{i rho A0 y} M(b, sigma) ] on a grid,
// as a (2mN) x D matrix per point (D = total data dimension).
struct KernelField {
  Complex lambda;
  int m = 1;
  int N = 1;
  int rows = 0;
  int cols = 0;
  MultiIndex alpha;
  Grid grid;
  std::vector<Complex> values;  // [t][iy][row][col]

  CMatrix at(std::size_t t, int iy) const;
  double norm_at(std::size_t t, int iy) const;  // Frobenius norm
};

// alpha empty means no derivative.  Tangential derivatives multiply by xi'^alpha',
// normal ones by (rho A0)^{alpha_y}.
KernelField compute_kernel_field(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                                 const Grid& grid, const MultiIndex& alpha = {});

// Torus and normal extent adapted to |lambda|^{-1/2m}.
Grid kernel_grid(int n, int m, Complex lambda, int tangential_points = 256, int normal_points = 64);

// Boundary-layer states v(x', y) = F^{-1}[ Q e^{rho T11 y} S^{-1} (g_hat / rho^k) ] for slot data g.
Field spectral_boundary_states(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                               const Grid& grid, const std::vector<TraceField>& g);

// Direct convolution sum_z K(x' - z, y) h(z) dz with slot data h mapped to stacked coordinates.
Field convolve_kernel(const KernelField& kernel, const BoundaryOperatorSpec& spec, const std::vector<TraceField>& h);

struct DecayFit {
  bool feasible = false;
  double M = 0.0;
  double c = 0.0;
  double coverage = 0.0;  // fraction of grid points where the bound holds
  double exponent = 0.0;  // (n - 2m + |alpha|) / 2m
  int points = 0;
  std::string note;
  // Envelope of |K| / |lambda|^exponent against the scaled distance r~ = |lambda|^{1/2m}(|x'| + y).
  std::vector<double> envelope_r;
  std::vector<double> envelope_value;
};

struct DecayFitOptions {
  double c_min = 0.05;
  double c_max = 5.0;
  double quantile = 0.99;
  double noise_floor = 1e-11;  // relative to the maximum; smaller values count as satisfied
  double M_max = 1e6;
  double fit_r_min = 1.0;  // envelope bins below this scaled distance do not enter the objective
};

// Fit of |D^alpha K(x', y)| <= M |lambda|^{(n-2m+|alpha|)/2m} p_{2m,|alpha|-1}^{n+1}(c r~).
DecayFit verify_kernel_decay(const KernelField& field, const DecayFitOptions& options = {});

}  // namespace lopashka
