#pragma once

#include <span>
#include <vector>

#include "lopashka/symbol.hpp"
#include "lopashka/tolerances.hpp"

namespace lopashka {

// Homogeneity-reduced variables: lambda = sigma rho^{2m}, xi' = rho b with
// rho = (|lambda| + |xi'|^{2m})^{1/2m}.
struct ScaledVariables {
  double rho = 0.0;
  std::vector<double> b;
  Complex sigma;
};

ScaledVariables scale_variables(Complex lambda, std::span<const double> xi_prime, int m);

// First-order reduction of lambda + A(xi', D_y) on E^{2m}.
struct CompanionSystem {
  CMatrix A0;
  std::vector<Complex> b;
  Complex sigma;
  int m = 0;
  int N = 0;
  CMatrix a0_inverse;  // inverse of the xi_{n+1}^{2m} coefficient
};

// Splitting of the spectrum of i A0 at the imaginary axis.
struct SpectralSplit {
  std::vector<Complex> eig_plus;
  std::vector<Complex> eig_minus;
  CMatrix P_plus;
  CMatrix P_minus;
  double gap = 0.0;
  // Schur form i A0 = U T U^H with the Re < 0 eigenvalues leading.
  CMatrix U;
  CMatrix T;
  int stable_dim = 0;

  // Orthonormal basis of ran(P_minus).
  CMatrix stable_basis() const { return U.leftCols(stable_dim); }
  // Restriction of i A0 to ran(P_minus) in that basis.
  CMatrix stable_block() const { return T.topLeftCorner(stable_dim, stable_dim); }
};

CompanionSystem build_companion(const InteriorSymbol& sym, std::span<const Complex> b, Complex sigma);

SpectralSplit spectral_split(const CompanionSystem& cs, double gap_min = tol::kGapMin);

// Scaled boundary row B0_{j,k}(b): an N x 2mN block row
// (tilde b_{j,k,k}(b) P, ..., tilde b_{j,k,0} P, 0, ..., 0).
struct BoundaryRowMatrix {
  DataSlot slot;
  CMatrix row;    // N x 2mN
  CMatrix basis;  // orthonormal basis of ran(P_{j,k}), N x rank
};

std::vector<BoundaryRowMatrix> boundary_rows(const BoundaryOperatorSpec& spec, std::span<const Complex> b);

// |det(eta - A0) - det(a0)^{-1} det(sigma + A(b, eta))| / scale.
double characteristic_residual(const InteriorSymbol& sym, const CompanionSystem& cs, Complex eta);

// Least-squares fit of |exp(i A0 y) P_minus| <= M exp(-c y) on y in [0, y_max].
struct SemigroupDecay {
  double M = 0.0;
  double c = 0.0;
  std::vector<double> y;
  std::vector<double> norms;
};

SemigroupDecay fit_semigroup_decay(const CompanionSystem& cs, const SpectralSplit& split,
                                   double y_max = 10.0, int samples = 41);

// Stable projection by the matrix sign function of i A0 (independent of the Schur route).
CMatrix stable_projection_by_sign(const CompanionSystem& cs);

}  // namespace lopashka
