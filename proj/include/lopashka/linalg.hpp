#pragma once

#include <functional>

#include "lopashka/types.hpp"

namespace lopashka {

// Complex Schur form M = U T U^H with the eigenvalues selected by `select`
// moved to the leading diagonal positions (stable Givens swaps).
struct OrderedSchur {
  CMatrix U;
  CMatrix T;
  int selected = 0;
};

OrderedSchur ordered_schur(const CMatrix& M, const std::function<bool(Complex)>& select);

// Solves T11 R - R T22 = C for upper-triangular T11, T22 with disjoint spectra.
CMatrix solve_triangular_sylvester(const CMatrix& T11, const CMatrix& T22, const CMatrix& C);

// Spectral projection onto the invariant subspace of the leading `k` Schur
// eigenvalues, expressed in the original coordinates.
CMatrix leading_spectral_projection(const OrderedSchur& schur);

// 2-norm condition number via singular values (infinity if singular).
double condition_number(const CMatrix& A);

// Matrix sign function by scaled Newton iteration.
CMatrix matrix_sign(const CMatrix& M, int max_iter = 100, double tol = 1e-14);

// phi_j(z) = sum_i z^i / (i+j)! for j = 0..count-1 (phi_0 = exp).
void phi_functions(Complex z, int count, Complex* out);

// exp(A) for a square complex matrix.
CMatrix matrix_exp(const CMatrix& A);

// Orthonormal basis of the column space (numerical rank by relative threshold).
CMatrix orthonormal_range(const CMatrix& A, double rel_tol = 1e-10);

}  // namespace lopashka
