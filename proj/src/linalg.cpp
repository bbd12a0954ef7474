#include "lopashka/linalg.hpp"

#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "lopashka/error.hpp"

namespace lopashka {

namespace {

// Plane rotation [c s; -conj(s) c] annihilating g in (f, g).
void givens(Complex f, Complex g, double& c, Complex& s) {
  const double af = std::abs(f);
  const double ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
  } else {
    const double norm = std::hypot(af, ag);
    c = af / norm;
    s = (f / af) * std::conj(g) / norm;
  }
}

// Swap the diagonal entries k and k+1 of the triangular factor.
void swap_adjacent(CMatrix& T, CMatrix& U, int k) {
  const int n = static_cast<int>(T.rows());
  const Complex t11 = T(k, k);
  const Complex t22 = T(k + 1, k + 1);
  double c;
  Complex s;
  givens(T(k, k + 1), t22 - t11, c, s);
  for (int col = k + 2; col < n; ++col) {
    const Complex x = T(k, col);
    const Complex y = T(k + 1, col);
    T(k, col) = c * x + s * y;
    T(k + 1, col) = c * y - std::conj(s) * x;
  }
  for (int row = 0; row < k; ++row) {
    const Complex x = T(row, k);
    const Complex y = T(row, k + 1);
    T(row, k) = c * x + std::conj(s) * y;
    T(row, k + 1) = c * y - s * x;
  }
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  for (int row = 0; row < n; ++row) {
    const Complex x = U(row, k);
    const Complex y = U(row, k + 1);
    U(row, k) = c * x + std::conj(s) * y;
    U(row, k + 1) = c * y - s * x;
  }
}

}  // namespace

OrderedSchur ordered_schur(const CMatrix& M, const std::function<bool(Complex)>& select) {
  if (M.rows() != M.cols()) throw Error(ErrorKind::Dimension, "ordered_schur: matrix not square");
  Eigen::ComplexSchur<CMatrix> cs(M);
  if (cs.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Schur decomposition failed");
  OrderedSchur out{cs.matrixU(), cs.matrixT(), 0};
  const int n = static_cast<int>(M.rows());
  for (int i = 0; i < n; ++i) {
    if (!select(out.T(i, i))) continue;
    for (int k = i - 1; k >= out.selected; --k) swap_adjacent(out.T, out.U, k);
    ++out.selected;
  }
  // Clear rounding below the diagonal.
  for (int col = 0; col < n; ++col) {
    for (int row = col + 1; row < n; ++row) out.T(row, col) = 0.0;
  }
  return out;
}

CMatrix solve_triangular_sylvester(const CMatrix& T11, const CMatrix& T22, const CMatrix& C) {
  const int k = static_cast<int>(T11.rows());
  const int l = static_cast<int>(T22.rows());
  CMatrix R(k, l);
  for (int j = 0; j < l; ++j) {
    CVector rhs = C.col(j);
    for (int p = 0; p < j; ++p) rhs += R.col(p) * T22(p, j);
    CMatrix shifted = T11;
    shifted.diagonal().array() -= T22(j, j);
    R.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return R;
}

CMatrix leading_spectral_projection(const OrderedSchur& schur) {
  const int n = static_cast<int>(schur.T.rows());
  const int k = schur.selected;
  CMatrix block = CMatrix::Zero(n, n);
  block.topLeftCorner(k, k).setIdentity();
  if (k > 0 && k < n) {
    block.topRightCorner(k, n - k) = solve_triangular_sylvester(
        schur.T.topLeftCorner(k, k), schur.T.bottomRightCorner(n - k, n - k),
        schur.T.topRightCorner(k, n - k));
  }
  return schur.U * block * schur.U.adjoint();
}

double condition_number(const CMatrix& A) {
  if (A.size() == 0) return 1.0;
  Eigen::JacobiSVD<CMatrix> svd(A);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

CMatrix matrix_sign(const CMatrix& M, int max_iter, double tol) {
  CMatrix X = M;
  const int n = static_cast<int>(M.rows());
  for (int it = 0; it < max_iter; ++it) {
    Eigen::PartialPivLU<CMatrix> lu(X);
    const CMatrix Xinv = lu.inverse();
    // Determinant scaling accelerates the early iterations.
    const double det_abs = std::abs(lu.determinant());
    double mu = 1.0;
    if (det_abs > 0.0 && std::isfinite(det_abs) && it < 20) mu = std::pow(det_abs, -1.0 / n);
    const CMatrix next = 0.5 * (mu * X + Xinv / mu);
    const double change = (next - X).norm();
    X = next;
    if (change <= tol * X.norm()) return X;
  }
  const double residual = (X * X - CMatrix::Identity(n, n)).norm();
  if (residual > 1e-8 * n) throw Error(ErrorKind::Numerical, "matrix sign iteration did not converge");
  return X;
}

void phi_functions(Complex z, int count, Complex* out) {
  if (count <= 0) return;
  if (std::abs(z) < 2.0) {
    // Taylor series, accurate to machine precision for |z| < 2.
    for (int j = 0; j < count; ++j) {
      Complex sum = 0.0;
      double fact = 1.0;
      for (int i = 2; i <= j; ++i) fact *= i;
      Complex zp = 1.0;
      double denom = fact;  // (i+j)!
      for (int i = 0; i < 60; ++i) {
        const Complex term = zp / denom;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        zp *= z;
        denom *= (i + j + 1);
      }
      out[j] = sum;
    }
    return;
  }
  out[0] = std::exp(z);
  double fact = 1.0;  // j!
  for (int j = 0; j + 1 < count; ++j) {
    out[j + 1] = (out[j] - 1.0 / fact) / z;
    fact *= (j + 1);
  }
}

CMatrix matrix_exp(const CMatrix& A) { return A.exp(); }

CMatrix orthonormal_range(const CMatrix& A, double rel_tol) {
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  const double threshold = s.size() ? rel_tol * s(0) : 0.0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

}  // namespace lopashka
