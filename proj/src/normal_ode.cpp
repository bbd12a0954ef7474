#include "lopashka/normal_ode.hpp"

#include <algorithm>
#include <cmath>

#include "lopashka/error.hpp"
#include "lopashka/linalg.hpp"

namespace lopashka {

namespace {

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0};

}  // namespace

ElementInterpolation::ElementInterpolation(const NormalGrid& grid) {
  const int ny = grid.size();
  if (ny < kNodes) throw Error(ErrorKind::Domain, "normal grid too coarse for element interpolation");
  // Binomial matrix: coefficients of p(1 - tau) from those of p(tau).
  RMatrix rev = RMatrix::Zero(kNodes, kNodes);
  for (int j = 0; j < kNodes; ++j) {
    // (1 - tau)^j = sum_i C(j, i) (-tau)^i
    double binom = 1.0;
    for (int i = 0; i <= j; ++i) {
      rev(i, j) = binom * ((i % 2) ? -1.0 : 1.0);
      binom = binom * (j - i) / (i + 1);
    }
  }
  for (int e = 0; e + 1 < ny; ++e) {
    const int s = std::clamp(e - 2, 0, ny - kNodes);
    const double h = grid.y[e + 1] - grid.y[e];
    RMatrix vander(kNodes, kNodes);
    for (int i = 0; i < kNodes; ++i) {
      const double tau = (grid.y[s + i] - grid.y[e]) / h;
      double p = 1.0;
      for (int j = 0; j < kNodes; ++j) {
        vander(i, j) = p;
        p *= tau;
      }
    }
    RMatrix fwd = vander.fullPivLu().inverse();
    start_.push_back(s);
    width_.push_back(h);
    reversed_.push_back(rev * fwd);
    forward_.push_back(std::move(fwd));
  }
}

std::vector<double> interpolant_weights(const NormalGrid& grid) {
  const ElementInterpolation interp(grid);
  std::vector<double> w(grid.size(), 0.0);
  for (int e = 0; e < interp.elements(); ++e) {
    const RMatrix& fwd = interp.forward(e);
    for (int q = 0; q < ElementInterpolation::kNodes; ++q) {
      double sum = 0.0;
      for (int j = 0; j < ElementInterpolation::kNodes; ++j) sum += fwd(j, q) / (j + 1);
      w[interp.stencil_start(e) + q] += interp.width(e) * sum;
    }
  }
  return w;
}

std::vector<CMatrix> matrix_phi(const CMatrix& A, int count) {
  const int k = static_cast<int>(A.rows());
  CMatrix aug = CMatrix::Zero(k * count, k * count);
  aug.topLeftCorner(k, k) = A;
  for (int j = 0; j + 1 < count; ++j) aug.block(j * k, (j + 1) * k, k, k).setIdentity();
  const CMatrix E = matrix_exp(aug);
  std::vector<CMatrix> out;
  for (int j = 0; j < count; ++j) out.push_back(E.block(0, j * k, k, k));
  return out;
}

namespace {

// Diagonalizing or block-diagonalizing change of variables v = V z, with the
// Re < 0 block first.
struct Decoupling {
  CMatrix V;
  CMatrix V_inv;
  CMatrix K;  // block diagonal (diagonal in the eigenvector route)
  int stable = 0;
  bool diagonal = true;
};

Decoupling decouple(const CMatrix& M, double condition_limit) {
  const int dim = static_cast<int>(M.rows());
  Decoupling d;
  Eigen::ComplexEigenSolver<CMatrix> es(M);
  if (es.info() == Eigen::Success) {
    std::vector<int> order(dim);
    for (int i = 0; i < dim; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return (es.eigenvalues()(a).real() < 0.0) > (es.eigenvalues()(b).real() < 0.0);
    });
    d.V.resize(dim, dim);
    d.K = CMatrix::Zero(dim, dim);
    for (int i = 0; i < dim; ++i) {
      d.V.col(i) = es.eigenvectors().col(order[i]);
      d.K(i, i) = es.eigenvalues()(order[i]);
      if (d.K(i, i).real() < 0.0) ++d.stable;
    }
    if (condition_number(d.V) <= condition_limit) {
      d.V_inv = d.V.partialPivLu().inverse();
      return d;
    }
  }
  // Schur route: M = U T U^H, then T = Y diag(T11, T22) Y^{-1} with Y = [[I, R], [0, I]].
  const OrderedSchur schur = ordered_schur(M, [](Complex z) { return z.real() < 0.0; });
  const int k = schur.selected;
  const CMatrix T11 = schur.T.topLeftCorner(k, k);
  const CMatrix T22 = schur.T.bottomRightCorner(dim - k, dim - k);
  CMatrix Y = CMatrix::Identity(dim, dim);
  CMatrix Y_inv = CMatrix::Identity(dim, dim);
  if (k > 0 && k < dim) {
    const CMatrix R = solve_triangular_sylvester(T11, T22, -schur.T.topRightCorner(k, dim - k));
    Y.topRightCorner(k, dim - k) = R;
    Y_inv.topRightCorner(k, dim - k) = -R;
  }
  d.V = schur.U * Y;
  d.V_inv = Y_inv * schur.U.adjoint();
  d.K = CMatrix::Zero(dim, dim);
  d.K.topLeftCorner(k, k) = T11;
  d.K.bottomRightCorner(dim - k, dim - k) = T22;
  d.stable = k;
  d.diagonal = false;
  return d;
}

constexpr int kTerms = ElementInterpolation::kNodes;

// One block of z' = K z + H(y), K = diag entries or a triangular block.
// Forward sweep from z(0) = 0 when `forward`, backward from z(Y) = 0 otherwise.
void sweep_block(const CMatrix& K, bool diagonal, bool forward, const CMatrix& H, const NormalGrid& grid,
                 const ElementInterpolation& interp, CMatrix& Z) {
  const int k = static_cast<int>(K.rows());
  const int ny = grid.size();
  Z = CMatrix::Zero(ny, k);
  if (k == 0) return;
  Complex phi[kTerms + 1];
  CMatrix stencil(kTerms, k);
  for (int step = 0; step + 1 < ny; ++step) {
    const int e = forward ? step : ny - 2 - step;
    const double h = interp.width(e);
    const int s = interp.stencil_start(e);
    for (int i = 0; i < kTerms; ++i) stencil.row(i) = H.row(s + i);
    const RMatrix& map = forward ? interp.forward(e) : interp.reversed(e);
    const CMatrix C = map.cast<Complex>() * stencil;  // kTerms x k coefficients
    const int from = forward ? e : e + 1;
    const int to = forward ? e + 1 : e;
    const double sign = forward ? 1.0 : -1.0;
    if (diagonal) {
      for (int q = 0; q < k; ++q) {
        phi_functions(sign * K(q, q) * h, kTerms + 1, phi);
        Complex acc = 0.0;
        for (int j = 0; j < kTerms; ++j) acc += C(j, q) * kFactorial[j] * phi[j + 1];
        Z(to, q) = phi[0] * Z(from, q) + sign * h * acc;
      }
    } else {
      const auto phis = matrix_phi(sign * h * K, kTerms + 1);
      CVector acc = CVector::Zero(k);
      for (int j = 0; j < kTerms; ++j) acc += kFactorial[j] * (phis[j + 1] * C.row(j).transpose());
      Z.row(to) = (phis[0] * Z.row(from).transpose() + sign * h * acc).transpose();
    }
  }
}

}  // namespace

ForcedSolve solve_forced_line(const CMatrix& M, const CMatrix& G, const NormalGrid& grid,
                              const ElementInterpolation& interp, double condition_limit) {
  const int dim = static_cast<int>(M.rows());
  const Decoupling d = decouple(M, condition_limit);
  const CMatrix H = G * d.V_inv.transpose();  // modal forcing, ny x dim
  const int ks = d.stable;
  CMatrix Zs, Zu;
  sweep_block(d.K.topLeftCorner(ks, ks), d.diagonal, true, H.leftCols(ks), grid, interp, Zs);
  sweep_block(d.K.bottomRightCorner(dim - ks, dim - ks), d.diagonal, false, H.rightCols(dim - ks), grid,
              interp, Zu);
  CMatrix Z(grid.size(), dim);
  Z.leftCols(ks) = Zs;
  Z.rightCols(dim - ks) = Zu;
  ForcedSolve out;
  out.states = Z * d.V.transpose();
  out.fallback = !d.diagonal;
  return out;
}

std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int order) {
  const int n = static_cast<int>(nodes.size());
  if (order >= n) throw Error(ErrorKind::Domain, "fornberg_weights: stencil too small for the order");
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int j = 0; j < n; ++j) w[j] = c[j][order];
  return w;
}

}  // namespace lopashka
