#include "lopashka/companion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lopashka/error.hpp"
#include "lopashka/linalg.hpp"

namespace lopashka {

ScaledVariables scale_variables(Complex lambda, std::span<const double> xi_prime, int m) {
  double xi2 = 0.0;
  for (double x : xi_prime) xi2 += x * x;
  const double xi_abs = std::sqrt(xi2);
  const double total = std::abs(lambda) + std::pow(xi_abs, 2 * m);
  if (!(total > 0.0)) throw Error(ErrorKind::Domain, "scale_variables: (lambda, xi') = (0, 0)");
  ScaledVariables s;
  s.rho = std::pow(total, 1.0 / (2 * m));
  s.sigma = lambda / std::pow(s.rho, 2 * m);
  s.b.reserve(xi_prime.size());
  for (double x : xi_prime) s.b.push_back(x / s.rho);
  return s;
}

CompanionSystem build_companion(const InteriorSymbol& sym, std::span<const Complex> b, Complex sigma) {
  const int m = sym.half_order();
  const int N = sym.components();
  const int order = 2 * m;
  if (static_cast<int>(b.size()) != sym.tangential_dim()) {
    throw Error(ErrorKind::Dimension, "build_companion: b has wrong length");
  }
  const CMatrix& a0 = sym.leading_normal();
  Eigen::FullPivLU<CMatrix> lu(a0);
  if (!lu.isInvertible() || condition_number(a0) > 1e12) {
    throw Error(ErrorKind::Singular, "leading normal coefficient a0 is not invertible");
  }
  CompanionSystem cs;
  cs.m = m;
  cs.N = N;
  cs.sigma = sigma;
  cs.b.assign(b.begin(), b.end());
  cs.a0_inverse = lu.inverse();
  cs.A0 = CMatrix::Zero(order * N, order * N);
  for (int blk = 0; blk + 1 < order; ++blk) {
    cs.A0.block(blk * N, (blk + 1) * N, N, N).setIdentity();
  }
  // Last block row (c_{2m}, ..., c_1): block column p carries c_{2m-p}.
  for (int j = 1; j <= order; ++j) {
    CMatrix part = sym.tangential_part(j, b);
    if (j == order) part += sigma * CMatrix::Identity(N, N);
    cs.A0.block((order - 1) * N, (order - j) * N, N, N) = -cs.a0_inverse * part;
  }
  return cs;
}

SpectralSplit spectral_split(const CompanionSystem& cs, double gap_min) {
  const CMatrix M = kI * cs.A0;
  const int dim = static_cast<int>(M.rows());
  OrderedSchur schur = ordered_schur(M, [](Complex z) { return z.real() < 0.0; });
  SpectralSplit split;
  split.gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) {
    const Complex mu = schur.T(i, i);
    split.gap = std::min(split.gap, std::abs(mu.real()));
    (mu.real() < 0.0 ? split.eig_minus : split.eig_plus).push_back(mu);
  }
  if (split.gap < gap_min) {
    std::ostringstream os;
    os << "eigenvalue of iA0 at distance " << split.gap << " from the imaginary axis (sigma = "
       << cs.sigma << ")";
    throw Error(ErrorKind::SpectralGap, os.str());
  }
  const int expected = cs.m * cs.N;
  if (static_cast<int>(split.eig_minus.size()) != expected) {
    throw Error(ErrorKind::SpectralGap, "stable subspace has dimension " +
                                            std::to_string(split.eig_minus.size()) + ", expected " +
                                            std::to_string(expected));
  }
  split.P_minus = leading_spectral_projection(schur);
  split.P_plus = CMatrix::Identity(dim, dim) - split.P_minus;
  split.U = std::move(schur.U);
  split.T = std::move(schur.T);
  split.stable_dim = schur.selected;
  return split;
}

std::vector<BoundaryRowMatrix> boundary_rows(const BoundaryOperatorSpec& spec, std::span<const Complex> b) {
  const int N = spec.components();
  const int order = spec.order();
  std::vector<BoundaryRowMatrix> rows;
  for (const auto& slot : spec.slots()) {
    const auto& comp = spec.row(slot.row).components[slot.component];
    BoundaryRowMatrix r{slot, CMatrix::Zero(N, order * N), comp.projection.range_basis()};
    for (int l = 0; l <= comp.order; ++l) {
      // Block column k - l carries tilde b_{j,k,l}(b) (coefficient of D_y^{k-l}).
      r.row.block(0, (comp.order - l) * N, N, N) =
          boundary_tangential_part(spec, slot.row, slot.component, l, b) * comp.projection.matrix();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

double characteristic_residual(const InteriorSymbol& sym, const CompanionSystem& cs, Complex eta) {
  const int dim = static_cast<int>(cs.A0.rows());
  const Complex lhs = (eta * CMatrix::Identity(dim, dim) - cs.A0).determinant();
  const CMatrix pencil =
      cs.sigma * CMatrix::Identity(cs.N, cs.N) + sym.eval_split(cs.b, eta);
  const Complex rhs = pencil.determinant() * cs.a0_inverse.determinant();
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

SemigroupDecay fit_semigroup_decay(const CompanionSystem& /*cs*/, const SpectralSplit& split, double y_max,
                                   int samples) {
  SemigroupDecay fit;
  const CMatrix Q = split.stable_basis();
  const CMatrix T = split.stable_block();
  // exp(i A0 y) P_minus = Q exp(T y) Q^H P_minus.
  const CMatrix QhP = Q.adjoint() * split.P_minus;
  for (int s = 0; s < samples; ++s) {
    const double y = y_max * s / (samples - 1);
    const CMatrix E = Q * matrix_exp(T * y) * QhP;
    Eigen::JacobiSVD<CMatrix> svd(E);
    fit.y.push_back(y);
    fit.norms.push_back(svd.singularValues()(0));
  }
  // Linear regression of log-norms, then shift M so that the bound holds everywhere.
  double sy = 0, sl = 0, syy = 0, syl = 0;
  const double n = samples;
  for (int s = 0; s < samples; ++s) {
    const double l = std::log(std::max(fit.norms[s], 1e-300));
    sy += fit.y[s];
    sl += l;
    syy += fit.y[s] * fit.y[s];
    syl += fit.y[s] * l;
  }
  const double slope = (n * syl - sy * sl) / (n * syy - sy * sy);
  fit.c = -slope;
  double logM = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    logM = std::max(logM, std::log(std::max(fit.norms[s], 1e-300)) + fit.c * fit.y[s]);
  }
  fit.M = std::exp(logM);
  return fit;
}

CMatrix stable_projection_by_sign(const CompanionSystem& cs) {
  const int dim = static_cast<int>(cs.A0.rows());
  const CMatrix S = matrix_sign(kI * cs.A0);
  return 0.5 * (CMatrix::Identity(dim, dim) - S);
}

}  // namespace lopashka
