#include "lopashka/lopatinskii.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lopashka/ellipticity.hpp"
#include "lopashka/error.hpp"
#include "lopashka/linalg.hpp"
#include "lopashka/parallel.hpp"

namespace lopashka {

SolutionMap build_solution_map(const CompanionSystem& cs, const std::vector<BoundaryRowMatrix>& rows,
                               const SpectralSplit& split, double kappa_max) {
  const CMatrix Q = split.stable_basis();
  int data_dim = 0;
  for (const auto& r : rows) data_dim += r.slot.rank;
  if (data_dim != Q.cols()) {
    throw Error(ErrorKind::LsFailure, "dimension mismatch: data dimension " + std::to_string(data_dim) +
                                          " but stable subspace dimension " + std::to_string(Q.cols()));
  }
  SolutionMap map;
  map.stacked.resize(data_dim, Q.cols());
  for (const auto& r : rows) {
    map.stacked.middleRows(r.slot.offset, r.slot.rank) = r.basis.adjoint() * r.row * Q;
  }
  map.condition = condition_number(map.stacked);
  if (!(map.condition <= kappa_max)) {
    std::ostringstream os;
    os << "at (b, sigma) with sigma = " << cs.sigma << ": condition number " << map.condition;
    throw Error(ErrorKind::LsFailure, os.str());
  }
  map.M = Q * map.stacked.partialPivLu().solve(CMatrix::Identity(data_dim, data_dim));
  return map;
}

CVector scale_slot_data(const BoundaryOperatorSpec& spec, const CVector& stacked, double rho) {
  CVector out = stacked;
  for (const auto& slot : spec.slots()) {
    out.segment(slot.offset, slot.rank) /= std::pow(rho, slot.order);
  }
  return out;
}

CVector oracle_trace(const CompanionSystem& cs, const std::vector<BoundaryRowMatrix>& rows,
                     const CVector& stacked_data) {
  const CMatrix P_plus = CMatrix::Identity(cs.A0.rows(), cs.A0.cols()) - stable_projection_by_sign(cs);
  const int dim = static_cast<int>(cs.A0.rows());
  const int data_dim = static_cast<int>(stacked_data.size());
  CMatrix system(dim + data_dim, dim);
  CVector rhs = CVector::Zero(dim + data_dim);
  system.topRows(dim) = P_plus;
  for (const auto& r : rows) {
    system.middleRows(dim + r.slot.offset, r.slot.rank) = r.basis.adjoint() * r.row;
  }
  rhs.tail(data_dim) = stacked_data;
  return system.completeOrthogonalDecomposition().solve(rhs);
}

LsVerdict ls_sweep(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, double phi,
                   const LsSweepOptions& options) {
  const int m = sym.half_order();
  const int n = sym.tangential_dim();
  if (!(phi > 0.0 && phi <= kPi)) throw Error(ErrorKind::Precondition, "phi must lie in (0, pi]");

  struct Point {
    Complex sigma;
    std::vector<double> b;
  };
  std::vector<Point> points;
  const auto dirs = n == 1 ? std::vector<std::vector<double>>{{1.0}, {-1.0}}
                           : sphere_points(n, options.directions);
  const double max_arg = kPi - phi;
  for (int ri = 0; ri < options.radii; ++ri) {
    const double r = options.radii == 1 ? 1.0 : static_cast<double>(ri) / (options.radii - 1);
    const double mod = 1.0 - std::pow(r, 2 * m);
    const int nargs = mod > 0.0 ? options.arc_points : 1;
    const std::size_t ndirs = r > 0.0 ? dirs.size() : 1;
    for (int a = 0; a < nargs; ++a) {
      const double t = nargs == 1 ? 0.0 : -max_arg + 2.0 * max_arg * a / (nargs - 1);
      for (std::size_t d = 0; d < ndirs; ++d) {
        Point p{std::polar(mod, t), std::vector<double>(n)};
        for (int i = 0; i < n; ++i) p.b[i] = r * dirs[d][i];
        points.push_back(std::move(p));
      }
    }
  }

  struct Result {
    double condition = 0.0;
    double m_norm = 0.0;
    double oracle_error = 0.0;
    std::string failure;
  };
  std::vector<Result> results(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    Result& res = results[i];
    try {
      const auto b = to_complex(points[i].b);
      const CompanionSystem cs = build_companion(sym, b, points[i].sigma);
      const SpectralSplit split = spectral_split(cs);
      const auto rows = boundary_rows(spec, b);
      const SolutionMap map = build_solution_map(cs, rows, split, options.kappa_max);
      res.condition = map.condition;
      res.m_norm = Eigen::JacobiSVD<CMatrix>(map.M).singularValues()(0);
      if (options.oracle_check) {
        std::mt19937_64 rng(1000003ULL * i + 17);
        std::normal_distribution<double> nd;
        CVector g(map.M.cols());
        for (int k = 0; k < g.size(); ++k) g(k) = Complex(nd(rng), nd(rng));
        const CVector a = map.M * g;
        const CVector o = oracle_trace(cs, rows, g);
        res.oracle_error = (a - o).norm() / (g.norm() * std::max(1.0, res.m_norm));
      }
    } catch (const Error& e) {
      res.condition = std::numeric_limits<double>::infinity();
      switch (e.kind()) {
        case ErrorKind::SpectralGap: res.failure = "spectral gap violated"; break;
        case ErrorKind::LsFailure:
          res.failure = std::string(e.what()).find("dimension mismatch") != std::string::npos
                            ? "dimension mismatch"
                            : "rank deficient";
          break;
        default: throw;
      }
    }
  });

  LsVerdict v;
  v.sweep_size = static_cast<int>(points.size());
  v.worst_condition = -1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Result& r = results[i];
    if (!r.failure.empty()) {
      ++v.failures;
      if (v.failure.empty()) v.failure = r.failure;
    }
    v.M_norm_sup = std::max(v.M_norm_sup, r.m_norm);
    v.oracle_max_error = std::max(v.oracle_max_error, r.oracle_error);
    if (r.condition > v.worst_condition) {
      v.worst_condition = r.condition;
      v.worst_lambda = points[i].sigma;
      v.worst_xi = points[i].b;
    }
  }
  v.passes = v.failures == 0 && (!options.oracle_check || v.oracle_max_error <= tol::kOracle);
  if (v.failures == 0 && !v.passes) v.failure = "oracle disagreement";
  return v;
}

OdeOracleResult ode_oracle(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                           std::span<const double> xi_prime, const std::vector<CVector>& row_data,
                           const std::vector<double>& y_samples) {
  const int m = sym.half_order();
  const int N = sym.components();
  const ScaledVariables sv = scale_variables(lambda, xi_prime, m);
  const auto b = to_complex(sv.b);
  const CompanionSystem cs = build_companion(sym, b, sv.sigma);
  const auto rows = boundary_rows(spec, b);
  const CVector stacked = scale_slot_data(spec, stack_row_data(spec, row_data), sv.rho);

  OdeOracleResult out;
  out.trace = oracle_trace(cs, rows, stacked);
  // Residual of the boundary rows and of the decay condition.
  double res = 0.0;
  for (const auto& r : rows) {
    const CVector lhs = r.basis.adjoint() * r.row * out.trace;
    res = std::max(res, (lhs - stacked.segment(r.slot.offset, r.slot.rank)).norm());
  }
  out.boundary_residual = res / std::max(1.0, stacked.norm());

  const CMatrix generator = kI * sv.rho * cs.A0;
  for (double y : y_samples) {
    const CVector v = matrix_exp(generator * y) * out.trace;
    out.y.push_back(y);
    out.profile.push_back(v.head(N));
  }
  // Decay: the trace must carry no component along the growing modes (checked
  // with the sign-function projection), and the propagated profile must shrink.
  const int dim = static_cast<int>(cs.A0.rows());
  const CMatrix P_plus = CMatrix::Identity(dim, dim) - stable_projection_by_sign(cs);
  const double t0 = out.trace.norm();
  const double leakage = t0 > 0.0 ? (P_plus * out.trace).norm() / t0 : 0.0;
  const SpectralSplit split = spectral_split(cs);
  const double y_far = 3.0 / (sv.rho * split.gap);
  const CVector far = matrix_exp(generator * y_far) * out.trace;
  out.decay_ratio = t0 > 0.0 ? far.norm() / t0 : 0.0;
  if (leakage > 1e-8 || out.decay_ratio > 1.0) {
    std::ostringstream os;
    os << "growth detected in oracle solution (unstable component " << leakage << ", decay ratio "
       << out.decay_ratio << ")";
    throw Error(ErrorKind::Consistency, os.str());
  }
  if (out.boundary_residual > 1e-7) {
    throw Error(ErrorKind::Consistency, "oracle solution misses the boundary data");
  }
  return out;
}

}  // namespace lopashka
