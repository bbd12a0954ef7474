#include "lopashka/halfspace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lopashka/ellipticity.hpp"
#include "lopashka/error.hpp"
#include "lopashka/fft.hpp"
#include "lopashka/frequency.hpp"
#include "lopashka/linalg.hpp"
#include "lopashka/normal_ode.hpp"
#include "lopashka/parallel.hpp"

namespace lopashka {

namespace {

std::vector<Complex> forward_transform(const TraceField& g) {
  std::vector<Complex> data = g.data;
  fft_many(data, g.grid.points, g.components, false);
  return data;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void check_same_grid(const TangentialGrid& a, const TangentialGrid& b, const char* what) {
  if (a.points != b.points || a.lengths != b.lengths) {
    throw Error(ErrorKind::Dimension, std::string(what) + ": tangential grid mismatch");
  }
}

void validate_problem(const HalfSpaceProblem& p) {
  const int N = p.sym.components();
  if (p.spec.components() != N || p.spec.dim() != p.sym.dim()) {
    throw Error(ErrorKind::Dimension, "symbol and boundary operator disagree on dimensions");
  }
  if (p.grid.tangential.dims() != p.sym.tangential_dim()) {
    throw Error(ErrorKind::Dimension, "grid has the wrong number of tangential dimensions");
  }
  if (!p.f.data.empty()) {
    check_same_grid(p.f.grid.tangential, p.grid.tangential, "f");
    if (p.f.grid.normal.y != p.grid.normal.y || p.f.components != N) {
      throw Error(ErrorKind::Dimension, "f: normal grid or component count mismatch");
    }
  }
  const auto& slots = p.spec.slots();
  if (p.g.size() != slots.size()) {
    throw Error(ErrorKind::Dimension, "expected " + std::to_string(slots.size()) + " boundary data fields");
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& g = p.g[s];
    check_same_grid(g.grid, p.grid.tangential, "g");
    if (g.components != N) throw Error(ErrorKind::Dimension, "g: component count mismatch");
    const CMatrix& P = p.spec.row(slots[s].row).components[slots[s].component].projection.matrix();
    double scale = 0.0, defect = 0.0;
    for (std::size_t t = 0; t < g.grid.size(); ++t) {
      const CVector v = Eigen::Map<const CVector>(&g.data[t * N], N);
      scale = std::max(scale, v.norm());
      defect = std::max(defect, (P * v - v).norm());
    }
    if (defect > tol::kProjection * std::max(1.0, scale)) {
      throw Error(ErrorKind::Domain, "boundary data for slot " + std::to_string(s) +
                                         " does not lie in the range of its projection");
    }
  }
}

struct FrequencyResult {
  double bc_num = 0.0, bc_den = 0.0;
  double pde_num = 0.0, pde_den = 0.0;
  double leakage = 0.0;
  bool skipped = false;
  bool fallback = false;
};

// Finite-difference stencils (4th order) for D_y^k, k = 1..order, at every node.
struct NormalStencils {
  std::vector<std::vector<int>> start;               // [k][i]
  std::vector<std::vector<std::vector<double>>> w;   // [k][i][s]
};

NormalStencils build_stencils(const NormalGrid& grid, int order) {
  const int ny = grid.size();
  NormalStencils st;
  st.start.resize(order + 1);
  st.w.resize(order + 1);
  for (int k = 1; k <= order; ++k) {
    const int width = std::min(k + 4, ny);
    for (int i = 0; i < ny; ++i) {
      const int s = std::clamp(i - width / 2, 0, ny - width);
      std::vector<double> nodes(grid.y.begin() + s, grid.y.begin() + s + width);
      st.start[k].push_back(s);
      st.w[k].push_back(fornberg_weights(grid.y[i], nodes, k));
    }
  }
  return st;
}

}  // namespace

Field SolutionField::derivative(const MultiIndex& alpha) const {
  const int n = grid.tangential.dims();
  if (static_cast<int>(alpha.size()) != n + 1) throw Error(ErrorKind::Dimension, "derivative: alpha length");
  if (alpha.order() > 2 * m) throw Error(ErrorKind::Domain, "derivative: |alpha| exceeds 2m");
  const int ny = grid.normal.size();
  const int N = components;
  const int l = alpha[n];
  Field out(grid, N);
  for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
    const auto xi = grid.tangential.wavenumber(t);
    Complex factor = 1.0;
    for (int d = 0; d < n; ++d) factor *= std::pow(Complex(xi[d]), alpha[d]);
    for (int iy = 0; iy < ny; ++iy) {
      for (int c = 0; c < N; ++c) {
        out.at(t, iy, c) = factor * jets[((t * ny + iy) * (2 * m + 1) + l) * N + c];
      }
    }
  }
  fft_many(out.data, grid.tangential.points, static_cast<std::size_t>(ny) * N, true);
  return out;
}

std::vector<TraceField> slot_data_from_rows(const BoundaryOperatorSpec& spec, const std::vector<TraceField>& rows) {
  if (static_cast<int>(rows.size()) != spec.row_count()) {
    throw Error(ErrorKind::Dimension, "expected one data field per boundary row");
  }
  const int N = spec.components();
  std::vector<TraceField> out;
  for (const auto& slot : spec.slots()) {
    const TraceField& g = rows[slot.row];
    if (g.components != N) throw Error(ErrorKind::Dimension, "row data: component count mismatch");
    const CMatrix& P = spec.row(slot.row).components[slot.component].projection.matrix();
    TraceField s(g.grid, N);
    for (std::size_t t = 0; t < g.grid.size(); ++t) {
      Eigen::Map<CVector>(&s.data[t * N], N) = P * Eigen::Map<const CVector>(&g.data[t * N], N);
    }
    out.push_back(std::move(s));
  }
  // The slots must add back up to the row data.
  for (int j = 0; j < spec.row_count(); ++j) {
    double scale = 0.0, defect = 0.0;
    for (std::size_t t = 0; t < rows[j].grid.size(); ++t) {
      CVector sum = CVector::Zero(N);
      for (std::size_t s = 0; s < spec.slots().size(); ++s) {
        if (spec.slots()[s].row == j) sum += Eigen::Map<const CVector>(&out[s].data[t * N], N);
      }
      const CVector v = Eigen::Map<const CVector>(&rows[j].data[t * N], N);
      scale = std::max(scale, v.norm());
      defect = std::max(defect, (sum - v).norm());
    }
    if (defect > 1e-10 * std::max(1.0, scale)) {
      throw Error(ErrorKind::Domain, "row " + std::to_string(j) +
                                         " data lies outside the direct sum of its component ranges");
    }
  }
  return out;
}

Field solve_fullspace(const InteriorSymbol& sym, Complex lambda, const Field& f) {
  const auto& normal = f.grid.normal;
  const int P = normal.size();
  const double h = normal.y[1] - normal.y[0];
  for (int i = 0; i + 1 < P; ++i) {
    if (std::abs(normal.y[i + 1] - normal.y[i] - h) > 1e-9 * h) {
      throw Error(ErrorKind::Domain, "solve_fullspace needs a uniform normal grid");
    }
  }
  const int N = f.components;
  const int n = f.grid.tangential.dims();
  if (n != sym.tangential_dim() || N != sym.components()) {
    throw Error(ErrorKind::Dimension, "solve_fullspace: field does not match the symbol");
  }
  const std::size_t Mt = f.grid.tangential.size();
  const int Pz = 2 * P;
  const double period = Pz * h;
  std::vector<Complex> work(Mt * Pz * N, 0.0);
  for (std::size_t t = 0; t < Mt; ++t) {
    for (int iy = 0; iy < P; ++iy) {
      for (int c = 0; c < N; ++c) work[(t * Pz + iy) * N + c] = f.at(t, iy, c);
    }
  }
  std::vector<int> dims = f.grid.tangential.points;
  dims.push_back(Pz);
  fft_many(work, dims, N, false);
  for (std::size_t t = 0; t < Mt; ++t) {
    const auto xi_t = f.grid.tangential.wavenumber(t);
    for (int iz = 0; iz < Pz; ++iz) {
      const int k = iz < Pz / 2 ? iz : iz - Pz;
      std::vector<Complex> xi(xi_t.begin(), xi_t.end());
      xi.push_back(2.0 * kPi * k / period);
      const CMatrix A = lambda * CMatrix::Identity(N, N) + sym.eval(std::span<const Complex>(xi));
      Eigen::PartialPivLU<CMatrix> lu(A);
      const double det = std::abs(lu.determinant());
      if (!(det > 1e-300) || condition_number(A) > 1e14) {
        throw Error(ErrorKind::Sector, "lambda + A(xi) is singular at a grid frequency");
      }
      Eigen::Map<CVector> v(&work[(t * Pz + iz) * N], N);
      v = lu.solve(CVector(v));
    }
  }
  fft_many(work, dims, N, true);
  Field out(f.grid, N);
  for (std::size_t t = 0; t < Mt; ++t) {
    for (int iy = 0; iy < P; ++iy) {
      for (int c = 0; c < N; ++c) out.at(t, iy, c) = work[(t * Pz + iy) * N + c];
    }
  }
  return out;
}

Field extension_operator(Complex lambda, const TraceField& g, const NormalGrid& normal, int m) {
  const int N = g.components;
  const int ny = normal.size();
  const auto spec = forward_transform(g);
  Field out(Grid{g.grid, normal}, N);
  for (std::size_t t = 0; t < g.grid.size(); ++t) {
    const double xi = norm2(g.grid.wavenumber(t));
    const double root = std::pow(std::abs(lambda) + std::pow(xi, 2 * m), 1.0 / (2 * m));
    for (int iy = 0; iy < ny; ++iy) {
      const double decay = std::exp(-root * normal.y[iy]);
      for (int c = 0; c < N; ++c) out.at(t, iy, c) = decay * spec[t * N + c];
    }
  }
  fft_many(out.data, g.grid.points, static_cast<std::size_t>(ny) * N, true);
  return out;
}

TraceField weight_multiplier(Complex lambda, const TraceField& g, int m, double exponent) {
  TraceField out = g;
  fft_many(out.data, g.grid.points, g.components, false);
  for (std::size_t t = 0; t < g.grid.size(); ++t) {
    const double xi = norm2(g.grid.wavenumber(t));
    const double w = std::pow(std::pow(xi, 2 * m) + std::abs(lambda), exponent);
    for (int c = 0; c < g.components; ++c) out.at(t, c) *= w;
  }
  fft_many(out.data, g.grid.points, g.components, true);
  return out;
}

SolutionField solve_halfspace(const HalfSpaceProblem& problem, const HalfSpaceOptions& options) {
  validate_problem(problem);
  const auto& sym = problem.sym;
  const auto& spec = problem.spec;
  const Complex lambda = problem.lambda;
  if (std::abs(lambda) == 0.0) throw Error(ErrorKind::Domain, "lambda must be nonzero");
  if (options.check_sector) {
    const auto ell = ellipticity_angle(sym, 64);
    if (!ell.elliptic || std::abs(std::arg(lambda)) >= kPi - ell.angle) {
      throw Error(ErrorKind::Sector, "lambda lies outside the open sector of the symbol");
    }
  }
  const int m = sym.half_order();
  const int N = sym.components();
  const int order = 2 * m;
  const int dim = order * N;
  const auto& grid = problem.grid;
  const int ny = grid.normal.size();
  const std::size_t Mt = grid.tangential.size();
  const auto& slots = spec.slots();

  // Forward transforms of the data.
  std::vector<Complex> f_hat;
  double f_max = 0.0;
  if (!problem.f.data.empty()) {
    f_hat = problem.f.data;
    fft_many(f_hat, grid.tangential.points, static_cast<std::size_t>(ny) * N, false);
    for (const auto& v : f_hat) f_max = std::max(f_max, std::abs(v));
  }
  std::vector<std::vector<Complex>> g_hat;
  double g_max = 0.0;
  for (const auto& g : problem.g) {
    g_hat.push_back(forward_transform(g));
    for (const auto& v : g_hat.back()) g_max = std::max(g_max, std::abs(v));
  }
  const bool have_f = f_max > 0.0;

  const ElementInterpolation interp(grid.normal);
  const NormalStencils stencils = build_stencils(grid.normal, order);

  SolutionField sol;
  sol.grid = grid;
  sol.components = N;
  sol.m = m;
  sol.lambda = lambda;
  sol.jets.assign(Mt * ny * (order + 1) * N, 0.0);
  std::vector<FrequencyResult> results(Mt);

  parallel_for(Mt, [&](std::size_t t) {
    FrequencyResult& res = results[t];
    double local_f = 0.0, local_g = 0.0;
    if (have_f) {
      for (int k = 0; k < ny * N; ++k) local_f = std::max(local_f, std::abs(f_hat[t * ny * N + k]));
    }
    for (std::size_t s = 0; s < slots.size(); ++s) {
      for (int c = 0; c < N; ++c) local_g = std::max(local_g, std::abs(g_hat[s][t * N + c]));
    }
    const bool f_active = local_f > 1e-15 * f_max;
    const bool g_active = local_g > 1e-15 * g_max;
    if (!f_active && !g_active) {
      res.skipped = true;
      return;
    }
    const auto xi = grid.tangential.wavenumber(t);
    const FrequencySetup fs = setup_frequency(sym, spec, lambda, xi);
    const double rho = fs.scaled.rho;
    const auto xi_c = to_complex(xi);

    // Full-line part driven by the zero extension of f.
    CMatrix states = CMatrix::Zero(ny, dim);
    if (f_active) {
      CMatrix G = CMatrix::Zero(ny, dim);
      const Complex factor = kI / std::pow(rho, order - 1);
      for (int iy = 0; iy < ny; ++iy) {
        const CVector fv = Eigen::Map<const CVector>(&f_hat[(t * ny + iy) * N], N);
        G.row(iy).tail(N) = (factor * (fs.companion.a0_inverse * fv)).transpose();
      }
      const CMatrix M = kI * rho * fs.companion.A0;
      const ForcedSolve fsol = solve_forced_line(M, G, grid.normal, interp);
      states = fsol.states;
      res.fallback = fsol.fallback;
    }

    // Boundary residuals and the boundary-layer correction on ran(P_-).
    const int D = spec.data_dim();
    CVector r(D);
    const CVector v0 = states.row(0).transpose();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& row = fs.rows[s];
      const CVector gs = Eigen::Map<const CVector>(&g_hat[s][t * N], N) / std::pow(rho, slots[s].order);
      r.segment(slots[s].offset, slots[s].rank) = row.basis.adjoint() * (gs - row.row * v0);
    }
    const CMatrix Q = fs.split.stable_basis();
    const CMatrix T11 = fs.split.stable_block();
    CVector zeta = fs.map.stacked.partialPivLu().solve(r);
    const CMatrix& P_plus = fs.split.P_plus;
    for (int iy = 0; iy < ny; ++iy) {
      if (iy > 0) zeta = matrix_exp(rho * (grid.normal.y[iy] - grid.normal.y[iy - 1]) * T11) * zeta;
      const CVector vb = Q * zeta;
      const double nb = vb.norm();
      if (nb > 0.0) res.leakage = std::max(res.leakage, (P_plus * vb).norm() / nb);
      states.row(iy) += vb.transpose();
    }
    if (res.leakage > options.leakage_tol) {
      throw Error(ErrorKind::Consistency, "boundary layer leaks into the unstable subspace (" +
                                              std::to_string(res.leakage) + ") at " + format_frequency(xi));
    }

    // Jets D_y^l u, l < 2m from the state; D_y^{2m} u from the equation.
    std::vector<CMatrix> a_tilde(order + 1);
    for (int l = 1; l <= order; ++l) a_tilde[l] = sym.tangential_part(l, xi_c);
    for (int iy = 0; iy < ny; ++iy) {
      Complex* jet = &sol.jets[(t * ny + iy) * (order + 1) * N];
      double rpow = 1.0;
      for (int l = 0; l < order; ++l) {
        for (int c = 0; c < N; ++c) jet[l * N + c] = rpow * states(iy, l * N + c);
        rpow *= rho;
      }
      CVector rhs = -lambda * Eigen::Map<CVector>(jet, N);
      if (have_f) rhs += Eigen::Map<const CVector>(&f_hat[(t * ny + iy) * N], N);
      for (int l = 1; l <= order; ++l) rhs -= a_tilde[l] * Eigen::Map<CVector>(jet + (order - l) * N, N);
      Eigen::Map<CVector>(jet + order * N, N) = fs.companion.a0_inverse * rhs;
    }

    // Boundary reproduction in unscaled data units.
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& row = fs.rows[s];
      const CVector gs = Eigen::Map<const CVector>(&g_hat[s][t * N], N);
      const CVector bu = std::pow(rho, slots[s].order) * (row.basis.adjoint() * (row.row * states.row(0).transpose()));
      const CVector gw = row.basis.adjoint() * gs;
      res.bc_num += (bu - gw).squaredNorm();
      res.bc_den += std::max(gw.squaredNorm(), bu.squaredNorm());
    }

    if (options.check_pde_residual) {
      const CMatrix& a0 = sym.leading_normal();
      for (int iy = 1; iy + 1 < ny; ++iy) {
        CVector resid = CVector::Zero(N);
        const Complex* jet0 = &sol.jets[(t * ny + iy) * (order + 1) * N];
        const CVector u = Eigen::Map<const CVector>(jet0, N);
        resid += lambda * u;
        double scale = std::abs(lambda) * u.norm();
        if (have_f) {
          const CVector fv = Eigen::Map<const CVector>(&f_hat[(t * ny + iy) * N], N);
          resid -= fv;
          scale = std::max(scale, fv.norm());
        }
        for (int l = 0; l <= order; ++l) {
          const int k = order - l;  // order of the normal derivative
          CVector du = CVector::Zero(N);
          if (k == 0) {
            du = u;
          } else {
            const int s0 = stencils.start[k][iy];
            const auto& w = stencils.w[k][iy];
            for (std::size_t q = 0; q < w.size(); ++q) {
              du += w[q] * Eigen::Map<const CVector>(&sol.jets[(t * ny + s0 + q) * (order + 1) * N], N);
            }
            du *= std::pow(-kI, k);
          }
          const CVector term = (l == 0 ? a0 : a_tilde[l]) * du;
          resid += term;
          scale = std::max(scale, term.norm());
        }
        res.pde_num = std::max(res.pde_num, resid.norm());
        res.pde_den = std::max(res.pde_den, scale);
      }
    }
  });

  double bc_num = 0.0, bc_den = 0.0, pde_num = 0.0, pde_den = 0.0;
  for (const auto& res : results) {
    bc_num += res.bc_num;
    bc_den += res.bc_den;
    pde_num = std::max(pde_num, res.pde_num);
    pde_den = std::max(pde_den, res.pde_den);
    sol.diagnostics.leakage = std::max(sol.diagnostics.leakage, res.leakage);
    sol.diagnostics.skipped += res.skipped ? 1 : 0;
    sol.diagnostics.fallback += res.fallback ? 1 : 0;
  }
  sol.diagnostics.frequencies = static_cast<int>(Mt);
  sol.diagnostics.boundary_residual = bc_den > 0.0 ? std::sqrt(bc_num / bc_den) : 0.0;
  sol.diagnostics.pde_residual = pde_den > 0.0 ? pde_num / pde_den : 0.0;

  sol.u = Field(grid, N);
  for (std::size_t t = 0; t < Mt; ++t) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int c = 0; c < N; ++c) sol.u.at(t, iy, c) = sol.jets[((t * ny + iy) * (order + 1)) * N + c];
    }
  }
  fft_many(sol.u.data, grid.tangential.points, static_cast<std::size_t>(ny) * N, true);
  return sol;
}

}  // namespace lopashka
