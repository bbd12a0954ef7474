#include "lopashka/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "lopashka/ellipticity.hpp"
#include "lopashka/error.hpp"
#include "lopashka/fft.hpp"
#include "lopashka/frequency.hpp"
#include "lopashka/lopatinskii.hpp"
#include "lopashka/normal_ode.hpp"
#include "lopashka/parallel.hpp"

namespace lopashka {

namespace {

using SpMat = Eigen::SparseMatrix<Complex>;
using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using RowMajorC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kGamma = 2.0 - 1.4142135623730951;

// Finite-difference matrices for d^k/dy^k, k = 0..order, on a normal mesh.
// Row i uses k + 4 consecutive nodes, centred where possible and one-sided
// at the ends.
std::vector<RowSparse> difference_matrices(const NormalGrid& grid, int order) {
  const int ny = grid.size();
  std::vector<RowSparse> out;
  for (int k = 0; k <= order; ++k) {
    RowSparse Dk(ny, ny);
    if (k == 0) {
      Dk.setIdentity();
    } else {
      std::vector<Eigen::Triplet<double>> trip;
      const int width = std::min(k + 4, ny);
      for (int i = 0; i < ny; ++i) {
        const int s = std::clamp(i - width / 2, 0, ny - width);
        std::vector<double> nodes(grid.y.begin() + s, grid.y.begin() + s + width);
        const auto w = fornberg_weights(grid.y[i], nodes, k);
        for (int q = 0; q < width; ++q) trip.emplace_back(i, s + q, w[q]);
      }
      Dk.setFromTriplets(trip.begin(), trip.end());
    }
    out.push_back(std::move(Dk));
  }
  return out;
}

// Slot row W^H P sum_r btilde_{k-r}(xi') D_y^r at y = 0 acting on nodal
// values; columns index (node, component) over the first `width` nodes.
CMatrix slot_boundary_matrix(const BoundaryOperatorSpec& spec, const DataSlot& slot,
                             std::span<const Complex> xi, const std::vector<RowSparse>& D,
                             int width) {
  const int N = spec.components();
  const auto& comp = spec.row(slot.row).components[slot.component];
  const CMatrix WP = comp.projection.range_basis().adjoint() * comp.projection.matrix();
  CMatrix out = CMatrix::Zero(slot.rank, width * N);
  for (int r = 0; r <= slot.order; ++r) {
    const CMatrix C = std::pow(-kI, r) * (WP * boundary_tangential_part(spec, slot.row, slot.component,
                                                                        slot.order - r, xi));
    for (int q = 0; q < width; ++q) {
      const double w = D[r].coeff(0, q);
      if (w != 0.0) out.middleCols(q * N, N) += w * C;
    }
  }
  return out;
}

void check_grid(const Grid& a, const Grid& b, const char* what) {
  if (a.tangential.points != b.tangential.points || a.tangential.lengths != b.tangential.lengths ||
      a.normal.y != b.normal.y) {
    throw Error(ErrorKind::Dimension, std::string(what) + ": grid mismatch");
  }
}

void validate_dimensions(const ParabolicProblem& p) {
  if (p.spec.components() != p.sym.components() || p.spec.dim() != p.sym.dim()) {
    throw Error(ErrorKind::Dimension, "symbol and boundary operator disagree on dimensions");
  }
  if (p.grid.tangential.dims() != p.sym.tangential_dim()) {
    throw Error(ErrorKind::Dimension, "grid has the wrong number of tangential dimensions");
  }
  if (!(p.T > 0.0)) throw Error(ErrorKind::Domain, "final time must be positive");
  const int m = p.sym.half_order();
  if (p.spec.data_dim() != m * p.sym.components()) {
    throw Error(ErrorKind::Precondition, "boundary operator must supply m N scalar conditions");
  }
  if (p.grid.normal.size() < 2 * m + 8) throw Error(ErrorKind::Domain, "normal grid too coarse");
  if (!p.u0.data.empty()) {
    check_grid(p.u0.grid, p.grid, "u0");
    if (p.u0.components != p.sym.components()) throw Error(ErrorKind::Dimension, "u0: component count");
  }
}

// Stacked slot coordinates W^H g_hat per frequency; layout [t][D].
std::vector<Complex> boundary_spectrum(const ParabolicProblem& p, double t) {
  const auto& slots = p.spec.slots();
  const int D = p.spec.data_dim();
  const int N = p.sym.components();
  const std::size_t Mt = p.grid.tangential.size();
  std::vector<Complex> out(Mt * D, 0.0);
  if (!p.g) return out;
  auto g = p.g(t);
  if (g.size() != slots.size()) {
    throw Error(ErrorKind::Dimension, "expected " + std::to_string(slots.size()) + " boundary data fields");
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (g[s].grid.points != p.grid.tangential.points || g[s].components != N) {
      throw Error(ErrorKind::Dimension, "g: grid or component count mismatch");
    }
    std::vector<Complex> hat = g[s].data;
    fft_many(hat, g[s].grid.points, N, false);
    const CMatrix W = p.spec.row(slots[s].row).components[slots[s].component].projection.range_basis();
    for (std::size_t k = 0; k < Mt; ++k) {
      Eigen::Map<CVector>(&out[k * D + slots[s].offset], slots[s].rank) =
          W.adjoint() * Eigen::Map<const CVector>(&hat[k * N], N);
    }
  }
  return out;
}

std::vector<Complex> interior_spectrum(const ParabolicProblem& p, double t) {
  if (!p.f) return {};
  Field f = p.f(t);
  check_grid(f.grid, p.grid, "f");
  if (f.components != p.sym.components()) throw Error(ErrorKind::Dimension, "f: component count");
  fft_many(f.data, p.grid.tangential.points, static_cast<std::size_t>(p.grid.normal.size()) * f.components, false);
  return std::move(f.data);
}

double periodic_distance(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& lengths) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    double r = std::fabs(a[d] - b[d]);
    r = std::min(r, lengths[d] - r);
    s += r * r;
  }
  return std::sqrt(s);
}

}  // namespace

double kappa_exponent(int m, int k, double p) {
  if (m < 1 || k < 0 || k >= 2 * m || !(p > 1.0)) throw Error(ErrorKind::Domain, "kappa: need m >= 1, 0 <= k < 2m, p > 1");
  return (2.0 * m - k - 1.0 / p) / (2.0 * m);
}

bool DataClassReport::compatible() const {
  return std::all_of(slots.begin(), slots.end(), [](const SlotDataReport& s) { return s.compatible; });
}

double time_seminorm(const std::vector<std::vector<Complex>>& values, double dt, double weight, double s) {
  if (!(s > 0.0 && s < 1.0)) throw Error(ErrorKind::Domain, "time seminorm order must lie in (0, 1)");
  const std::size_t S = values.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < S; ++j) {
      if (i == j) continue;
      double diff = 0.0;
      for (std::size_t c = 0; c < values[i].size(); ++c) diff += std::norm(values[i][c] - values[j][c]);
      const double gap = std::fabs(static_cast<double>(i) - static_cast<double>(j)) * dt;
      sum += dt * dt * weight * diff / std::pow(gap, 1.0 + 2.0 * s);
    }
  }
  return std::sqrt(sum);
}

double space_seminorm(const TraceField& g, double s) {
  if (!(s > 0.0)) throw Error(ErrorKind::Domain, "space seminorm order must be positive");
  const auto& grid = g.grid;
  const int n = grid.dims();
  const int N = g.components;
  const std::size_t M = grid.size();
  const int whole = static_cast<int>(std::floor(s + 1e-12));
  const double frac = s - whole;
  std::vector<Complex> hat = g.data;
  fft_many(hat, grid.points, N, false);
  std::vector<std::vector<double>> x(M);
  for (std::size_t t = 0; t < M; ++t) x[t] = grid.coordinate(t);
  const double vol = grid.cell_volume();
  double total = 0.0;
  for (const auto& beta : multi_indices(n, whole)) {
    std::vector<Complex> h = hat;
    for (std::size_t t = 0; t < M; ++t) {
      const auto xi = grid.wavenumber(t);
      Complex factor = 1.0;
      for (int d = 0; d < n; ++d) factor *= std::pow(kI * xi[d], beta[d]);
      for (int c = 0; c < N; ++c) h[t * N + c] *= factor;
    }
    fft_many(h, grid.points, N, true);
    if (frac < 1e-12) {
      for (const auto& v : h) total += vol * std::norm(v);
      continue;
    }
    for (std::size_t a = 0; a < M; ++a) {
      for (std::size_t b = 0; b < M; ++b) {
        if (a == b) continue;
        double diff = 0.0;
        for (int c = 0; c < N; ++c) diff += std::norm(h[a * N + c] - h[b * N + c]);
        const double r = periodic_distance(x[a], x[b], grid.lengths);
        total += vol * vol * diff / std::pow(r, n + 2.0 * frac);
      }
    }
  }
  return std::sqrt(total);
}

DataClassReport validate_data(const ParabolicProblem& problem, const ValidationOptions& options) {
  validate_dimensions(problem);
  const int m = problem.sym.half_order();
  const int N = problem.sym.components();
  const auto& grid = problem.grid;
  const auto& slots = problem.spec.slots();
  DataClassReport report;
  report.p = problem.p;
  report.q = problem.q;
  report.validated = problem.p == problem.q;
  if (!report.validated) {
    report.note = "p != q: the mixed-integrability data classes are not validated";
  }

  const int S = std::max(2, options.time_samples);
  const double dt = problem.T / S;
  std::vector<std::vector<TraceField>> samples;
  if (options.seminorms && problem.g) {
    for (int i = 0; i < S; ++i) samples.push_back(problem.g((i + 0.5) * dt));
  }

  // Boundary operators applied to u0 at y = 0, per slot and frequency.
  const std::size_t Mt = grid.tangential.size();
  const int D = problem.spec.data_dim();
  const int width = std::min(2 * m + 4, grid.normal.size());
  const auto Dmat = difference_matrices(grid.normal, 2 * m - 1);
  std::vector<Complex> bu0(Mt * D, 0.0);
  if (!problem.u0.data.empty()) {
    std::vector<Complex> hat = problem.u0.data;
    const int ny = grid.normal.size();
    fft_many(hat, grid.tangential.points, static_cast<std::size_t>(ny) * N, false);
    for (std::size_t t = 0; t < Mt; ++t) {
      const auto xi = to_complex(grid.tangential.wavenumber(t));
      const CVector v = Eigen::Map<const CVector>(&hat[t * ny * N], width * N);
      for (const auto& slot : slots) {
        Eigen::Map<CVector>(&bu0[t * D + slot.offset], slot.rank) =
            slot_boundary_matrix(problem.spec, slot, xi, Dmat, width) * v;
      }
    }
  }
  const std::vector<Complex> g0 = boundary_spectrum(problem, 0.0);

  for (std::size_t s = 0; s < slots.size(); ++s) {
    const auto& slot = slots[s];
    SlotDataReport r;
    r.slot = static_cast<int>(s);
    r.row = slot.row;
    r.component = slot.component;
    r.order = slot.order;
    r.kappa = kappa_exponent(m, slot.order, problem.p);
    r.time_order = r.kappa;
    r.space_order = 2.0 * m * r.kappa;
    if (!samples.empty()) {
      std::vector<std::vector<Complex>> values;
      double space_sq = 0.0;
      for (const auto& sample : samples) {
        values.push_back(sample[s].data);
        const double v = space_seminorm(sample[s], r.space_order);
        space_sq += dt * v * v;
      }
      r.time_seminorm = time_seminorm(values, dt, grid.tangential.cell_volume(), r.time_order);
      r.space_seminorm = std::sqrt(space_sq);
    }
    r.compatibility_required = r.kappa > 1.0 / problem.p;
    if (r.compatibility_required) {
      // Physical L2 norms over the torus (Parseval); mismatch relative to max(1, |g(0)|, |B u0|).
      const double parseval = grid.tangential.cell_volume() / static_cast<double>(Mt);
      double diff = 0.0, gn = 0.0, bn = 0.0;
      for (std::size_t t = 0; t < Mt; ++t) {
        for (int a = 0; a < slot.rank; ++a) {
          const Complex gv = g0[t * D + slot.offset + a];
          const Complex bv = bu0[t * D + slot.offset + a];
          diff += parseval * std::norm(gv - bv);
          gn += parseval * std::norm(gv);
          bn += parseval * std::norm(bv);
        }
      }
      r.compatibility_defect = std::sqrt(diff) / std::max({1.0, std::sqrt(gn), std::sqrt(bn)});
      r.compatible = r.compatibility_defect <= options.compatibility_tol;
    }
    report.slots.push_back(r);
  }
  return report;
}

struct ParabolicStepper::Impl {
  explicit Impl(const ParabolicProblem& p) : problem(p) {}
  ParabolicProblem problem;
  int m = 1;
  int N = 1;
  int ny = 0;
  int D = 0;
  std::size_t Mt = 0;
  std::vector<RowSparse> Dmat;
  std::vector<Eigen::SparseMatrix<Complex, Eigen::RowMajor>> Dmat_complex;
  std::vector<SpMat> A;
  std::vector<SpMat> K;
  std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> lu;
  std::vector<double> K_norm;  // max absolute row sum of the stage matrix
  std::vector<char> dynamic;  // rows carrying the evolution equation
  std::vector<Complex> f_now;
  double d = 0.0;
};

ParabolicStepper::ParabolicStepper(const ParabolicProblem& problem, int steps) : impl_(std::make_unique<Impl>(problem)) {
  validate_dimensions(problem);
  if (steps < 1) throw Error(ErrorKind::Domain, "need at least one time step");
  Impl& I = *impl_;
  I.m = problem.sym.half_order();
  I.N = problem.sym.components();
  I.ny = problem.grid.normal.size();
  I.D = problem.spec.data_dim();
  I.Mt = problem.grid.tangential.size();
  steps_ = steps;
  dt_ = problem.T / steps;
  I.d = 0.5 * kGamma * dt_;
  const int order = 2 * I.m;
  const int N = I.N;
  const int S = I.ny * N;
  I.Dmat = difference_matrices(problem.grid.normal, order);
  for (const auto& Dk : I.Dmat) I.Dmat_complex.emplace_back(Dk.cast<Complex>());
  I.dynamic.assign(S, 0);
  for (int iy = I.m; iy < I.ny - I.m; ++iy) {
    for (int c = 0; c < N; ++c) I.dynamic[iy * N + c] = 1;
  }
  const int width = std::min(order + 4, I.ny);

  I.A.resize(I.Mt);
  I.K.resize(I.Mt);
  I.lu.resize(I.Mt);
  I.K_norm.resize(I.Mt);
  parallel_for(I.Mt, [&](std::size_t t) {
    const auto xi_r = problem.grid.tangential.wavenumber(t);
    const auto xi = to_complex(xi_r);
    std::vector<CMatrix> a(order + 1);
    a[0] = problem.sym.leading_normal();
    for (int l = 1; l <= order; ++l) a[l] = problem.sym.tangential_part(l, xi);
    std::vector<Eigen::Triplet<Complex>> trip_a, trip_k;
    for (int l = 0; l <= order; ++l) {
      const int k = order - l;
      const CMatrix C = std::pow(-kI, k) * a[l];
      for (int iy = I.m; iy < I.ny - I.m; ++iy) {
        for (RowSparse::InnerIterator it(I.Dmat[k], iy); it; ++it) {
          for (int c = 0; c < N; ++c) {
            for (int c2 = 0; c2 < N; ++c2) {
              if (C(c, c2) == 0.0) continue;
              trip_a.emplace_back(iy * N + c, static_cast<int>(it.col()) * N + c2, it.value() * C(c, c2));
            }
          }
        }
      }
    }
    SpMat A(S, S);
    A.setFromTriplets(trip_a.begin(), trip_a.end());
    for (int k = 0; k < A.outerSize(); ++k) {
      for (SpMat::InnerIterator it(A, k); it; ++it) trip_k.emplace_back(it.row(), it.col(), I.d * it.value());
    }
    for (int r = 0; r < S; ++r) {
      if (I.dynamic[r]) trip_k.emplace_back(r, r, 1.0);
    }
    for (const auto& slot : problem.spec.slots()) {
      const CMatrix B = slot_boundary_matrix(problem.spec, slot, xi, I.Dmat, width);
      for (int a2 = 0; a2 < slot.rank; ++a2) {
        for (int col = 0; col < B.cols(); ++col) {
          if (B(a2, col) != 0.0) trip_k.emplace_back(slot.offset + a2, col, B(a2, col));
        }
      }
    }
    for (int r = (I.ny - I.m) * N; r < S; ++r) trip_k.emplace_back(r, r, 1.0);
    SpMat K(S, S);
    K.setFromTriplets(trip_k.begin(), trip_k.end());
    K.makeCompressed();
    auto solver = std::make_unique<Eigen::SparseLU<SpMat>>();
    solver->analyzePattern(K);
    solver->factorize(K);
    if (solver->info() != Eigen::Success) {
      throw Error(ErrorKind::Numerical, "stage matrix factorization failed at " + format_frequency(xi_r) +
                                            " (time step 0)");
    }
    RVector row_sum = RVector::Zero(S);
    for (int k = 0; k < K.outerSize(); ++k) {
      for (SpMat::InnerIterator it(K, k); it; ++it) row_sum[it.row()] += std::abs(it.value());
    }
    I.K_norm[t] = row_sum.maxCoeff();
    I.A[t] = std::move(A);
    I.K[t] = std::move(K);
    I.lu[t] = std::move(solver);
  });

  state_.assign(I.Mt * S, 0.0);
  if (!problem.u0.data.empty()) {
    state_ = problem.u0.data;
    fft_many(state_, problem.grid.tangential.points, static_cast<std::size_t>(S), false);
  }
  I.f_now = interior_spectrum(problem, 0.0);
  diagnostics_.frequencies = static_cast<int>(I.Mt);
}

ParabolicStepper::~ParabolicStepper() = default;

double ParabolicStepper::time() const { return step_ == steps_ ? impl_->problem.T : step_ * dt_; }

void ParabolicStepper::advance() {
  if (step_ >= steps_) throw Error(ErrorKind::Precondition, "time stepping already reached the final time");
  Impl& I = *impl_;
  const double t0 = step_ * dt_;
  const double t_stage = t0 + kGamma * dt_;
  const double t1 = step_ + 1 == steps_ ? I.problem.T : t0 + dt_;
  const std::vector<Complex> f_stage = interior_spectrum(I.problem, t_stage);
  const std::vector<Complex> f_next = interior_spectrum(I.problem, t1);
  const std::vector<Complex> g_stage = boundary_spectrum(I.problem, t_stage);
  const std::vector<Complex> g_next = boundary_spectrum(I.problem, t1);
  const int S = I.ny * I.N;
  const double c1 = 1.0 / (kGamma * (2.0 - kGamma));
  const double c2 = (1.0 - kGamma) * (1.0 - kGamma) / (kGamma * (2.0 - kGamma));
  const bool have_f = !I.f_now.empty();
  std::vector<double> stage_res(I.Mt, 0.0), bc_res(I.Mt, 0.0);
  const int step_number = step_ + 1;

  parallel_for(I.Mt, [&](std::size_t t) {
    Eigen::Map<CVector> u(&state_[t * S], S);
    auto solve = [&](const CVector& b, const char* stage) {
      CVector x = I.lu[t]->solve(b);
      const CVector r = I.K[t] * x - b;
      const double scale = I.K_norm[t] * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
      const double rel = scale > 0.0 ? r.lpNorm<Eigen::Infinity>() / scale : 0.0;
      if (!x.allFinite() || I.lu[t]->info() != Eigen::Success || !(rel <= 1e-10)) {
        throw Error(ErrorKind::Numerical, std::string(stage) + " solve failed at " +
                                              format_frequency(I.problem.grid.tangential.wavenumber(t)) +
                                              " (time step " + std::to_string(step_number) + ")");
      }
      stage_res[t] = std::max(stage_res[t], rel);
      const double gb = b.head(I.D).norm();
      if (gb > 0.0) bc_res[t] = std::max(bc_res[t], r.head(I.D).norm() / gb);
      return x;
    };
    const CVector Au = I.A[t] * u;
    CVector b = CVector::Zero(S);
    for (int r = 0; r < S; ++r) {
      if (!I.dynamic[r]) continue;
      b[r] = u[r] - I.d * Au[r];
      if (have_f) b[r] += I.d * (I.f_now[t * S + r] + f_stage[t * S + r]);
    }
    b.head(I.D) = Eigen::Map<const CVector>(&g_stage[t * I.D], I.D);
    const CVector mid = solve(b, "TR stage");
    b.setZero();
    for (int r = 0; r < S; ++r) {
      if (!I.dynamic[r]) continue;
      b[r] = c1 * mid[r] - c2 * u[r];
      if (have_f) b[r] += I.d * f_next[t * S + r];
    }
    b.head(I.D) = Eigen::Map<const CVector>(&g_next[t * I.D], I.D);
    u = solve(b, "BDF2 stage");
  });

  for (std::size_t t = 0; t < I.Mt; ++t) {
    diagnostics_.stage_residual = std::max(diagnostics_.stage_residual, stage_res[t]);
    diagnostics_.boundary_residual = std::max(diagnostics_.boundary_residual, bc_res[t]);
  }
  I.f_now = f_next;
  ++step_;
  diagnostics_.steps = step_;
}

std::vector<Complex> ParabolicStepper::spectral_normal_derivative(int k) const {
  const Impl& I = *impl_;
  if (k < 0 || k > 2 * I.m) throw Error(ErrorKind::Domain, "normal derivative order out of range");
  if (k == 0) return state_;
  const int S = I.ny * I.N;
  std::vector<Complex> out(state_.size());
  const auto& Dk = I.Dmat_complex[k];
  const Complex factor = std::pow(-kI, k);
  for (std::size_t t = 0; t < I.Mt; ++t) {
    Eigen::Map<const RowMajorC> u(&state_[t * S], I.ny, I.N);
    Eigen::Map<RowMajorC> v(&out[t * S], I.ny, I.N);
    v.noalias() = Dk * u;
    v *= factor;
  }
  return out;
}

Field ParabolicStepper::field() const {
  const Impl& I = *impl_;
  Field out(I.problem.grid, I.N);
  out.data = state_;
  fft_many(out.data, I.problem.grid.tangential.points, static_cast<std::size_t>(I.ny) * I.N, true);
  return out;
}

ParabolicSolution solve_parabolic(const ParabolicProblem& problem, const ParabolicOptions& options) {
  validate_dimensions(problem);
  if (options.check_sector) {
    const auto ell = ellipticity_angle(problem.sym, 64);
    if (!ell.elliptic || ell.angle >= kPi / 2) {
      throw Error(ErrorKind::Sector, "parabolic solve needs an ellipticity angle below pi/2 (found " +
                                         std::to_string(ell.angle) + ")");
    }
  }
  if (options.check_ls) {
    LsSweepOptions ls;
    ls.arc_points = 16;
    ls.directions = 8;
    ls.radii = 8;
    ls.oracle_check = false;
    const auto verdict = ls_sweep(problem.sym, problem.spec, kPi / 2, ls);
    if (!verdict.passes) {
      throw Error(ErrorKind::LsFailure, "boundary operator fails the complementing condition on the closed "
                                        "right half-plane: " + verdict.failure);
    }
  }
  ValidationOptions vo;
  vo.seminorms = false;
  ParabolicSolution sol;
  sol.data = validate_data(problem, vo);
  if (!options.allow_invalid_data && !sol.data.compatible()) {
    for (const auto& s : sol.data.slots) {
      if (!s.compatible) {
        throw Error(ErrorKind::Precondition, "initial value incompatible with boundary data of slot " +
                                                 std::to_string(s.slot) + " (defect " +
                                                 std::to_string(s.compatibility_defect) + ")");
      }
    }
  }
  ParabolicStepper stepper(problem, options.steps);
  sol.grid = problem.grid;
  sol.components = problem.sym.components();
  sol.m = problem.sym.half_order();
  sol.times.push_back(0.0);
  sol.snapshots.push_back(stepper.field());
  while (stepper.step() < stepper.steps()) {
    stepper.advance();
    const bool last = stepper.step() == stepper.steps();
    if (last || (options.output_every > 0 && stepper.step() % options.output_every == 0)) {
      sol.times.push_back(stepper.time());
      sol.snapshots.push_back(stepper.field());
    }
  }
  sol.diagnostics = stepper.diagnostics();
  return sol;
}

}  // namespace lopashka
