#include "lopashka/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lopashka/error.hpp"
#include "lopashka/fft.hpp"
#include "lopashka/frequency.hpp"
#include "lopashka/linalg.hpp"
#include "lopashka/parallel.hpp"

namespace lopashka {

namespace {

using boost::math::quadrature::exp_sinh;
using boost::math::quadrature::gauss_kronrod;

exp_sinh<double>& half_line() {
  thread_local exp_sinh<double> integrator(12);
  return integrator;
}

template <class F>
double integrate_half_line(const F& f, double tol) {
  double error = 0.0, l1 = 0.0;
  const double value = half_line().integrate(f, tol, &error, &l1);
  if (!(error <= std::max(100.0 * tol, 1e-12) * l1) || !std::isfinite(value)) {
    throw Error(ErrorKind::Numerical, "half-line quadrature did not converge");
  }
  return value;
}

// log of I(r) = int_0^inf s^{n-2} (1+s)^{-e} e^{-s r} ds, so that p = e^{-r} I(r).
double log_head_integral(int e, int n, double r, double tol) {
  if (r > 1.0) {
    // s = u / r: I = r^{-(n-1)} int u^{n-2} (1 + u/r)^{-e} e^{-u} du.
    const double v = integrate_half_line(
        [&](double u) { return std::pow(u, n - 2) * std::pow(1.0 + u / r, -e) * std::exp(-u); }, tol);
    return std::log(v) - (n - 1) * std::log(r);
  }
  double error = 0.0;
  const double head = gauss_kronrod<double, 31>::integrate(
      [&](double s) { return std::pow(s, n - 2) * std::pow(1.0 + s, -e) * std::exp(-s * r); }, 0.0, 1.0, 15, tol,
      &error);
  if (!(error <= std::max(100.0 * tol, 1e-12) * std::abs(head))) {
    throw Error(ErrorKind::Numerical, "head quadrature did not converge");
  }
  // s = 1 + t / r on [1, inf): e^{-r} / r int (1 + t/r)^{n-2} (2 + t/r)^{-e} e^{-t} dt.
  const double tail = integrate_half_line(
      [&](double t) { return std::pow(1.0 + t / r, n - 2) * std::pow(2.0 + t / r, -e) * std::exp(-t); }, tol);
  return std::log(head + std::exp(-r) / r * tail);
}

void check_kernel_args(int n, double r) {
  if (n < 2) throw Error(ErrorKind::Domain, "p_kernel requires n >= 2");
  if (!(r > 0.0)) throw Error(ErrorKind::Domain, "p_kernel requires r > 0");
}

}  // namespace

double log_p_kernel(int k, int nu, int n, double r, double tol) {
  check_kernel_args(n, r);
  return -r + log_head_integral(k - 1 - nu, n, r, tol);
}

double p_kernel(int k, int nu, int n, double r, double tol) {
  check_kernel_args(n, r);
  if (r > 745.0) return 0.0;
  return std::exp(log_p_kernel(k, nu, n, r, tol));
}

IdentityCheck lemma_integral_identity_check(int k, int nu, int n, double c, double y) {
  if (!(c > 0.0 && y > 0.0)) throw Error(ErrorKind::Domain, "identity check needs c, y > 0");
  IdentityCheck out;
  out.lhs = integrate_half_line(
      [&](double r) { return r > 0.0 ? p_kernel(k, nu, n, c * (y + r), 1e-12) * std::pow(r, n - 1) : 0.0; }, 1e-10);
  out.rhs = std::tgamma(n) / std::pow(c, n) * p_kernel(k + n, nu, n, c * y);
  out.residual = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

double complete_monotonicity_margin(int k, int nu, int n, double r_min, double r_max, int points) {
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (points - 1));
    const double h = 0.1 * r;
    double v[4];
    for (int q = 0; q < 4; ++q) v[q] = p_kernel(k, nu, n, r + q * h);
    // (-1)^j Delta_h^j p for j = 0..3.
    const double d0 = v[0];
    const double d1 = -(v[1] - v[0]);
    const double d2 = v[2] - 2.0 * v[1] + v[0];
    const double d3 = -(v[3] - 3.0 * v[2] + 3.0 * v[1] - v[0]);
    margin = std::min({margin, d0, d1, d2, d3});
  }
  return margin;
}

CMatrix KernelField::at(std::size_t t, int iy) const {
  const std::size_t base = (t * grid.normal.size() + iy) * rows * cols;
  CMatrix out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out(r, c) = values[base + r * cols + c];
  }
  return out;
}

double KernelField::norm_at(std::size_t t, int iy) const {
  const std::size_t base = (t * grid.normal.size() + iy) * rows * cols;
  double s = 0.0;
  for (int q = 0; q < rows * cols; ++q) s += std::norm(values[base + q]);
  return std::sqrt(s);
}

Grid kernel_grid(int n, int m, Complex lambda, int tangential_points, int normal_points) {
  const double s = std::pow(std::abs(lambda), -1.0 / (2 * m));
  return Grid{TangentialGrid::uniform(n, tangential_points, 40.0 * s), NormalGrid::graded(20.0 * s, normal_points)};
}

KernelField compute_kernel_field(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                                 const Grid& grid, const MultiIndex& alpha) {
  const int m = sym.half_order();
  const int N = sym.components();
  const int n = sym.tangential_dim();
  if (!alpha.entries.empty() && (static_cast<int>(alpha.size()) != n + 1 || alpha.order() > 2 * m)) {
    throw Error(ErrorKind::Domain, "kernel derivative index must have n + 1 entries and order <= 2m");
  }
  KernelField K;
  K.lambda = lambda;
  K.m = m;
  K.N = N;
  K.rows = 2 * m * N;
  K.cols = spec.data_dim();
  K.alpha = alpha.entries.empty() ? MultiIndex(std::vector<int>(n + 1, 0)) : alpha;
  K.grid = grid;
  const int ny = grid.normal.size();
  const std::size_t Mt = grid.tangential.size();
  const std::size_t block = static_cast<std::size_t>(K.rows) * K.cols;
  K.values.assign(Mt * ny * block, 0.0);
  const int ay = K.alpha[n];

  parallel_for(Mt, [&](std::size_t t) {
    const auto xi = grid.tangential.wavenumber(t);
    const FrequencySetup fs = setup_frequency(sym, spec, lambda, xi);
    const double rho = fs.scaled.rho;
    Complex tangential = 1.0;
    for (int d = 0; d < n; ++d) tangential *= std::pow(Complex(xi[d]), K.alpha[d]);
    CMatrix left = CMatrix::Identity(K.rows, K.rows);
    for (int q = 0; q < ay; ++q) left = (rho * fs.companion.A0) * left;
    left *= tangential * std::pow(rho, -2 * m);
    const CMatrix Q = fs.split.stable_basis();
    const CMatrix T11 = fs.split.stable_block();
    CMatrix E = fs.map.stacked.partialPivLu().solve(CMatrix::Identity(K.cols, K.cols));
    for (int iy = 0; iy < ny; ++iy) {
      if (iy > 0) E = matrix_exp(rho * (grid.normal.y[iy] - grid.normal.y[iy - 1]) * T11) * E;
      const CMatrix V = left * (Q * E);
      Complex* out = &K.values[(t * ny + iy) * block];
      for (int r = 0; r < K.rows; ++r) {
        for (int c = 0; c < K.cols; ++c) out[r * K.cols + c] = V(r, c);
      }
    }
  });
  fft_many(K.values, grid.tangential.points, ny * block, true);
  // The inverse DFT divides by Mt; the continuous inverse transform needs 1 / L^n = 1 / (Mt cell).
  const double factor = 1.0 / grid.tangential.cell_volume();
  for (auto& v : K.values) v *= factor;
  for (const auto& v : K.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw Error(ErrorKind::Numerical, "kernel field is not finite");
  }
  return K;
}

Field spectral_boundary_states(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, Complex lambda,
                               const Grid& grid, const std::vector<TraceField>& g) {
  const int N = sym.components();
  const int dim = 2 * sym.half_order() * N;
  const auto& slots = spec.slots();
  if (g.size() != slots.size()) throw Error(ErrorKind::Dimension, "one data field per slot expected");
  std::vector<std::vector<Complex>> g_hat;
  for (const auto& field : g) {
    g_hat.push_back(field.data);
    fft_many(g_hat.back(), grid.tangential.points, N, false);
  }
  const int ny = grid.normal.size();
  Field out(grid, dim);
  parallel_for(grid.tangential.size(), [&](std::size_t t) {
    const auto xi = grid.tangential.wavenumber(t);
    const FrequencySetup fs = setup_frequency(sym, spec, lambda, xi);
    const double rho = fs.scaled.rho;
    CVector data(spec.data_dim());
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const CVector gs = Eigen::Map<const CVector>(&g_hat[s][t * N], N);
      data.segment(slots[s].offset, slots[s].rank) = fs.rows[s].basis.adjoint() * gs / std::pow(rho, slots[s].order);
    }
    CVector zeta = fs.map.stacked.partialPivLu().solve(data);
    const CMatrix Q = fs.split.stable_basis();
    const CMatrix T11 = fs.split.stable_block();
    for (int iy = 0; iy < ny; ++iy) {
      if (iy > 0) zeta = matrix_exp(rho * (grid.normal.y[iy] - grid.normal.y[iy - 1]) * T11) * zeta;
      const CVector v = Q * zeta;
      for (int c = 0; c < dim; ++c) out.at(t, iy, c) = v(c);
    }
  });
  fft_many(out.data, grid.tangential.points, static_cast<std::size_t>(ny) * dim, true);
  return out;
}

Field convolve_kernel(const KernelField& kernel, const BoundaryOperatorSpec& spec, const std::vector<TraceField>& h) {
  const auto& tg = kernel.grid.tangential;
  const int N = kernel.N;
  const auto& slots = spec.slots();
  if (h.size() != slots.size()) throw Error(ErrorKind::Dimension, "one data field per slot expected");
  const std::size_t Mt = tg.size();
  // Stacked coordinates of the data at every boundary point.
  std::vector<CVector> stacked(Mt, CVector::Zero(kernel.cols));
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const CMatrix& basis = spec.row(slots[s].row).components[slots[s].component].projection.range_basis();
    for (std::size_t t = 0; t < Mt; ++t) {
      stacked[t].segment(slots[s].offset, slots[s].rank) = basis.adjoint() * Eigen::Map<const CVector>(&h[s].data[t * N], N);
    }
  }
  const int ny = kernel.grid.normal.size();
  const double cell = tg.cell_volume();
  Field out(kernel.grid, kernel.rows);
  parallel_for(Mt, [&](std::size_t t) {
    const auto xi = tg.unflatten(t);
    for (std::size_t z = 0; z < Mt; ++z) {
      const auto zi = tg.unflatten(z);
      std::size_t diff = 0;
      for (int d = 0; d < tg.dims(); ++d) {
        diff = diff * tg.points[d] + static_cast<std::size_t>(((xi[d] - zi[d]) % tg.points[d] + tg.points[d]) % tg.points[d]);
      }
      for (int iy = 0; iy < ny; ++iy) {
        const CVector v = kernel.at(diff, iy) * stacked[z] * cell;
        for (int c = 0; c < kernel.rows; ++c) out.at(t, iy, c) += v(c);
      }
    }
  });
  return out;
}

namespace {

// Linear interpolation of log p on a logarithmic r grid.
class LogPTable {
 public:
  LogPTable(int k, int nu, int n, double r_lo, double r_hi, int points = 320)
      : lo_(std::log(r_lo)), hi_(std::log(r_hi)), values_(points) {
    for (int i = 0; i < points; ++i) {
      values_[i] = log_p_kernel(k, nu, n, std::exp(lo_ + (hi_ - lo_) * i / (points - 1)), 1e-11);
    }
  }
  double operator()(double r) const {
    const double x = std::clamp(std::log(std::max(r, 1e-300)), lo_, hi_);
    const double pos = (x - lo_) / (hi_ - lo_) * (values_.size() - 1);
    const std::size_t i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
    const double w = pos - i;
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

 private:
  double lo_, hi_;
  std::vector<double> values_;
};

}  // namespace

DecayFit verify_kernel_decay(const KernelField& field, const DecayFitOptions& options) {
  const int m = field.m;
  const auto& tg = field.grid.tangential;
  const int n = tg.dims();
  const int order = field.alpha.order();
  DecayFit fit;
  fit.exponent = static_cast<double>(n - 2 * m + order) / (2 * m);
  const double mod = std::abs(field.lambda);
  const double amp = std::pow(mod, fit.exponent);
  const double len = std::pow(mod, 1.0 / (2 * m));
  const int ny = field.grid.normal.size();

  std::vector<double> r_scaled, log_f;
  double f_max = 0.0;
  std::vector<double> values;
  std::vector<double> radii;
  for (std::size_t t = 0; t < tg.size(); ++t) {
    const auto idx = tg.unflatten(t);
    double x2 = 0.0;
    for (int d = 0; d < n; ++d) {
      const int k = idx[d] <= tg.points[d] / 2 ? idx[d] : idx[d] - tg.points[d];
      const double x = tg.lengths[d] * k / tg.points[d];
      x2 += x * x;
    }
    for (int iy = 0; iy < ny; ++iy) {
      const double v = field.norm_at(t, iy) / amp;
      values.push_back(v);
      radii.push_back(len * (std::sqrt(x2) + field.grid.normal.y[iy]));
      f_max = std::max(f_max, v);
    }
  }
  fit.points = static_cast<int>(values.size());
  if (!(f_max > 0.0)) {
    fit.note = "kernel vanishes identically";
    return fit;
  }
  double r_max = 0.0, r_pos = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > options.noise_floor * f_max) {
      r_scaled.push_back(radii[i]);
      log_f.push_back(std::log(values[i]));
      r_max = std::max(r_max, radii[i]);
      if (radii[i] > 0.0) r_pos = std::min(r_pos, radii[i]);
    }
  }
  const LogPTable table(2 * m, order - 1, n + 1, std::max(1e-6, 0.5 * options.c_min * std::min(r_pos, 1.0)),
                        1.01 * options.c_max * std::max(r_max, 1.0));
  // Envelope of the values on logarithmic bins of r~ (used by the fit objective and the report).
  const int bins = 40;
  const double env_lo = std::max(r_pos, 1e-3), env_hi = std::max(r_max, 2.0 * env_lo);
  std::vector<double> env(bins, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (radii[i] < env_lo || !(values[i] > options.noise_floor * f_max)) continue;
    const int bin = std::min(bins - 1, static_cast<int>(std::log(radii[i] / env_lo) / std::log(env_hi / env_lo) * bins));
    env[bin] = std::max(env[bin], values[i]);
  }
  for (int i = 0; i < bins; ++i) {
    if (env[i] > 0.0) {
      fit.envelope_r.push_back(env_lo * std::pow(env_hi / env_lo, (i + 0.5) / bins));
      fit.envelope_value.push_back(env[i]);
    }
  }

  const std::size_t total = values.size();
  const auto allowed = static_cast<std::size_t>(std::floor((1.0 - options.quantile) * total));
  std::vector<double> lr(r_scaled.size());
  // For a given c, M is the smallest constant for which the bound holds at the
  // requested fraction of points; the objective is the log misfit of M p(c r~)
  // against the envelope, so that every resolved distance scale carries equal
  // weight (below fit_r_min the grid does not resolve singular kernels).
  auto evaluate = [&](double c, double* logM) {
    for (std::size_t i = 0; i < lr.size(); ++i) lr[i] = log_f[i] - table(c * r_scaled[i]);
    std::vector<double> sorted = lr;
    std::sort(sorted.begin(), sorted.end());
    double lm = -std::numeric_limits<double>::infinity();
    if (sorted.size() > allowed) lm = sorted[sorted.size() - 1 - allowed];
    double J = 0.0;
    for (std::size_t b = 0; b < fit.envelope_r.size(); ++b) {
      if (fit.envelope_r[b] < options.fit_r_min) continue;
      const double d = lm + table(c * fit.envelope_r[b]) - std::log(fit.envelope_value[b]);
      J += d * d;
    }
    if (logM) *logM = lm;
    return J;
  };
  // Log-grid scan, then golden-section refinement on the bracketing interval.
  const int scan = 61;
  double best_J = std::numeric_limits<double>::infinity();
  int best = 0;
  auto c_at = [&](int i) { return options.c_min * std::pow(options.c_max / options.c_min, static_cast<double>(i) / (scan - 1)); };
  for (int i = 0; i < scan; ++i) {
    const double J = evaluate(c_at(i), nullptr);
    if (J < best_J) {
      best_J = J;
      best = i;
    }
  }
  double a = std::log(c_at(std::max(best - 1, 0))), b = std::log(c_at(std::min(best + 1, scan - 1)));
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double J1 = evaluate(std::exp(x1), nullptr), J2 = evaluate(std::exp(x2), nullptr);
  for (int it = 0; it < 40; ++it) {
    if (J1 < J2) {
      b = x2; x2 = x1; J2 = J1; x1 = b - g * (b - a); J1 = evaluate(std::exp(x1), nullptr);
    } else {
      a = x1; x1 = x2; J1 = J2; x2 = a + g * (b - a); J2 = evaluate(std::exp(x2), nullptr);
    }
  }
  fit.c = std::exp(0.5 * (a + b));
  double logM = 0.0;
  evaluate(fit.c, &logM);
  fit.M = std::exp(logM);
  std::size_t satisfied = total - lr.size();
  for (double v : lr) satisfied += (v <= logM + 1e-12) ? 1 : 0;
  fit.coverage = static_cast<double>(satisfied) / total;
  fit.feasible = fit.M <= options.M_max && fit.coverage >= options.quantile;
  if (!fit.feasible) fit.note = "no (M, c) in the search box satisfies the bound";

  return fit;
}

}  // namespace lopashka
