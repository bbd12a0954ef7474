#include "lopashka/rbounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lopashka/error.hpp"
#include "lopashka/parallel.hpp"

namespace lopashka {

namespace {

// Elementwise |z|^{p-2} z (zero at zero).
CMatrix duality_map(const CMatrix& Z, double p) {
  CMatrix out(Z.rows(), Z.cols());
  for (Eigen::Index i = 0; i < Z.size(); ++i) {
    const double a = std::abs(Z(i));
    out(i) = a > 0.0 ? std::pow(a, p - 2.0) * Z(i) : Complex(0.0);
  }
  return out;
}

double mean_power(const CMatrix& Z, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < Z.size(); ++i) s += std::pow(std::abs(Z(i)), p);
  return s / static_cast<double>(Z.rows());
}

// Rows of X are x_nu; returns rows (T_nu x_nu)^T.
CMatrix apply_rows(const std::vector<const CMatrix*>& ops, const CMatrix& X, bool adjoint) {
  CMatrix Y(X.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const CVector x = X.row(r).transpose();
    Y.row(r) = (adjoint ? CVector(ops[r]->adjoint() * x) : CVector(*ops[r] * x)).transpose();
  }
  return Y;
}

double norm_p(const CVector& v, double p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::pow(std::abs(v(i)), p);
  return std::pow(s, 1.0 / p);
}

CVector random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd;
  CVector v(d);
  for (int i = 0; i < d; ++i) v(i) = Complex(nd(rng), nd(rng));
  return v;
}

double lgamma_int(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

OperatorFamily make_family(const std::function<CMatrix(Complex)>& generator,
                           const std::vector<Complex>& index_set) {
  OperatorFamily f;
  for (const Complex& z : index_set) {
    CMatrix T = generator(z);
    if (!T.allFinite()) throw Error(ErrorKind::Domain, "operator family member is not finite");
    if (!f.members.empty() && (T.rows() != f.members[0].rows() || T.cols() != f.members[0].cols())) {
      throw Error(ErrorKind::Dimension, "operator family members differ in size");
    }
    f.members.push_back(std::move(T));
    f.index.push_back(z);
  }
  return f;
}

RMatrix sign_patterns(int k, int sampled, std::uint64_t seed) {
  if (k <= 0) return RMatrix(0, 0);
  if (k <= 12) {
    const int count = 1 << (k - 1);
    RMatrix S(count, k);
    for (int r = 0; r < count; ++r) {
      S(r, 0) = 1.0;
      for (int c = 1; c < k; ++c) S(r, c) = ((r >> (c - 1)) & 1) ? -1.0 : 1.0;
    }
    return S;
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  RMatrix S(sampled, k);
  for (int r = 0; r < sampled; ++r) {
    S(r, 0) = 1.0;
    for (int c = 1; c < k; ++c) S(r, c) = coin(rng) ? -1.0 : 1.0;
  }
  return S;
}

double rademacher_ratio(const std::vector<const CMatrix*>& ops, const CMatrix& X, double p,
                        const RMatrix& signs) {
  const CMatrix S = signs.cast<Complex>();
  const double num = mean_power(S * apply_rows(ops, X, false), p);
  const double den = mean_power(S * X, p);
  if (den <= 0.0) return 0.0;
  return std::pow(num / den, 1.0 / p);
}

double operator_norm_p(const CMatrix& A, double p, int iterations) {
  if (std::abs(p - 2.0) < 1e-14) {
    Eigen::JacobiSVD<CMatrix> svd(A);
    return svd.singularValues()(0);
  }
  const double q = p / (p - 1.0);
  double best = 0.0;
  // Start from the top right singular vector and from every unit vector.
  std::vector<CVector> starts;
  Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinV);
  starts.push_back(svd.matrixV().col(0));
  for (int i = 0; i < A.cols(); ++i) starts.push_back(CVector::Unit(A.cols(), i));
  for (CVector x : starts) {
    x /= norm_p(x, p);
    for (int it = 0; it < iterations; ++it) {
      const CVector y = A * x;
      const double ratio = norm_p(y, p);
      best = std::max(best, ratio);
      if (ratio == 0.0) break;
      const CVector w = A.adjoint() * duality_map(y, p);
      CVector next = duality_map(w, q);
      const double nn = norm_p(next, p);
      if (nn == 0.0) break;
      next /= nn;
      if ((next - x).norm() < 1e-14) {
        x = next;
        break;
      }
      x = next;
    }
    best = std::max(best, norm_p(A * x, p));
  }
  return best;
}

RBoundEstimate estimate_rbound(const OperatorFamily& family, const RBoundOptions& o) {
  if (o.trials < 100) throw Error(ErrorKind::Precondition, "estimate_rbound needs at least 100 trials");
  if (family.members.empty()) throw Error(ErrorKind::Precondition, "empty operator family");
  if (!(o.p >= 1.0)) throw Error(ErrorKind::Precondition, "p must be >= 1");
  const int d = family.dim();
  const int k = std::max(1, o.subset_size);
  const double p = o.p;

  std::vector<double> per_trial(o.trials, 0.0);
  parallel_for(static_cast<std::size_t>(o.trials), [&](std::size_t t) {
    std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ULL + 7919 * t + 1);
    std::uniform_int_distribution<std::size_t> pick(0, family.members.size() - 1);
    std::vector<const CMatrix*> ops(k);
    for (auto& op : ops) op = &family.members[pick(rng)];
    const RMatrix signs_r = sign_patterns(k, o.sampled_signs, rng());
    const CMatrix S = signs_r.cast<Complex>();
    CMatrix X(k, d);
    for (int r = 0; r < k; ++r) X.row(r) = random_vector(rng, d).transpose();

    auto objective = [&](const CMatrix& Xc, CMatrix* grad) {
      const CMatrix Z = S * Xc;
      const CMatrix TZ = S * apply_rows(ops, Xc, false);
      const double den = mean_power(Z, p);
      const double num = mean_power(TZ, p);
      if (den <= 0.0) return 0.0;
      if (grad) {
        const CMatrix gnum = apply_rows(ops, S.transpose() * duality_map(TZ, p), true);
        const CMatrix gden = S.transpose() * duality_map(Z, p);
        *grad = (num > 0.0 ? gnum / num : CMatrix(CMatrix::Zero(k, d))) - gden / den;
      }
      return std::pow(num / den, 1.0 / p);
    };

    CMatrix G;
    double value = objective(X, &G);
    double step = 1.0;
    for (int it = 0; it < o.iterations; ++it) {
      const double gnorm = G.norm();
      if (gnorm == 0.0 || !std::isfinite(gnorm)) break;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls) {
        const CMatrix trial = X + (step * X.norm() / gnorm) * G;
        CMatrix Gt;
        const double v = objective(trial, &Gt);
        if (v > value) {
          X = trial / trial.norm();
          value = v;
          G = Gt * trial.norm();
          step *= 2.0;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    per_trial[t] = value;
  });

  RBoundEstimate est;
  est.p = p;
  est.trials = o.trials;
  double mean = 0.0;
  for (double v : per_trial) {
    est.estimate = std::max(est.estimate, v);
    mean += v;
  }
  mean /= o.trials;
  double var = 0.0;
  for (double v : per_trial) var += (v - mean) * (v - mean);
  est.confidence_spread = std::sqrt(var / std::max(1, o.trials - 1));
  std::vector<double> norms(family.members.size());
  parallel_for(norms.size(), [&](std::size_t i) { norms[i] = operator_norm_p(family.members[i], p); });
  est.sup_norm = *std::max_element(norms.begin(), norms.end());
  return est;
}

NeumannCheck neumann_rbound_check(const OperatorFamily& family, const RBoundOptions& options, double tol,
                                  double rho_known) {
  NeumannCheck c;
  c.rho = rho_known > 0.0 ? rho_known : estimate_rbound(family, options).estimate;
  if (!(c.rho < 1.0)) throw Error(ErrorKind::Precondition, "Neumann check needs an R-bound rho < 1");
  OperatorFamily resolvents;
  const int d = family.dim();
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    resolvents.members.push_back((CMatrix::Identity(d, d) - family.members[i]).inverse());
    resolvents.index.push_back(family.index.empty() ? Complex(0.0) : family.index[i]);
  }
  c.resolvent_estimate = estimate_rbound(resolvents, options).estimate;
  c.bound = 1.0 / (1.0 - c.rho);
  c.passes = c.resolvent_estimate <= c.bound * (1.0 + tol);
  return c;
}

SectorCheck sector_derivative_check(const std::function<CMatrix(Complex)>& T, double phi,
                                     double phi_prime, const RBoundOptions& options, int moduli,
                                     int angles, double tol) {
  if (!(phi_prime > phi && phi_prime < kPi && phi > 0.0)) {
    throw Error(ErrorKind::Precondition, "sector check needs 0 < phi < phi' < pi");
  }
  auto sector = [&](double half_opening) {
    std::vector<Complex> pts;
    for (int r = 0; r < moduli; ++r) {
      const double mod = std::pow(10.0, -3.0 + 6.0 * r / std::max(1, moduli - 1));
      for (int a = 0; a < angles; ++a) {
        const double t = half_opening * (2.0 * a / std::max(1, angles - 1) - 1.0);
        pts.push_back(std::polar(mod, t));
      }
    }
    return pts;
  };
  SectorCheck c;
  c.C = estimate_rbound(make_family(T, sector(kPi - phi)), options).estimate;

  const auto narrow = sector(kPi - phi_prime);
  OperatorFamily derivative;
  double disagreement = 0.0;
  for (const Complex& lam : narrow) {
    const double h = 1e-5 * (1.0 + std::abs(lam));
    const CMatrix d1 = (T(lam + h) - T(lam - h)) / (2.0 * h);
    const CMatrix d2 = (T(lam + 0.5 * h) - T(lam - 0.5 * h)) / h;
    const double scale = d2.norm() + T(lam).norm() / (1.0 + std::abs(lam)) + 1e-300;
    disagreement = std::max(disagreement, (d1 - d2).norm() / scale);
    derivative.members.push_back(lam * d2);
    derivative.index.push_back(lam);
  }
  c.fd_disagreement = disagreement;
  c.fd_stable = disagreement <= 1e-5;
  c.derivative_estimate = estimate_rbound(derivative, options).estimate;
  const double s = std::sin(phi_prime - phi);
  c.bound = c.C / (s * s);
  c.passes = c.fd_stable && c.derivative_estimate <= c.bound * (1.0 + tol);
  return c;
}

namespace {

std::vector<double> signed_log_grid(const MikhlinGrid& g) {
  std::vector<double> v;
  for (int i = 0; i < g.points_per_sign; ++i) {
    const double t = g.points_per_sign == 1 ? 0.0 : static_cast<double>(i) / (g.points_per_sign - 1);
    const double x = g.min_abs * std::pow(g.max_abs / g.min_abs, t);
    v.push_back(x);
    v.push_back(-x);
  }
  return v;
}

std::vector<std::vector<int>> binary_indices(int n) {
  std::vector<std::vector<int>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<int> a(n);
    for (int i = 0; i < n; ++i) a[i] = (mask >> i) & 1;
    out.push_back(a);
  }
  return out;
}

// |xi^alpha d^alpha f(xi)| by central differences with steps h_i = rel |xi_i|.
template <class F>
double weighted_derivative(const F& f, const std::vector<double>& xi, const std::vector<int>& alpha,
                           double rel) {
  const int n = static_cast<int>(xi.size());
  std::vector<int> dirs;
  for (int i = 0; i < n; ++i)
    if (alpha[i]) dirs.push_back(i);
  const int q = static_cast<int>(dirs.size());
  Complex acc = 0.0;
  std::vector<double> pt(xi);
  double weight = 1.0;
  for (int i : dirs) weight *= std::abs(xi[i]) / (2.0 * rel * std::abs(xi[i]));
  for (int mask = 0; mask < (1 << q); ++mask) {
    int minus = 0;
    for (int s = 0; s < q; ++s) {
      const int i = dirs[s];
      const bool neg = (mask >> s) & 1;
      minus += neg;
      pt[i] = xi[i] + (neg ? -1.0 : 1.0) * rel * std::abs(xi[i]);
    }
    acc += (minus % 2 ? -1.0 : 1.0) * f(pt);
  }
  return std::abs(acc) * weight;
}

}  // namespace

MikhlinTable mikhlin_symbol_check(const std::function<Complex(std::span<const double>)>& m, int n,
                                  const MikhlinGrid& grid) {
  MikhlinTable t;
  t.alphas = binary_indices(n);
  t.sups.assign(t.alphas.size(), 0.0);
  const auto axis = signed_log_grid(grid);
  const std::size_t total = static_cast<std::size_t>(std::pow(axis.size(), n));
  auto f = [&](const std::vector<double>& x) { return m(std::span<const double>(x)); };
  std::vector<std::vector<double>> local(total, std::vector<double>(t.alphas.size()));
  parallel_for(total, [&](std::size_t idx) {
    std::vector<double> xi(n);
    std::size_t r = idx;
    for (int i = 0; i < n; ++i) {
      xi[i] = axis[r % axis.size()];
      r /= axis.size();
    }
    for (std::size_t a = 0; a < t.alphas.size(); ++a) {
      local[idx][a] = weighted_derivative(f, xi, t.alphas[a], grid.relative_step);
    }
  });
  for (const auto& l : local)
    for (std::size_t a = 0; a < l.size(); ++a) t.sups[a] = std::max(t.sups[a], l[a]);
  return t;
}

ResolventSymbolReport resolvent_symbol_uniformity(int m, Complex lambda, int n, int kmax,
                                                  const std::vector<double>& mus,
                                                  const MikhlinGrid& grid, double spread_limit) {
  ResolventSymbolReport rep;
  rep.alphas = binary_indices(n);
  const std::size_t na = rep.alphas.size();
  rep.sups.assign(na, std::vector<double>(kmax, 0.0));
  const auto axis = signed_log_grid(grid);
  const std::size_t total = static_cast<std::size_t>(std::pow(axis.size(), n));
  // sups per grid point, reduced afterwards in index order.
  std::vector<std::vector<double>> local(total, std::vector<double>(na * kmax, 0.0));
  parallel_for(total, [&](std::size_t idx) {
    std::vector<double> xi(n);
    std::size_t r = idx;
    for (int i = 0; i < n; ++i) {
      xi[i] = axis[r % axis.size()];
      r /= axis.size();
    }
    for (double mu : mus) {
      auto base = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        const Complex root = std::pow(lambda + std::pow(s, m), 1.0 / (2.0 * m));
        return mu / (mu + root);
      };
      for (int k = 1; k <= kmax; ++k) {
        auto f = [&](const std::vector<double>& x) {
          const Complex w = base(x);
          Complex pw = 1.0;
          for (int i = 0; i < k; ++i) pw *= w;
          return pw;
        };
        for (std::size_t a = 0; a < na; ++a) {
          double& slot = local[idx][a * kmax + (k - 1)];
          slot = std::max(slot, weighted_derivative(f, xi, rep.alphas[a], grid.relative_step));
        }
      }
    }
  });
  for (const auto& l : local)
    for (std::size_t a = 0; a < na; ++a)
      for (int k = 0; k < kmax; ++k) rep.sups[a][k] = std::max(rep.sups[a][k], l[a * kmax + k]);
  rep.max_spread = 1.0;
  for (std::size_t a = 0; a < na; ++a) {
    const auto [mn, mx] = std::minmax_element(rep.sups[a].begin(), rep.sups[a].end());
    const double spread = *mx < 1e-12 ? 1.0 : *mx / *mn;
    rep.spread.push_back(spread);
    rep.max_spread = std::max(rep.max_spread, spread);
  }
  rep.passes = std::isfinite(rep.max_spread) && rep.max_spread < spread_limit;
  return rep;
}

bool combinatorial_inequality_holds(double a, double b, int M, int N, double* log_margin) {
  if (a < 0 || b < 0 || M < 0 || N < 0) throw Error(ErrorKind::Domain, "combinatorial: negative input");
  const double ninf = -std::numeric_limits<double>::infinity();
  auto log_pow = [&](double x, int e) { return e == 0 ? 0.0 : (x > 0 ? e * std::log(x) : ninf); };
  const double lhs = log_pow(a, M) + log_pow(b, N);
  const double rhs = lgamma_int(M) + lgamma_int(N) - lgamma_int(M + N) + log_pow(a + b, M + N);
  double margin;
  if (lhs == ninf) {
    margin = ninf;
  } else {
    margin = lhs - rhs;
  }
  if (log_margin) *log_margin = margin;
  return margin <= 1e-12 * std::max(1.0, std::abs(rhs));
}

CombinatorialReport combinatorial_inequality_test(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 100.0);
  std::uniform_int_distribution<int> ui(0, 20);
  CombinatorialReport rep;
  rep.samples = samples;
  rep.worst_log_margin = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double a = ud(rng);
    const double b = ud(rng);
    const int M = ui(rng);
    const int N = ui(rng);
    double margin;
    if (!combinatorial_inequality_holds(a, b, M, N, &margin)) ++rep.violations;
    rep.worst_log_margin = std::max(rep.worst_log_margin, margin);
  }
  return rep;
}

double khintchine_lower(double p) {
  if (p >= 2.0) return 1.0;
  const double p0 = 1.84742;
  if (p < p0) return std::pow(2.0, 0.5 - 1.0 / p);
  return std::sqrt(2.0) * std::pow(std::tgamma((p + 1.0) / 2.0) / std::sqrt(kPi), 1.0 / p);
}

double khintchine_upper(double p) {
  if (p <= 2.0) return 1.0;
  return std::sqrt(2.0) * std::pow(std::tgamma((p + 1.0) / 2.0) / std::sqrt(kPi), 1.0 / p);
}

SquareFunctionCheck square_function_check(const std::vector<RMatrix>& family, double p,
                                          std::uint64_t seed, int subset_size) {
  if (family.empty()) throw Error(ErrorKind::Precondition, "empty family");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<std::size_t> pick(0, family.size() - 1);
  const int k = subset_size;
  const int d = static_cast<int>(family[0].rows());
  RMatrix X(k, d), Y(k, d);
  for (int r = 0; r < k; ++r) {
    for (int i = 0; i < d; ++i) X(r, i) = nd(rng);
    Y.row(r) = (family[pick(rng)] * X.row(r).transpose()).transpose();
  }
  const RMatrix S = sign_patterns(k, 0, 0);
  auto rad = [&](const RMatrix& V) {
    const RMatrix Z = S * V;
    double s = 0.0;
    for (Eigen::Index i = 0; i < Z.size(); ++i) s += std::pow(std::abs(Z(i)), p);
    return std::pow(s / Z.rows(), 1.0 / p);
  };
  auto square = [&](const RMatrix& V) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::pow(V.col(i).squaredNorm(), p / 2.0);
    return std::pow(s, 1.0 / p);
  };
  SquareFunctionCheck c;
  c.rademacher_ratio = rad(Y) / rad(X);
  c.square_ratio = square(Y) / square(X);
  const double A = khintchine_lower(p);
  const double B = khintchine_upper(p);
  c.lower = c.square_ratio * A / B;
  c.upper = c.square_ratio * B / A;
  c.passes = c.rademacher_ratio >= c.lower * (1 - 1e-12) && c.rademacher_ratio <= c.upper * (1 + 1e-12);
  return c;
}

}  // namespace lopashka
