#include <cmath>
#include <random>

#include <boost/math/special_functions/expint.hpp>
#include <gtest/gtest.h>

#include "lopashka/error.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/halfspace.hpp"
#include "lopashka/kernels.hpp"

using namespace lopashka;

TEST(PKernelTest, ClosedForms) {
  // Exponent k - 1 - nu = 0, n = 2: int_0^inf e^{-(s+1) r} ds = e^{-r} / r.
  EXPECT_NEAR(p_kernel(1, 0, 2, 1.0), std::exp(-1.0), 1e-14);
  for (double r : {0.01, 0.3, 2.0, 17.0}) {
    // Exponent 0, general n: e^{-r} Gamma(n-1) / r^{n-1}.
    for (int n : {2, 3, 4}) {
      const double exact = std::exp(-r) * std::tgamma(n - 1) / std::pow(r, n - 1);
      EXPECT_NEAR(p_kernel(3, 2, n, r) / exact, 1.0, 1e-10) << r << " " << n;
    }
    // Exponent 1, n = 2: int_1^inf e^{-t r} / t dt = E_1(r).
    EXPECT_NEAR(p_kernel(2, 0, 2, r) / boost::math::expint(1, r), 1.0, 1e-10) << r;
  }
}

TEST(PKernelTest, MonotoneDecayAndDomain) {
  EXPECT_GT(p_kernel(2, 0, 3, 1.0), p_kernel(2, 0, 3, 2.0));
  EXPECT_LT(p_kernel(2, -1, 2, 400.0), 1e-170);
  EXPECT_EQ(p_kernel(2, -1, 2, 1000.0), 0.0);
  EXPECT_NEAR(log_p_kernel(2, -1, 2, 1000.0), -1000.0 - std::log(1000.0), 1e-2);
  for (auto bad : {std::tuple{2, 0, 1, 1.0}, std::tuple{2, 0, 2, 0.0}, std::tuple{2, 0, 2, -1.0}}) {
    try {
      p_kernel(std::get<0>(bad), std::get<1>(bad), std::get<2>(bad), std::get<3>(bad));
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Domain);
    }
  }
}

TEST(PKernelTest, CompleteMonotonicitySampled) {
  for (auto [k, nu, n] : {std::tuple{2, -1, 2}, std::tuple{2, 0, 2}, std::tuple{2, 1, 3}, std::tuple{4, 0, 3},
                          std::tuple{1, 0, 2}}) {
    EXPECT_GE(complete_monotonicity_margin(k, nu, n), -1e-10) << k << nu << n;
  }
}

TEST(PKernelTest, QuadratureRefinement) {
  for (double r : {0.05, 1.0, 8.0}) {
    for (double tol : {1e-8, 1e-10}) {
      const double a = p_kernel(2, 0, 3, r, tol);
      const double b = p_kernel(2, 0, 3, r, tol / 2);
      EXPECT_LT(std::abs(a - b), tol * a);
    }
  }
}

TEST(IntegralIdentityTest, ParameterGrid) {
  const auto example = lemma_integral_identity_check(2, 0, 2, 1.0, 1.0);
  EXPECT_LE(example.residual, 1e-6);
  for (int k : {1, 2, 4}) {
    for (auto [c, y] : {std::pair{0.5, 2.0}, std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
      for (int n : {2, 3}) {
        EXPECT_LE(lemma_integral_identity_check(k, 0, n, c, y).residual, 1e-6) << k << " " << c << " " << n;
      }
    }
  }
}

TEST(IntegralIdentityTest, ScalingAndDecay) {
  // Substituting r = 2 r' gives LHS(2c, y/2) = 2^{-n} LHS(c, y).
  for (int n : {2, 3}) {
    const auto base = lemma_integral_identity_check(2, 0, n, 1.0, 1.0);
    const auto scaled = lemma_integral_identity_check(2, 0, n, 2.0, 0.5);
    EXPECT_NEAR(scaled.lhs / base.lhs, std::pow(2.0, -n), 1e-8);
  }
  const auto far = lemma_integral_identity_check(2, 0, 2, 1.0, 60.0);
  EXPECT_LT(far.lhs, 1e-26);
  EXPECT_LT(far.rhs, 1e-26);
}

namespace {

Grid small_grid(int n, Complex lambda) { return kernel_grid(n, 1, lambda, 64, 24); }

std::vector<TraceField> random_slots(const BoundaryOperatorSpec& spec, const TangentialGrid& tg, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int N = spec.components();
  std::vector<TraceField> out;
  for (const auto& slot : spec.slots()) {
    const CMatrix& P = spec.row(slot.row).components[slot.component].projection.matrix();
    TraceField g(tg, N);
    for (int k = -3; k <= 3; ++k) {
      CVector v(N);
      for (int c = 0; c < N; ++c) v(c) = Complex(nd(rng), nd(rng));
      v = P * v;
      for (std::size_t t = 0; t < tg.size(); ++t) {
        const Complex e = std::exp(kI * (2.0 * kPi * k * tg.coordinate(t)[0] / tg.lengths[0]));
        for (int c = 0; c < N; ++c) g.at(t, c) += e * v(c);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

double rel_max_diff(const Field& a, const Field& b) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    d = std::max(d, std::abs(a.data[i] - b.data[i]));
    s = std::max(s, std::abs(b.data[i]));
  }
  return d / s;
}

}  // namespace

TEST(KernelFieldTest, ConvolutionMatchesSpectralSolve) {
  for (const auto& name : {"heat-dirichlet", "catalysis", "biharmonic"}) {
    const auto p = make_fixture(name);
    const Complex lambda = std::polar(2.0, 0.5);
    const int m = p.symbol.half_order();
    const Grid grid = kernel_grid(1, m, lambda, 64, 24);
    const auto K = compute_kernel_field(p.symbol, p.boundary, lambda, grid);
    EXPECT_EQ(K.rows, 2 * m * p.symbol.components());
    EXPECT_EQ(K.cols, m * p.symbol.components());
    const auto g = random_slots(p.boundary, grid.tangential, 11);
    // The kernel acts on rho^{2m-k}-weighted data.
    std::vector<TraceField> h;
    for (std::size_t s = 0; s < g.size(); ++s) {
      const int k = p.boundary.slots()[s].order;
      h.push_back(weight_multiplier(lambda, g[s], m, (2.0 * m - k) / (2.0 * m)));
    }
    const Field conv = convolve_kernel(K, p.boundary, h);
    const Field direct = spectral_boundary_states(p.symbol, p.boundary, lambda, grid, g);
    EXPECT_LE(rel_max_diff(conv, direct), 1e-8) << name;

    // The first block of the states is the half-space solution with f = 0.
    HalfSpaceProblem problem{p.symbol, p.boundary, lambda, grid, Field(), g};
    const auto sol = solve_halfspace(problem);
    Field first(grid, p.symbol.components());
    for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
      for (int iy = 0; iy < grid.normal.size(); ++iy) {
        for (int c = 0; c < first.components; ++c) first.at(t, iy, c) = direct.at(t, iy, c);
      }
    }
    EXPECT_LE(rel_max_diff(sol.u, first), 1e-8) << name;
  }
}

TEST(KernelFieldTest, ZeroDataGivesZero) {
  const auto p = heat_dirichlet();
  const Grid grid = small_grid(1, 1.0);
  const auto K = compute_kernel_field(p.symbol, p.boundary, 1.0, grid);
  const Field v = convolve_kernel(K, p.boundary, {TraceField(grid.tangential, 1)});
  EXPECT_EQ(max_abs(v), 0.0);
}

TEST(KernelFieldTest, HeatKernelPositiveAndDecaying) {
  const auto p = heat_dirichlet();
  const Grid grid = kernel_grid(1, 1, 1.0);
  const auto K = compute_kernel_field(p.symbol, p.boundary, 1.0, grid);
  const int ny = grid.normal.size();
  const std::size_t Mt = grid.tangential.size();
  double peak = 0.0;
  for (std::size_t t = 0; t < Mt; ++t) peak = std::max(peak, std::abs(K.at(t, 0)(0, 0)));
  // First entry: F^{-1}[ e^{-sqrt(1 + xi^2) y} / (1 + xi^2) ], a positive, radially decreasing function.
  for (int iy = 0; iy < ny; ++iy) {
    for (std::size_t t = 0; t < Mt; ++t) {
      const Complex v = K.at(t, iy)(0, 0);
      // Up to the truncation of the slowly decaying spectrum at the Nyquist frequency.
      EXPECT_LE(std::abs(v.imag()), 1e-12 * peak);
      EXPECT_GT(v.real(), -1e-5 * peak);
    }
  }
  for (std::size_t t = 0; t + 1 < Mt / 2; ++t) {
    EXPECT_GE(K.at(t, 0)(0, 0).real() + 1e-5 * peak, K.at(t + 1, 0)(0, 0).real());
  }
  for (int iy = 0; iy + 1 < ny; ++iy) {
    EXPECT_GE(K.at(0, iy)(0, 0).real() + 1e-5 * peak, K.at(0, iy + 1)(0, 0).real());
  }
  // At the origin the entry is the mode sum (1 / L) sum_k 1 / (1 + xi_k^2).
  double sum = 0.0;
  for (std::size_t t = 0; t < Mt; ++t) {
    const double xi = grid.tangential.wavenumber(t)[0];
    sum += 1.0 / (1.0 + xi * xi);
  }
  EXPECT_NEAR(K.at(0, 0)(0, 0).real(), sum / grid.tangential.lengths[0], 1e-12);
}

TEST(KernelFieldTest, ConjugateSymmetryOfTheSolutionRows) {
  for (const auto& name : {"heat-dirichlet", "catalysis"}) {
    const auto p = make_fixture(name);
    const Complex lambda = std::polar(3.0, 0.8);
    const Grid grid = small_grid(1, lambda);
    const auto K = compute_kernel_field(p.symbol, p.boundary, lambda, grid);
    const auto Kc = compute_kernel_field(p.symbol, p.boundary, std::conj(lambda), grid);
    const int N = p.symbol.components();
    double diff = 0.0, scale = 0.0;
    for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
      for (int iy = 0; iy < grid.normal.size(); ++iy) {
        const CMatrix a = K.at(t, iy).topRows(N);
        const CMatrix b = Kc.at(t, iy).topRows(N);
        diff = std::max(diff, (b - a.conjugate()).norm());
        scale = std::max(scale, a.norm());
      }
    }
    EXPECT_LE(diff, 1e-10 * scale) << name;
  }
}

TEST(KernelFieldTest, ReportsFailingFrequency) {
  const auto p = make_fixture("duplicate-rows");
  try {
    compute_kernel_field(p.symbol, p.boundary, 1.0, small_grid(1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LsFailure);
    EXPECT_NE(std::string(e.what()).find("xi'"), std::string::npos);
  }
}

namespace {

double envelope_at(const DecayFit& fit, double r) {
  const auto& x = fit.envelope_r;
  const auto& v = fit.envelope_value;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i] <= r && r <= x[i + 1]) {
      const double w = std::log(r / x[i]) / std::log(x[i + 1] / x[i]);
      return std::exp((1.0 - w) * std::log(v[i]) + w * std::log(v[i + 1]));
    }
  }
  return std::nan("");
}

}  // namespace

TEST(KernelDecayTest, HeatFitStableAcrossLambda) {
  const auto p = heat_dirichlet();
  std::vector<double> cs;
  std::vector<double> sups;
  for (double theta : {0.0, kPi / 3, -kPi / 3}) {
    for (double r : {1.0, 4.0, 16.0}) {
      const Complex lambda = std::polar(r, theta);
      const auto K = compute_kernel_field(p.symbol, p.boundary, lambda, kernel_grid(1, 1, lambda));
      const auto fit = verify_kernel_decay(K);
      EXPECT_TRUE(fit.feasible) << fit.note;
      EXPECT_GE(fit.coverage, 0.99);
      EXPECT_NEAR(fit.exponent, -0.5, 1e-15);
      cs.push_back(fit.c);
      if (theta == 0.0) {
        double sup = 0.0;
        for (std::size_t t = 0; t < K.grid.tangential.size(); ++t) {
          for (int iy = 0; iy < K.grid.normal.size(); ++iy) sup = std::max(sup, K.norm_at(t, iy));
        }
        sups.push_back(sup / std::pow(r, fit.exponent));
      }
      // Far field: the envelope falls at least as fast as the fitted p-kernel (25% slack).
      for (double rr : {2.0, 3.0, 4.0}) {
        const double ratio = envelope_at(fit, 2.0 * rr) / envelope_at(fit, rr);
        const double bound = p_kernel(2, -1, 2, 2.0 * fit.c * rr) / p_kernel(2, -1, 2, fit.c * rr);
        EXPECT_LE(ratio, 1.25 * bound) << lambda << " " << rr;
      }
    }
  }
  double mean = 0.0;
  for (double c : cs) mean += c / cs.size();
  for (double c : cs) EXPECT_LE(std::abs(c - mean), 0.2 * mean) << c << " vs " << mean;
  const auto [lo, hi] = std::minmax_element(sups.begin(), sups.end());
  EXPECT_LE(*hi / *lo, 1.25);
}

TEST(KernelDecayTest, DerivativesAndSystems) {
  for (const auto& name : {"heat-dirichlet", "catalysis"}) {
    const auto p = make_fixture(name);
    for (const auto& alpha : {MultiIndex{0, 1}, MultiIndex{1, 1}, MultiIndex{0, 2}}) {
      const auto K = compute_kernel_field(p.symbol, p.boundary, 2.0, kernel_grid(1, 1, 2.0, 128, 48), alpha);
      const auto fit = verify_kernel_decay(K);
      EXPECT_TRUE(fit.feasible) << name;
      EXPECT_NEAR(fit.exponent, (1.0 - 2.0 + alpha.order()) / 2.0, 1e-15);
    }
  }
}
