#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lopashka/companion.hpp"
#include "lopashka/error.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/linalg.hpp"

using namespace lopashka;

namespace {

struct SamplePoint {
  std::vector<Complex> b;
  Complex sigma;
};

// Points of the compact set |sigma| + |b|^{2m} = 1 with |arg sigma| <= max_arg.
std::vector<SamplePoint> compact_samples(int n, int m, double max_arg, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::normal_distribution<double> nd;
  std::vector<SamplePoint> pts;
  for (int i = 0; i < count; ++i) {
    const double r = ud(rng);
    std::vector<double> dir(n);
    double norm = 0.0;
    for (auto& d : dir) {
      d = nd(rng);
      norm += d * d;
    }
    norm = std::sqrt(norm);
    SamplePoint p;
    for (auto d : dir) p.b.push_back(r * d / norm);
    p.sigma = std::polar(1.0 - std::pow(r, 2 * m), max_arg * (2.0 * ud(rng) - 1.0));
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

TEST(ScaleVariablesTest, Examples) {
  const std::vector<double> zero{0.0};
  auto s = scale_variables(1.0, zero, 1);
  EXPECT_NEAR(s.rho, 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.sigma - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(s.b[0], 0.0, 0.0);

  const std::vector<double> two{2.0};
  s = scale_variables(0.0, two, 1);
  EXPECT_NEAR(s.rho, 2.0, 1e-15);
  EXPECT_NEAR(std::abs(s.b[0]), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(s.sigma), 0.0, 0.0);

  const std::vector<double> one{1.0};
  s = scale_variables(kI, one, 1);
  // Oracle: rho = (|i| + 1)^{1/2}.
  EXPECT_NEAR(s.rho, std::sqrt(2.0), 1e-15);
  EXPECT_THROW(scale_variables(0.0, zero, 1), Error);
}

TEST(ScaleVariablesTest, ReconstructionAndCompactness) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int m = 1; m <= 3; ++m) {
    for (int trial = 0; trial < 50; ++trial) {
      const Complex lambda(std::exp(3 * nd(rng)), std::exp(3 * nd(rng)) * (trial % 2 ? 1 : -1));
      std::vector<double> xi{std::exp(2 * nd(rng)), nd(rng)};
      const auto s = scale_variables(lambda, xi, m);
      EXPECT_NEAR(std::abs(s.sigma * std::pow(s.rho, 2 * m) - lambda) / std::abs(lambda), 0.0, 1e-12);
      for (int i = 0; i < 2; ++i) EXPECT_NEAR(s.rho * s.b[i], xi[i], 1e-12 * std::abs(xi[i]));
      const double bn = std::hypot(s.b[0], s.b[1]);
      EXPECT_LE(std::abs(s.sigma), 1.0 + 1e-12);
      EXPECT_LE(bn, 1.0 + 1e-12);
      EXPECT_NEAR(std::abs(s.sigma) + std::pow(bn, 2 * m), 1.0, 1e-12);
    }
  }
}

TEST(CompanionTest, HeatBlockStructure) {
  const auto sym = heat_dirichlet(1).symbol;
  const std::vector<Complex> b{0.6};
  const Complex sigma(0.3, 0.2);
  const auto cs = build_companion(sym, b, sigma);
  CMatrix expected(2, 2);
  expected << 0.0, 1.0, -(sigma + 0.36), 0.0;
  EXPECT_LT((cs.A0 - expected).norm(), 1e-15);
  const auto split = spectral_split(cs);
  // Closed form: eigenvalues of i A0 are +-(sigma + b^2)^{1/2}.
  const Complex root = std::sqrt(sigma + 0.36);
  ASSERT_EQ(split.eig_minus.size(), 1u);
  ASSERT_EQ(split.eig_plus.size(), 1u);
  EXPECT_NEAR(std::abs(split.eig_minus[0] + root), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(split.eig_plus[0] - root), 0.0, 1e-12);
}

TEST(CompanionTest, HeatUnitSigmaProjection) {
  const auto cs = build_companion(heat_dirichlet(1).symbol, std::vector<Complex>{0.0}, 1.0);
  const auto split = spectral_split(cs);
  EXPECT_NEAR(split.gap, 1.0, 1e-12);
  // Hand oracle: eigenvectors (1, i) for -1 and (1, -i) for +1.
  CMatrix expected(2, 2);
  expected << 0.5, -0.5 * kI, 0.5 * kI, 0.5;
  EXPECT_LT((split.P_minus - expected).norm(), 1e-12);
  CVector stable(2);
  stable << 1.0, kI;
  EXPECT_LT((split.P_minus * stable - stable).norm(), 1e-12);
}

TEST(CompanionTest, CatalysisStableDimension) {
  const auto cs = build_companion(catalysis().symbol, std::vector<Complex>{0.3}, Complex(0.5, 0.4));
  const auto split = spectral_split(cs);
  EXPECT_EQ(split.stable_dim, 3);
  EXPECT_EQ(split.eig_minus.size(), 3u);
}

TEST(CompanionTest, SingularLeadingCoefficientThrows) {
  CoefficientMap c;
  CMatrix a0 = CMatrix::Zero(2, 2);
  a0(0, 0) = 1.0;
  c.emplace(MultiIndex{0, 2}, a0);
  c.emplace(MultiIndex{2, 0}, CMatrix::Identity(2, 2));
  const InteriorSymbol sym(2, 2, c);
  EXPECT_THROW(build_companion(sym, std::vector<Complex>{0.5}, 1.0), Error);
}

TEST(CompanionTest, GapViolationThrows) {
  // sigma = -b^2 puts an eigenvalue on the imaginary axis.
  const auto cs = build_companion(heat_dirichlet(1).symbol, std::vector<Complex>{0.5}, -0.25);
  EXPECT_THROW(spectral_split(cs), Error);
}

TEST(CompanionTest, BoundaryRowStructure) {
  const auto p = biharmonic(1);
  const std::vector<Complex> b{0.4};
  const auto rows = boundary_rows(p.boundary, b);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.row.cols(), 4);
    // Exactly k+1 leading blocks may be nonzero.
    for (int blk = r.slot.order + 1; blk < 4; ++blk) EXPECT_EQ(r.row.col(blk).norm(), 0.0);
  }
  EXPECT_NEAR(std::abs(rows[1].row(0, 1) + kI), 0.0, 1e-15);
}

TEST(CompanionTest, SplitInvariantsOnSweep) {
  struct Case {
    Problem p;
    double max_arg;
  };
  std::vector<Case> cases{{heat_dirichlet(1), kPi / 2}, {heat_dirichlet(2), 3 * kPi / 4},
                          {catalysis(), kPi / 2}, {biharmonic(1), kPi / 2},
                          {mixed_two_component(2), 2.5}};
  unsigned seed = 11;
  for (const auto& c : cases) {
    const int m = c.p.symbol.half_order();
    const int N = c.p.symbol.components();
    for (const auto& pt : compact_samples(c.p.symbol.tangential_dim(), m, c.max_arg, 60, seed++)) {
      const auto cs = build_companion(c.p.symbol, pt.b, pt.sigma);
      const auto split = spectral_split(cs);
      const int dim = 2 * m * N;
      const CMatrix I = CMatrix::Identity(dim, dim);
      EXPECT_EQ(split.stable_dim, m * N);
      EXPECT_EQ(static_cast<int>(split.eig_plus.size()), m * N);
      const double scale = std::max(1.0, split.P_minus.norm());
      EXPECT_LT((split.P_plus + split.P_minus - I).norm(), 1e-9 * scale);
      EXPECT_LT((split.P_minus * split.P_minus - split.P_minus).norm(), 1e-9 * scale * scale);
      EXPECT_LT((split.P_plus * split.P_plus - split.P_plus).norm(), 1e-9 * scale * scale);
      EXPECT_LT((split.P_plus * split.P_minus).norm(), 1e-9 * scale * scale);
      EXPECT_LT((cs.A0 * split.P_minus - split.P_minus * cs.A0).norm(), 1e-8 * scale * cs.A0.norm());
      // Independent oracle: matrix sign function.
      EXPECT_LT((stable_projection_by_sign(cs) - split.P_minus).norm(), 1e-8 * scale);
      // Characteristic identity at random eta.
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> nd;
      for (int t = 0; t < 3; ++t) {
        EXPECT_LT(characteristic_residual(c.p.symbol, cs, Complex(nd(rng), nd(rng))), 1e-8);
      }
    }
  }
}

TEST(CompanionTest, SemigroupDecayFit) {
  const auto cs = build_companion(catalysis().symbol, std::vector<Complex>{0.5}, Complex(0.2, 0.6));
  const auto split = spectral_split(cs);
  const auto fit = fit_semigroup_decay(cs, split, 10.0, 41);
  EXPECT_GT(fit.c, 0.0);
  for (std::size_t i = 0; i < fit.y.size(); ++i) {
    EXPECT_LE(fit.norms[i], fit.M * std::exp(-fit.c * fit.y[i]) * (1 + 1e-12));
  }
}

TEST(OrderedSchurTest, ReconstructsAndOrders) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    CMatrix M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = Complex(nd(rng), nd(rng));
    const auto s = ordered_schur(M, [](Complex z) { return z.real() < 0; });
    EXPECT_LT((s.U * s.T * s.U.adjoint() - M).norm(), 1e-12 * M.norm());
    EXPECT_LT((s.U.adjoint() * s.U - CMatrix::Identity(n, n)).norm(), 1e-12);
    for (int i = 0; i < n; ++i) EXPECT_EQ(s.T(i, i).real() < 0, i < s.selected);
  }
}

TEST(LinalgTest, PhiFunctionsMatchDefinition) {
  for (Complex z : {Complex(0.0), Complex(0.5, -0.3), Complex(-1.9, 0.4), Complex(-3.0, 2.0),
                    Complex(-40.0, 5.0), Complex(4.0, 0.0)}) {
    Complex phi[6];
    phi_functions(z, 6, phi);
    EXPECT_NEAR(std::abs(phi[0] - std::exp(z)), 0.0, 1e-14 * std::abs(std::exp(z)) + 1e-16);
    // Oracle: phi_{j+1}(z) = int_0^1 e^{(1-s) z} s^j / j! ds by Gauss-Legendre on [0, 1].
    const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                         0.9061798459386640};
    const double w[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                         0.4786286704993665, 0.2369268850561891};
    for (int j = 0; j < 5; ++j) {
      Complex sum = 0.0;
      const int panels = 200;
      for (int p = 0; p < panels; ++p) {
        for (int q = 0; q < 5; ++q) {
          const double s = (p + 0.5 + 0.5 * x[q]) / panels;
          sum += 0.5 * w[q] / panels * std::exp((1 - s) * z) * std::pow(s, j) / std::tgamma(j + 1);
        }
      }
      EXPECT_NEAR(std::abs(phi[j + 1] - sum), 0.0, 1e-11 * std::max(1.0, std::abs(sum)))
          << "z = " << z << " j = " << j;
    }
  }
}
