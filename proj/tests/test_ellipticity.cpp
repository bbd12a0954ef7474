#include <cmath>

#include <gtest/gtest.h>

#include "lopashka/ellipticity.hpp"
#include "lopashka/error.hpp"
#include "lopashka/fixtures.hpp"

using namespace lopashka;

namespace {

InteriorSymbol laplacian_times(const CMatrix& D, int dim = 2) {
  return InteriorSymbol(dim, static_cast<int>(D.rows()), polyharmonic_coefficients(dim, 1, D));
}

// Eigenvalues of a 2x2 matrix by the quadratic formula.
double max_arg_2x2(const CMatrix& A) {
  const Complex tr = A.trace();
  const Complex det = A.determinant();
  const Complex disc = std::sqrt(tr * tr - 4.0 * det);
  return std::max(std::abs(std::arg((tr + disc) / 2.0)), std::abs(std::arg((tr - disc) / 2.0)));
}

}  // namespace

TEST(EllipticityTest, LaplacianHasAngleZero) {
  for (int n = 1; n <= 3; ++n) {
    const auto rep = ellipticity_angle(heat_dirichlet(n).symbol, 256);
    EXPECT_TRUE(rep.elliptic);
    EXPECT_TRUE(rep.is_even_order);
    EXPECT_TRUE(rep.a0_invertible);
    EXPECT_NEAR(rep.angle, 0.0, 1e-8);
  }
}

TEST(EllipticityTest, RotatedDiagonalSymbol) {
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = std::polar(1.0, 0.3);
  const auto rep = ellipticity_angle(laplacian_times(D), 128);
  EXPECT_NEAR(rep.angle, 0.3, 1e-8);
  EXPECT_EQ(rep.worst_xi.size(), 2u);
}

TEST(EllipticityTest, SkewCoupledSymbolMatchesQuadraticFormula) {
  CMatrix D(2, 2);
  D << 1.0, 0.5, -0.5, 1.0;
  const auto rep = ellipticity_angle(laplacian_times(D), 128);
  EXPECT_NEAR(rep.angle, max_arg_2x2(D), 1e-10);
  EXPECT_NEAR(rep.angle, std::atan(0.5), 1e-6);
}

TEST(EllipticityTest, NegativeEigenvalueIsNotElliptic) {
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  const auto rep = ellipticity_angle(laplacian_times(D), 64);
  EXPECT_FALSE(rep.elliptic);
  EXPECT_DOUBLE_EQ(rep.angle, kPi);
}

TEST(EllipticityTest, OddOrderRejectedBeforeEigenanalysis) {
  CoefficientMap c;
  c.emplace(MultiIndex{0, 1}, CMatrix::Constant(1, 1, 1.0));
  c.emplace(MultiIndex{1, 0}, CMatrix::Constant(1, 1, 1.0));
  const auto rep = ellipticity_angle(InteriorSymbol(2, 1, c), 64);
  EXPECT_FALSE(rep.is_even_order);
  EXPECT_FALSE(rep.elliptic);
}

TEST(EllipticityTest, RequiresEnoughSamples) {
  EXPECT_THROW(ellipticity_angle(heat_dirichlet().symbol, 10), Error);
}

TEST(EllipticityTest, ScalingInvariance) {
  CMatrix D(2, 2);
  D << 1.0, 0.7, -0.2, 2.0;
  const auto sym = laplacian_times(D, 3);
  const double a = ellipticity_angle(sym, 200).angle;
  for (double r : {0.01, 3.0, 1e4}) EXPECT_NEAR(ellipticity_angle(sym.scaled(r), 200).angle, a, 1e-12);
}

TEST(EllipticityTest, RefinementMonotoneOnNestedSets) {
  // An anisotropic symbol whose angle depends on the direction.
  CoefficientMap c;
  c.emplace(MultiIndex{2, 0}, CMatrix::Constant(1, 1, std::polar(1.0, 0.4)));
  c.emplace(MultiIndex{1, 1}, CMatrix::Constant(1, 1, Complex(0.3, 0.1)));
  c.emplace(MultiIndex{0, 2}, CMatrix::Constant(1, 1, 1.0));
  const InteriorSymbol sym(2, 1, c);
  double previous = -1.0;
  for (int s = 64; s <= 4096; s *= 2) {
    const double a = ellipticity_angle_on(sym, sphere_points(2, s)).angle;
    EXPECT_GE(a, previous);
    previous = a;
  }
}

TEST(EllipticityTest, SpherePointsAreUnitVectors) {
  for (int dim = 2; dim <= 5; ++dim) {
    for (const auto& x : sphere_points(dim, 100)) {
      double s = 0.0;
      for (double v : x) s += v * v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(ComplexPerturbationTest, LaplacianBounds) {
  const auto sym = heat_dirichlet(1).symbol;
  EXPECT_NEAR(check_complex_perturbation(sym, 0.0, 64), 0.0, 1e-12);
  const double eps = 0.1;
  // Oracle: (xi + i eta)^2 with |xi| = 1, |eta| = eps has argument at most
  // 2 arctan(eps / (1 - eps)).
  const double bound = 2.0 * std::atan(eps / (1.0 - eps));
  const double a = check_complex_perturbation(sym, eps, 64);
  EXPECT_LE(a, bound);
  EXPECT_GT(a, 0.0);
}

TEST(ComplexPerturbationTest, DiagonalEqualsScalarCase) {
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 1.0;
  const double diag = check_complex_perturbation(laplacian_times(D), 0.2, 64);
  const double scal = check_complex_perturbation(heat_dirichlet(1).symbol, 0.2, 64);
  EXPECT_NEAR(diag, scal, 1e-12);
}

TEST(ComplexPerturbationTest, MonotoneInEps) {
  const auto sym = heat_dirichlet(2).symbol;
  double previous = -1.0;
  for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
    const double a = check_complex_perturbation(sym, eps, 64);
    EXPECT_GE(a, previous);
    previous = a;
  }
}
