#include <random>

#include <gtest/gtest.h>

#include "lopashka/error.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/problem_io.hpp"
#include "lopashka/symbol.hpp"

using namespace lopashka;

namespace {

CMatrix scalar(Complex v) { return CMatrix::Constant(1, 1, v); }

std::vector<Complex> random_point(std::mt19937_64& rng, int dim, bool complex_valued = true) {
  std::normal_distribution<double> nd;
  std::vector<Complex> x(dim);
  for (auto& v : x) v = Complex(nd(rng), complex_valued ? nd(rng) : 0.0);
  return x;
}

// (xi_1 + xi_2)^2 via an explicit monomial list.
InteriorSymbol binomial_square() {
  CoefficientMap c;
  c.emplace(MultiIndex{2, 0}, scalar(1.0));
  c.emplace(MultiIndex{1, 1}, scalar(2.0));
  c.emplace(MultiIndex{0, 2}, scalar(1.0));
  return InteriorSymbol(2, 1, c);
}

}  // namespace

TEST(MultiIndexTest, OrderAndEnumeration) {
  EXPECT_EQ(MultiIndex({1, 2, 3}).order(), 6);
  // Number of multi-indices of length 3 and order 4 is C(6,2) = 15.
  EXPECT_EQ(multi_indices(3, 4).size(), 15u);
  for (const auto& a : multi_indices(3, 4)) EXPECT_EQ(a.order(), 4);
  EXPECT_THROW(MultiIndex({1, -1}), Error);
}

TEST(InteriorSymbolTest, LaplacianAtNormalDirection) {
  const Problem p = heat_dirichlet(1);
  const std::vector<double> xi{0.0, 1.0};
  EXPECT_NEAR(std::abs(p.symbol.eval(std::span<const double>(xi))(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(InteriorSymbolTest, DiagonalDiffusionAtTangentialDirection) {
  const Problem p = catalysis();
  const std::vector<double> xi{1.0, 0.0};
  const CMatrix A = p.symbol.eval(std::span<const double>(xi));
  CMatrix expected = CMatrix::Zero(3, 3);
  expected.diagonal() << 1.0, 2.0, 3.0;
  EXPECT_LT((A - expected).norm(), 1e-14);
}

TEST(InteriorSymbolTest, DimensionMismatchThrows) {
  const Problem p = heat_dirichlet(1);
  const std::vector<Complex> xi{1.0, 2.0, 3.0};
  EXPECT_THROW(p.symbol.eval(std::span<const Complex>(xi)), Error);
}

TEST(InteriorSymbolTest, RejectsInhomogeneousAndMissingLeadingCoefficient) {
  CoefficientMap c;
  c.emplace(MultiIndex{2, 0}, scalar(1.0));
  c.emplace(MultiIndex{0, 1}, scalar(1.0));
  EXPECT_THROW(InteriorSymbol(2, 1, c), Error);
  CoefficientMap d;
  d.emplace(MultiIndex{2, 0}, scalar(1.0));
  EXPECT_THROW(InteriorSymbol(2, 1, d), Error);
}

TEST(InteriorSymbolTest, HomogeneityProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(0.1, 3.0);
  for (const auto& name : fixture_names()) {
    const Problem p = make_fixture(name);
    const int order = p.symbol.order();
    for (int trial = 0; trial < 20; ++trial) {
      auto xi = random_point(rng, p.symbol.dim());
      const double t = ud(rng);
      std::vector<Complex> txi(xi);
      for (auto& v : txi) v *= t;
      const CMatrix a = p.symbol.eval(std::span<const Complex>(xi));
      const CMatrix b = p.symbol.eval(std::span<const Complex>(txi));
      EXPECT_LT((b - std::pow(t, order) * a).norm(), 1e-12 * std::max(1.0, b.norm())) << name;
      for (int j = 0; j < p.boundary.row_count(); ++j) {
        const auto& row = p.boundary.row(j);
        for (int c = 0; c < static_cast<int>(row.components.size()); ++c) {
          const CMatrix bj = eval_boundary_component(p.boundary, j, c, xi);
          const CMatrix bt = eval_boundary_component(p.boundary, j, c, txi);
          EXPECT_LT((bt - std::pow(t, row.components[c].order) * bj).norm(),
                    1e-12 * std::max(1.0, bt.norm()))
              << name;
        }
      }
    }
  }
}

TEST(TangentialDecomposeTest, LaplacianParts) {
  const auto parts = tangential_decompose(heat_dirichlet(1).symbol);
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[0].size(), 1u);
  EXPECT_TRUE(parts[1].empty());
  ASSERT_EQ(parts[2].size(), 1u);
  EXPECT_EQ(parts[2].begin()->first, MultiIndex{2});
  EXPECT_NEAR(std::abs(parts[2].begin()->second(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(TangentialDecomposeTest, BinomialExpansionOracle) {
  const InteriorSymbol sym = binomial_square();
  const auto parts = tangential_decompose(sym);
  // Oracle: (xi' + eta)^2 = eta^2 + 2 xi' eta + xi'^2.
  const double expected[3] = {1.0, 2.0, 1.0};
  for (int l = 0; l <= 2; ++l) {
    ASSERT_EQ(parts[l].size(), 1u);
    EXPECT_EQ(parts[l].begin()->first, MultiIndex{l});
    EXPECT_NEAR(parts[l].begin()->second(0, 0).real(), expected[l], 1e-15);
  }
}

TEST(TangentialDecomposeTest, ReconstructionMatchesEvaluation) {
  std::mt19937_64 rng(7);
  for (const auto& name : fixture_names()) {
    const Problem p = make_fixture(name);
    const auto parts = tangential_decompose(p.symbol);
    for (int trial = 0; trial < 10; ++trial) {
      auto xi = random_point(rng, p.symbol.dim());
      std::vector<Complex> xp(xi.begin(), xi.end() - 1);
      const Complex eta = xi.back();
      CMatrix recon = CMatrix::Zero(p.symbol.components(), p.symbol.components());
      Complex eta_pow = 1.0;
      for (int l = p.symbol.order(); l >= 0; --l) {
        recon += eval_polynomial(parts[l], p.symbol.components(), xp) * eta_pow;
        eta_pow *= eta;
      }
      const CMatrix direct = p.symbol.eval(std::span<const Complex>(xi));
      EXPECT_LT((recon - direct).norm(), 1e-12 * std::max(1.0, direct.norm())) << name;
      EXPECT_LT((p.symbol.eval_split(xp, eta) - direct).norm(), 1e-12 * std::max(1.0, direct.norm()));
    }
  }
}

TEST(BoundaryTest, DirichletAndNeumannRows) {
  const std::vector<Complex> xi{0.3, 1.0};
  EXPECT_NEAR(std::abs(eval_boundary(heat_dirichlet().boundary, 0, xi)(0, 0) - 1.0), 0.0, 1e-15);
  // Plain normal derivative symbol xi_{n+1}.
  const InteriorSymbol sym = heat_dirichlet().symbol;
  BoundaryRow row{{BoundaryComponent{1, Projection(scalar(1.0)), {{MultiIndex{0, 1}, scalar(1.0)}}}}};
  BoundaryOperatorSpec spec(sym, {row});
  const std::vector<Complex> normal{0.0, 1.0};
  EXPECT_NEAR(std::abs(eval_boundary(spec, 0, normal)(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_THROW(eval_boundary(spec, 1, normal), Error);
}

TEST(BoundaryTest, FluxRowWithTwoProjections) {
  const InteriorSymbol sym = catalysis().symbol;
  CMatrix P1 = CMatrix::Zero(3, 3), P2 = CMatrix::Zero(3, 3);
  P1(0, 0) = 1.0;
  P2(1, 1) = 1.0;
  const double b1 = 1.0, b2 = -2.0;
  BoundaryRow row{{BoundaryComponent{1, Projection(P1 + P2), {{MultiIndex{0, 1}, b1 * P1 + b2 * P2}}}}};
  BoundaryOperatorSpec spec(sym, {row});
  const std::vector<Complex> xi{0.0, 1.0};
  EXPECT_LT((eval_boundary(spec, 0, xi) - (b1 * P1 + b2 * P2)).norm(), 1e-15);
}

TEST(ProjectionTest, AlgebraOfFixtures) {
  for (const auto& name : fixture_names()) {
    const Problem p = make_fixture(name);
    const int N = p.symbol.components();
    for (const auto& row : p.boundary.rows()) {
      for (std::size_t c = 0; c < row.components.size(); ++c) {
        const CMatrix& P = row.components[c].projection.matrix();
        EXPECT_LT((P * P - P).norm(), 1e-10) << name;
        for (std::size_t c2 = 0; c2 < row.components.size(); ++c2) {
          if (c2 != c) EXPECT_LT((P * row.components[c2].projection.matrix()).norm(), 1e-10) << name;
        }
        for (const auto& [beta, b] : row.components[c].coeffs) {
          EXPECT_LT(((CMatrix::Identity(N, N) - P) * b * P).norm(), 1e-10) << name;
        }
        const CMatrix& W = row.components[c].projection.range_basis();
        EXPECT_LT((W.adjoint() * W - CMatrix::Identity(W.cols(), W.cols())).norm(), 1e-12);
        EXPECT_LT((P * W - W).norm(), 1e-10);
      }
    }
  }
}

TEST(ProjectionTest, RejectsNonIdempotentAndNonInvariant) {
  CMatrix A(2, 2);
  A << 1.0, 1.0, 0.0, 0.5;
  EXPECT_THROW(Projection{A}, Error);
  const InteriorSymbol sym(2, 2, polyharmonic_coefficients(2, 1, CMatrix::Identity(2, 2)));
  CMatrix P = CMatrix::Zero(2, 2);
  P(0, 0) = 1.0;
  CMatrix b(2, 2);
  b << 1.0, 0.0, 1.0, 0.0;  // maps e1 to e1 + e2, leaving ran(P)
  BoundaryRow row{{BoundaryComponent{0, Projection(P), {{MultiIndex{0, 0}, b}}}}};
  EXPECT_THROW(BoundaryOperatorSpec(sym, {row}), Error);
}

TEST(ProjectionTest, RejectsNonAnnihilatingComponents) {
  const InteriorSymbol sym(2, 2, polyharmonic_coefficients(2, 1, CMatrix::Identity(2, 2)));
  CMatrix P = CMatrix::Zero(2, 2);
  P(0, 0) = 1.0;
  BoundaryRow row{{BoundaryComponent{0, Projection(P), {{MultiIndex{0, 0}, CMatrix::Identity(2, 2)}}},
                   BoundaryComponent{1, Projection(P), {{MultiIndex{0, 1}, CMatrix::Identity(2, 2)}}}}};
  EXPECT_THROW(BoundaryOperatorSpec(sym, {row}), Error);
}

TEST(StackRowDataTest, CatalysisDatumRoundTrip) {
  const CatalysisParameters params;
  const Problem p = catalysis(params);
  const CVector g = catalysis_row_datum(params, 1.0, 2.0, 3.0);
  // alpha . g recovers g_1.
  EXPECT_NEAR(std::abs(g(0) + g(1) + g(2) - 1.0), 0.0, 1e-14);
  const CVector s = stack_row_data(p.boundary, {g});
  EXPECT_EQ(s.size(), 3);
}

TEST(StackRowDataTest, RejectsDataOutsideRanges) {
  const InteriorSymbol sym(2, 2, polyharmonic_coefficients(2, 1, CMatrix::Identity(2, 2)));
  CMatrix P = CMatrix::Zero(2, 2);
  P(0, 0) = 1.0;
  // Rows need m = 1 entries; one component only covers e1.
  BoundaryRow row{{BoundaryComponent{0, Projection(P), {{MultiIndex{0, 0}, P}}}}};
  BoundaryOperatorSpec spec(sym, {row});
  CVector g(2);
  g << 1.0, 1.0;
  EXPECT_THROW(stack_row_data(spec, {g}), Error);
}

TEST(ProblemIoTest, RoundTripFixtures) {
  for (const auto& name : fixture_names()) {
    const Problem p = make_fixture(name);
    const auto doc = problem_to_json(p);
    const Problem q = parse_problem(doc.dump());
    EXPECT_EQ(problem_to_json(q), doc) << name;
  }
}

TEST(ProblemIoTest, MalformedJsonReportsLineAndColumn) {
  const std::string text = "{\n  \"m\": 1,\n  \"n\": ,\n}";
  try {
    parse_problem(text);
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ProblemIoTest, ImaginaryPartIsOptional) {
  const std::string text = R"({"m":1,"n":1,"N":1,
    "interior":[{"alpha":[2,0],"re":[[1]]},{"alpha":[0,2],"re":[[1]]}],
    "boundary":[{"components":[{"k":0,"projection":{"re":[[1]]},"coeffs":[{"beta":[0,0],"re":[[1]]}]}]}]})";
  const Problem p = parse_problem(text);
  EXPECT_EQ(p.symbol.order(), 2);
  EXPECT_EQ(p.boundary.data_dim(), 1);
}
