#include "lopashka/fixtures.hpp"

#include <cmath>

#include "lopashka/error.hpp"

namespace lopashka {

namespace {

CMatrix scalar(Complex v) { return CMatrix::Constant(1, 1, v); }

MultiIndex normal_index(int dim, int k) {
  std::vector<int> e(dim, 0);
  e.back() = k;
  return MultiIndex(e);
}

MultiIndex tangential_index(int dim, int axis, int k) {
  std::vector<int> e(dim, 0);
  e[axis] = k;
  return MultiIndex(e);
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

BoundaryComponent dirichlet_component(int dim, int N, const CMatrix& P) {
  return BoundaryComponent{0, Projection(P), {{normal_index(dim, 0), CMatrix::Identity(N, N)}}};
}

// -d_y has symbol -i xi_{n+1}.
BoundaryComponent outer_normal_component(int dim, const CMatrix& coeff, const CMatrix& P) {
  return BoundaryComponent{1, Projection(P), {{normal_index(dim, 1), -kI * coeff}}};
}

Problem assemble(std::string name, InteriorSymbol sym, std::vector<BoundaryRow> rows) {
  BoundaryOperatorSpec spec(sym, std::move(rows));
  return Problem{std::move(name), std::move(sym), std::move(spec), nlohmann::json::object()};
}

struct MixedRows {
  CMatrix P0;
  CMatrix P1;
  CMatrix flux;  // N x N, maps into ran(P1)
  CVector w;
  CMatrix U;     // orthonormal basis of ran(P1)
};

// Builds the projections of a row "alpha.v = g_1, Phi d_nu v = (g_2, ...)".
MixedRows mixed_rows(const RVector& alpha, const RMatrix& Phi) {
  const int N = static_cast<int>(alpha.size());
  // w spans ker(Phi) and is normalized by alpha.w = 1.
  Eigen::FullPivLU<RMatrix> lu(Phi);
  const RMatrix kernel = lu.kernel();
  if (kernel.cols() != 1) throw Error(ErrorKind::Domain, "flux rows must have a one-dimensional kernel");
  const double aw = alpha.dot(kernel.col(0));
  if (std::abs(aw) < 1e-12) throw Error(ErrorKind::Domain, "alpha is orthogonal to the flux kernel");
  const RVector w = kernel.col(0) / aw;
  MixedRows r;
  r.w = w.cast<Complex>();
  r.P0 = (w * alpha.transpose()).cast<Complex>();
  r.P1 = CMatrix::Identity(N, N) - r.P0;
  // Orthonormal basis of ran(P1) = alpha^perp.
  Eigen::JacobiSVD<RMatrix> svd(r.P1.real(), Eigen::ComputeFullU);
  r.U = svd.matrixU().leftCols(N - 1).cast<Complex>();
  r.flux = r.U * Phi.cast<Complex>();
  return r;
}

}  // namespace

CoefficientMap polyharmonic_coefficients(int dim, int m, const CMatrix& D) {
  CoefficientMap c;
  for (const auto& gamma : multi_indices(dim, m)) {
    double coeff = factorial(m);
    std::vector<int> e(dim);
    for (int i = 0; i < dim; ++i) {
      coeff /= factorial(gamma[i]);
      e[i] = 2 * gamma[i];
    }
    c.emplace(MultiIndex(e), coeff * D);
  }
  return c;
}

Problem heat_dirichlet(int n) {
  const int dim = n + 1;
  InteriorSymbol sym(dim, 1, polyharmonic_coefficients(dim, 1, scalar(1.0)));
  BoundaryRow row{{dirichlet_component(dim, 1, scalar(1.0))}};
  return assemble("heat-dirichlet", std::move(sym), {row});
}

Problem heat_neumann(int n) {
  const int dim = n + 1;
  InteriorSymbol sym(dim, 1, polyharmonic_coefficients(dim, 1, scalar(1.0)));
  BoundaryRow row{{outer_normal_component(dim, scalar(1.0), scalar(1.0))}};
  return assemble("heat-neumann", std::move(sym), {row});
}

Problem heat_robin(int n, double kappa) {
  const int dim = n + 1;
  InteriorSymbol sym(dim, 1, polyharmonic_coefficients(dim, 1, scalar(1.0)));
  BoundaryComponent comp = outer_normal_component(dim, scalar(1.0), scalar(1.0));
  comp.coeffs.emplace(tangential_index(dim, 0, 1), scalar(kI * kappa));
  BoundaryRow row{{comp}};
  Problem p = assemble("heat-robin", std::move(sym), {row});
  p.extra["kappa"] = kappa;
  return p;
}

Problem biharmonic(int n) {
  const int dim = n + 1;
  InteriorSymbol sym(dim, 1, polyharmonic_coefficients(dim, 2, scalar(1.0)));
  BoundaryRow r0{{dirichlet_component(dim, 1, scalar(1.0))}};
  BoundaryRow r1{{outer_normal_component(dim, scalar(1.0), scalar(1.0))}};
  return assemble("biharmonic", std::move(sym), {r0, r1});
}

Problem catalysis(const CatalysisParameters& params, int n) {
  const int dim = n + 1;
  if (params.d.size() != 3 || params.alpha.size() != 3 || params.beta.size() != 2 ||
      params.gamma.size() != 2) {
    throw Error(ErrorKind::Dimension, "catalysis parameters have wrong sizes");
  }
  CMatrix D = CMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) D(i, i) = params.d[i];
  InteriorSymbol sym(dim, 3, polyharmonic_coefficients(dim, 1, D));
  RMatrix Phi(2, 3);
  Phi << params.beta[0], params.beta[1], 0.0, params.gamma[0], 0.0, params.gamma[1];
  const MixedRows mr = mixed_rows(Eigen::Map<const RVector>(params.alpha.data(), 3), Phi);
  BoundaryRow row{{dirichlet_component(dim, 3, mr.P0), outer_normal_component(dim, mr.flux, mr.P1)}};
  Problem p = assemble("catalysis", std::move(sym), {row});
  p.extra["parameters"] = {{"d", params.d}, {"alpha", params.alpha}, {"beta", params.beta},
                           {"gamma", params.gamma}};
  return p;
}

CVector catalysis_row_datum(const CatalysisParameters& params, Complex g1, Complex g2, Complex g3) {
  RMatrix Phi(2, 3);
  Phi << params.beta[0], params.beta[1], 0.0, params.gamma[0], 0.0, params.gamma[1];
  const MixedRows mr = mixed_rows(Eigen::Map<const RVector>(params.alpha.data(), 3), Phi);
  CVector flux(2);
  flux << g2, g3;
  return mr.w * g1 + mr.U * flux;
}

Problem mixed_two_component(int n) {
  const int dim = n + 1;
  CMatrix D = CMatrix::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = 2.0;
  InteriorSymbol sym(dim, 2, polyharmonic_coefficients(dim, 1, D));
  RVector alpha(2);
  alpha << 1.0, 1.0;
  RMatrix Phi(1, 2);
  Phi << 1.0, 2.0;
  const MixedRows mr = mixed_rows(alpha, Phi);
  BoundaryRow row{{dirichlet_component(dim, 2, mr.P0), outer_normal_component(dim, mr.flux, mr.P1)}};
  return assemble("mixed-two-component", std::move(sym), {row});
}

Problem duplicate_rows(int n) {
  const int dim = n + 1;
  CatalysisParameters params;
  CMatrix D = CMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) D(i, i) = params.d[i];
  InteriorSymbol sym(dim, 3, polyharmonic_coefficients(dim, 1, D));
  // Projections of the regular catalysis fixture; the flux map repeats the beta row.
  RMatrix Phi(2, 3);
  Phi << params.beta[0], params.beta[1], 0.0, params.gamma[0], 0.0, params.gamma[1];
  const MixedRows mr = mixed_rows(Eigen::Map<const RVector>(params.alpha.data(), 3), Phi);
  RMatrix twice(2, 3);
  twice << params.beta[0], params.beta[1], 0.0, params.beta[0], params.beta[1], 0.0;
  const CMatrix flux = mr.U * twice.cast<Complex>();
  BoundaryRow row{{dirichlet_component(dim, 3, mr.P0), outer_normal_component(dim, flux, mr.P1)}};
  return assemble("duplicate-rows", std::move(sym), {row});
}

Problem zero_boundary(int n) {
  const int dim = n + 1;
  InteriorSymbol sym(dim, 1, polyharmonic_coefficients(dim, 1, scalar(1.0)));
  BoundaryRow row{{BoundaryComponent{0, Projection(scalar(1.0)), {{normal_index(dim, 0), scalar(0.0)}}}}};
  return assemble("zero-boundary", std::move(sym), {row});
}

std::vector<std::string> fixture_names() {
  return {"heat-dirichlet", "heat-neumann", "heat-robin", "biharmonic", "catalysis",
          "mixed-two-component", "duplicate-rows", "zero-boundary"};
}

Problem make_fixture(const std::string& name) {
  if (name == "heat-dirichlet") return heat_dirichlet();
  if (name == "heat-neumann") return heat_neumann();
  if (name == "heat-robin") return heat_robin();
  if (name == "biharmonic") return biharmonic();
  if (name == "catalysis") return catalysis();
  if (name == "mixed-two-component") return mixed_two_component();
  if (name == "duplicate-rows") return duplicate_rows();
  if (name == "zero-boundary") return zero_boundary();
  throw Error(ErrorKind::Domain, "unknown fixture \"" + name + "\"");
}

}  // namespace lopashka
