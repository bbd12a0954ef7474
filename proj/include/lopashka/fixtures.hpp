#pragma once

#include <string>
#include <vector>

#include "lopashka/problem_io.hpp"

namespace lopashka {

// Coefficients of D |xi|^{2m} in dim variables.
CoefficientMap polyharmonic_coefficients(int dim, int m, const CMatrix& D);

// Scalar heat operator |xi|^2 with u = g (Dirichlet).
Problem heat_dirichlet(int n = 1);
// Scalar heat with the outer normal derivative -d_y u = g; symbol -i xi_{n+1}.
Problem heat_neumann(int n = 1);
// Oblique first-order row -d_y u + kappa d_{x_1} u = g.
Problem heat_robin(int n = 1, double kappa = 0.5);
// |xi|^4 with u = g_1 and -d_y u = g_2.
Problem biharmonic(int n = 1);

struct CatalysisParameters {
  std::vector<double> d{1.0, 2.0, 3.0};
  std::vector<double> alpha{1.0, 1.0, 1.0};
  std::vector<double> beta{1.0, -2.0};   // (beta_1, beta_2)
  std::vector<double> gamma{1.0, 3.0};   // (gamma_1, gamma_3)
};

// Three-component diffusion system diag(d)|xi|^2 with the mixed row
// alpha.v = g_1 (order 0) and the flux pair beta, gamma (order 1), organized by
// P_0 = w alpha^T and P_1 = I - w alpha^T where w spans the common kernel of the flux rows.
Problem catalysis(const CatalysisParameters& params = {}, int n = 1);

// Encodes the three scalar data (g_1, g_2, g_3) of the catalysis rows as the single row datum.
CVector catalysis_row_datum(const CatalysisParameters& params, Complex g1, Complex g2, Complex g3);

// Two-component analogue: alpha.v = g_1 (order 0), beta.d_nu v = g_2 (order 1).
Problem mixed_two_component(int n = 1);

// Catalysis with the gamma flux row replaced by a copy of the beta row.
Problem duplicate_rows(int n = 1);

// Scalar heat with an identically vanishing boundary operator.
Problem zero_boundary(int n = 1);

std::vector<std::string> fixture_names();
Problem make_fixture(const std::string& name);

}  // namespace lopashka
