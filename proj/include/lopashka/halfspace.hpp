#pragma once

#include <vector>

#include "lopashka/grid.hpp"
#include "lopashka/symbol.hpp"

namespace lopashka {

// lambda u + A(D) u = f in the half-space, B_j(D) u = g_j on y = 0.
// Boundary data are given per slot (row j, component k) in the order of
// spec.slots(); each slot field takes values in ran(P_{j,k}).  An empty f
// (no data) means f = 0.
struct HalfSpaceProblem {
  InteriorSymbol sym;
  BoundaryOperatorSpec spec;
  Complex lambda;
  Grid grid;
  Field f;
  std::vector<TraceField> g;
};

struct HalfSpaceOptions {
  bool check_sector = true;
  bool check_pde_residual = true;
  double leakage_tol = 1e-8;
};

struct SolveDiagnostics {
  double boundary_residual = 0.0;  // relative L2 mismatch of the boundary rows
  double pde_residual = 0.0;       // relative sup residual with finite differences in y
  double leakage = 0.0;            // max |P_+ v| / |v| of the boundary-layer part
  int frequencies = 0;
  int skipped = 0;                 // frequencies with identically zero data
  int fallback = 0;                // frequencies solved through the Schur route
};

class SolutionField {
 public:
  Grid grid;
  int components = 1;
  int m = 1;
  Complex lambda;
  Field u;
  SolveDiagnostics diagnostics;
  // Forward tangential DFT of D_y^l u for l = 0..2m; layout [t][iy][l][c].
  std::vector<Complex> jets;

  // D^alpha u with D = -i d; alpha has n + 1 entries and |alpha| <= 2m.
  Field derivative(const MultiIndex& alpha) const;
};

// Splits row data g_j (values in the direct sum of the component ranges) into slot fields P_{j,k} g_j.
std::vector<TraceField> slot_data_from_rows(const BoundaryOperatorSpec& spec, const std::vector<TraceField>& rows);

// Full-space resolvent applied to the zero extension of f.  The normal grid of f
// must be uniform; the computation runs on a torus of twice its length.
Field solve_fullspace(const InteriorSymbol& sym, Complex lambda, const Field& f);

// Extension e^{-(|lambda| + |xi'|^{2m})^{1/2m} y} g onto a normal grid.
Field extension_operator(Complex lambda, const TraceField& g, const NormalGrid& normal, int m);

// Tangential Fourier multiplier (|xi'|^{2m} + |lambda|)^{exponent}.
TraceField weight_multiplier(Complex lambda, const TraceField& g, int m, double exponent);

SolutionField solve_halfspace(const HalfSpaceProblem& problem, const HalfSpaceOptions& options = {});

struct ResolventHarnessOptions {
  std::vector<double> moduli{1.0, 10.0, 100.0, 1000.0};
  std::vector<double> arguments{0.0, 0.7853981633974483, -0.7853981633974483, 1.5707963267948966,
                                -1.5707963267948966};
  std::vector<MultiIndex> alphas;  // default: every |alpha| <= 2m
  int trials = 4;
  unsigned long long seed = 0;
  double p = 2.0;
  int tangential_points = 64;
  int normal_points = 128;
  // Negative control: give the order-k slot the weight of order 2m - 1 - k.
  bool swap_weights = false;
  double stability = 0.3;
};

struct ResolventSample {
  Complex lambda;
  int trial = 0;
  double ratio = 0.0;  // max over alpha of LHS_alpha / RHS
  MultiIndex worst_alpha;
};

struct ResolventReport {
  std::vector<ResolventSample> samples;
  std::vector<double> max_ratio_per_modulus;
  double spread = 0.0;  // max / min of the per-modulus maxima
  bool stable = false;
  int skipped = 0;
};

// Ratio ||lambda^{1-|alpha|/2m} D^alpha u|| / (||f|| + sum ||weight_k E_lambda g_{j,k}||)
// for random data, on grids adapted to |lambda|^{-1/2m}.
ResolventReport resolvent_estimate_harness(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec,
                                           const ResolventHarnessOptions& options = {});

}  // namespace lopashka
