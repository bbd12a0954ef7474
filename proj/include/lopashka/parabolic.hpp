#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lopashka/grid.hpp"
#include "lopashka/symbol.hpp"
#include "lopashka/tolerances.hpp"

namespace lopashka {

// Space-time data are sampled on demand at arbitrary times.
using FieldSource = std::function<Field(double t)>;
// One trace field per boundary slot (spec.slots() order), values in ran(P_{j,k}).
using TraceSource = std::function<std::vector<TraceField>(double t)>;

// d_t u + A(D) u = f on (0, T) x half-space, B_j(D) u = g_j on y = 0, u(0) = u0.
// Empty sources and an empty u0 mean zero data.
struct ParabolicProblem {
  InteriorSymbol sym;
  BoundaryOperatorSpec spec;
  Grid grid;
  double T = 1.0;
  FieldSource f;
  TraceSource g;
  Field u0;
  double p = 2.0;  // time integrability
  double q = 2.0;  // space integrability
};

// (2m - k - 1/p) / 2m: temporal smoothness of an order-k boundary datum.
double kappa_exponent(int m, int k, double p);

struct SlotDataReport {
  int slot = 0;
  int row = 0;
  int component = 0;
  int order = 0;
  double kappa = 0.0;
  double time_order = 0.0;   // kappa
  double space_order = 0.0;  // 2m kappa
  double time_seminorm = 0.0;
  double space_seminorm = 0.0;
  bool compatibility_required = false;  // kappa > 1/p
  double compatibility_defect = 0.0;    // relative mismatch of B u0 and g(0)
  bool compatible = true;
};

struct DataClassReport {
  double p = 2.0;
  double q = 2.0;
  bool validated = false;  // false when p != q
  std::string note;
  std::vector<SlotDataReport> slots;

  bool compatible() const;
};

struct ValidationOptions {
  int time_samples = 32;
  bool seminorms = true;
  double compatibility_tol = tol::kCompat;
};

// Smoothness orders, discrete Slobodetskii seminorms (double sums with the
// diagonal cell excluded) and compatibility of u0 with g(0).  Report only.
DataClassReport validate_data(const ParabolicProblem& problem, const ValidationOptions& options = {});

// Discrete Slobodetskii seminorm [h]_s on a uniform sampling with spacing dt of
// a vector-valued function (values[i] = h(t_i)), 0 < s < 1.
double time_seminorm(const std::vector<std::vector<Complex>>& values, double dt, double weight, double s);
// Slobodetskii seminorm of order s > 0 of a trace field on the torus (nearest periodic image).
double space_seminorm(const TraceField& g, double s);

struct ParabolicOptions {
  int steps = 100;
  int output_every = 0;  // 0: only the initial and final states
  bool check_sector = true;
  bool check_ls = true;
  bool allow_invalid_data = false;
};

struct ParabolicDiagnostics {
  double boundary_residual = 0.0;  // max relative mismatch of the boundary rows
  double stage_residual = 0.0;     // max relative residual of the stage equations
  int steps = 0;
  int frequencies = 0;
};

struct ParabolicSolution {
  Grid grid;
  int components = 1;
  int m = 1;
  std::vector<double> times;
  std::vector<Field> snapshots;
  ParabolicDiagnostics diagnostics;
  DataClassReport data;
};

// Method of lines: per tangential frequency, finite differences on the normal
// mesh, the boundary rows replacing the equations of the first m nodes and
// u = 0 on the last m nodes, advanced by TR-BDF2 (gamma = 2 - sqrt 2).
class ParabolicStepper {
 public:
  ParabolicStepper(const ParabolicProblem& problem, int steps);
  ~ParabolicStepper();
  ParabolicStepper(const ParabolicStepper&) = delete;
  ParabolicStepper& operator=(const ParabolicStepper&) = delete;

  void advance();
  int step() const { return step_; }
  int steps() const { return steps_; }
  double time() const;
  double dt() const { return dt_; }
  // Forward tangential DFT of u at the nodes; layout [t][iy][c].
  const std::vector<Complex>& spectral() const { return state_; }
  // Same layout for D_y^k u (finite differences).
  std::vector<Complex> spectral_normal_derivative(int k) const;
  Field field() const;
  const ParabolicDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::vector<Complex> state_;
  ParabolicDiagnostics diagnostics_;
  int step_ = 0;
  int steps_ = 0;
  double dt_ = 0.0;
};

ParabolicSolution solve_parabolic(const ParabolicProblem& problem, const ParabolicOptions& options = {});

struct MrResolution {
  int steps = 16;
  int normal_points = 96;
};

struct MrHarnessOptions {
  int trials = 4;
  unsigned long long seed = 0;
  double T = 1.0;
  int tangential_points = 16;
  double tangential_length = 6.283185307179586;
  double normal_extent = 16.0;
  std::vector<MrResolution> resolutions{{16, 128}, {64, 128}, {256, 128}, {1024, 128}, {4096, 128}};
  // Negative control: boundary data that do not vanish at t = 0 on slots with kappa > 1/p.
  bool violate_compatibility = false;
  double growth_limit = 0.3;
  int data_time_samples = 256;
};

struct MrSample {
  int resolution = 0;
  int trial = 0;
  double lhs = 0.0;  // ||d_t u|| + sum_{|alpha| = 2m} ||D^alpha u||
  double rhs = 0.0;  // ||f|| + sum of boundary data norms
  double ratio = 0.0;
};

struct MrReport {
  std::vector<MrSample> samples;
  std::vector<double> max_ratio;  // per resolution
  std::vector<double> growth;     // max_ratio[r + 1] / max_ratio[r] - 1
  bool stable = false;
  double blowup = 0.0;  // max_ratio.back() / max_ratio.front()
  int skipped = 0;
};

MrReport mr_ratio_harness(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec,
                          const MrHarnessOptions& options = {});

}  // namespace lopashka
