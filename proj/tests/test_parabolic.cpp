#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "lopashka/error.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/halfspace.hpp"
#include "lopashka/normal_ode.hpp"
#include "lopashka/parabolic.hpp"
#include "lopashka/parallel.hpp"

using namespace lopashka;

namespace {

// u* = e^{-t} e^{-y} cos x' is harmonic in space, so d_t u* - Delta u* = -u*.
Complex heat_exact(double t, double x, double y) { return std::exp(-t - y) * std::cos(x); }

Field heat_field(const Grid& grid, double t, double sign = 1.0) {
  Field u(grid, 1);
  for (std::size_t k = 0; k < grid.tangential.size(); ++k) {
    const double x = grid.tangential.coordinate(k)[0];
    for (int iy = 0; iy < grid.normal.size(); ++iy) u.at(k, iy, 0) = sign * heat_exact(t, x, grid.normal.y[iy]);
  }
  return u;
}

TraceSource heat_trace(const TangentialGrid& grid) {
  return [grid](double t) {
    TraceField g(grid, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) g.at(k, 0) = heat_exact(t, grid.coordinate(k)[0], 0.0);
    return std::vector<TraceField>{g};
  };
}

// Manufactured heat problem; Dirichlet and outer-normal Neumann data coincide for u*.
ParabolicProblem heat_manufactured(const Problem& fixture, int normal_points = 160) {
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(20.0, normal_points)};
  ParabolicProblem p{fixture.symbol, fixture.boundary, grid, 1.0, {}, {}, heat_field(grid, 0.0)};
  p.f = [grid](double t) { return heat_field(grid, t, -1.0); };
  p.g = heat_trace(grid.tangential);
  return p;
}

double sup_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
  return d;
}

Field final_state(const ParabolicProblem& p, int steps) {
  ParabolicOptions o;
  o.steps = steps;
  return solve_parabolic(p, o).snapshots.back();
}

}  // namespace

TEST(KappaTest, ExactArithmetic) {
  EXPECT_EQ(kappa_exponent(1, 0, 2.0), 0.75);
  EXPECT_EQ(kappa_exponent(1, 1, 2.0), 0.25);
  EXPECT_EQ(kappa_exponent(2, 0, 2.0), 0.875);
  EXPECT_EQ(kappa_exponent(2, 3, 2.0), 0.125);
  EXPECT_DOUBLE_EQ(kappa_exponent(1, 0, 4.0), 0.875);
  EXPECT_THROW(kappa_exponent(1, 2, 2.0), Error);
  EXPECT_THROW(kappa_exponent(1, 0, 1.0), Error);
}

TEST(ValidateDataTest, CompatibilityFlaggedOnlyWhenRequired) {
  const auto dir = heat_manufactured(heat_dirichlet());
  const auto good = validate_data(dir);
  ASSERT_EQ(good.slots.size(), 1u);
  EXPECT_TRUE(good.validated);
  EXPECT_EQ(good.slots[0].kappa, 0.75);
  EXPECT_EQ(good.slots[0].space_order, 1.5);
  EXPECT_TRUE(good.slots[0].compatibility_required);
  EXPECT_LT(good.slots[0].compatibility_defect, 1e-12);
  EXPECT_TRUE(good.compatible());

  auto bad = dir;
  bad.u0 = Field{};
  const auto flagged = validate_data(bad);
  EXPECT_FALSE(flagged.slots[0].compatible);
  EXPECT_NEAR(flagged.slots[0].compatibility_defect, 1.0, 1e-12);
  EXPECT_THROW(solve_parabolic(bad), Error);
  ParabolicOptions o;
  o.steps = 4;
  o.allow_invalid_data = true;
  EXPECT_NO_THROW(solve_parabolic(bad, o));

  // kappa_1 = 1/4 < 1/2: no condition on the Neumann datum.
  auto neu = heat_manufactured(heat_neumann());
  neu.u0 = Field{};
  const auto free = validate_data(neu);
  EXPECT_EQ(free.slots[0].kappa, 0.25);
  EXPECT_FALSE(free.slots[0].compatibility_required);
  EXPECT_TRUE(free.compatible());

  // The derivative row is checked through the normal stencils when it is required.
  auto neu_u0 = heat_manufactured(heat_neumann());
  neu_u0.p = 8.0;  // kappa_1 = (1 - 1/8) / 2 > 1/8
  neu_u0.q = 8.0;
  const auto derivative = validate_data(neu_u0);
  EXPECT_TRUE(derivative.slots[0].compatibility_required);
  EXPECT_LT(derivative.slots[0].compatibility_defect, 1e-6);
  EXPECT_TRUE(derivative.validated);

  auto mixed = dir;
  mixed.q = 3.0;
  const auto not_validated = validate_data(mixed);
  EXPECT_FALSE(not_validated.validated);
  EXPECT_FALSE(not_validated.note.empty());
}

TEST(ValidateDataTest, SeminormQuadratureOracles) {
  // h(t) = t on (0, 1): double integral of |t - s|^{1 - 2 s} in closed form.
  // The excluded diagonal cells cost O(dt^{2 - 2 s}) of the squared seminorm.
  for (double s : {0.25, 0.75}) {
    const double exact = std::sqrt(2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s)));
    std::vector<double> err;
    for (int S : {400, 1600}) {
      const double dt = 1.0 / S;
      std::vector<std::vector<Complex>> values;
      for (int i = 0; i < S; ++i) values.push_back({Complex((i + 0.5) * dt)});
      err.push_back(std::abs(time_seminorm(values, dt, 1.0, s) / exact - 1.0));
    }
    EXPECT_LT(err[1], 0.02) << s;
    EXPECT_LT(err[1], 0.6 * err[0]) << s;
  }

  // e^{ix} on the circle: 2 pi int_{-pi}^{pi} (2 - 2 cos r) / |r|^{1 + 2 sigma} dr.
  const TangentialGrid grid = TangentialGrid::uniform(1, 256, 2 * kPi);
  TraceField g(grid, 1);
  for (std::size_t t = 0; t < grid.size(); ++t) g.at(t, 0) = std::exp(kI * grid.coordinate(t)[0]);
  for (double sigma : {0.25, 0.5}) {
    auto f = [sigma](double r) { return (2.0 - 2.0 * std::cos(r)) / std::pow(r, 1.0 + 2.0 * sigma); };
    const double exact = std::sqrt(2.0 * kPi * 2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, kPi));
    EXPECT_NEAR(space_seminorm(g, sigma) / exact, 1.0, 0.02) << sigma;
    // Order 1 + sigma acts on the derivative i e^{ix}, which has the same seminorm.
    EXPECT_NEAR(space_seminorm(g, 1.0 + sigma) / exact, 1.0, 0.02) << sigma;
  }
  EXPECT_NEAR(space_seminorm(g, 1.0), std::sqrt(2 * kPi), 1e-10);
}

TEST(ParabolicTest, ZeroDataGivesZero) {
  const auto fixture = catalysis();
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(10.0, 64)};
  ParabolicProblem p{fixture.symbol, fixture.boundary, grid, 1.0, {}, {}, Field{}};
  ParabolicOptions o;
  o.steps = 10;
  o.output_every = 5;
  const auto sol = solve_parabolic(p, o);
  ASSERT_EQ(sol.snapshots.size(), 3u);
  for (const auto& s : sol.snapshots) EXPECT_EQ(max_abs(s), 0.0);
}

TEST(ParabolicTest, HeatManufacturedSecondOrderInTime) {
  for (const auto& fixture : {heat_dirichlet(), heat_neumann()}) {
    const auto p = heat_manufactured(fixture);
    const Field exact = heat_field(p.grid, 1.0);
    std::vector<Field> u;
    for (int steps : {20, 40, 80}) u.push_back(final_state(p, steps));
    EXPECT_LE(sup_diff(u[2], exact), 1e-4) << fixture.name;
    const double order = std::log2(sup_diff(u[0], u[1]) / sup_diff(u[1], u[2]));
    EXPECT_GE(order, 1.9) << fixture.name;
    EXPECT_LE(order, 2.2) << fixture.name;
  }
}

TEST(ParabolicTest, BiharmonicManufactured) {
  // Delta^2 u* = 0 as well; rows u = g_1 and -d_y u = g_2.
  const auto fixture = biharmonic();
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(20.0, 200)};
  ParabolicProblem p{fixture.symbol, fixture.boundary, grid, 0.5, {}, {}, heat_field(grid, 0.0)};
  p.f = [grid](double t) { return heat_field(grid, t, -1.0); };
  p.g = [grid](double t) {
    auto g = heat_trace(grid.tangential)(t);
    return std::vector<TraceField>{g[0], g[0]};
  };
  ParabolicOptions o;
  o.steps = 100;
  const auto sol = solve_parabolic(p, o);
  EXPECT_LE(sup_diff(sol.snapshots.back(), heat_field(grid, 0.5)), 1e-4);
  EXPECT_LE(sol.diagnostics.boundary_residual, 1e-10);
  EXPECT_LE(sol.diagnostics.stage_residual, 1e-9);
}

TEST(ParabolicTest, Causality) {
  auto p = heat_manufactured(heat_dirichlet(), 96);
  ParabolicOptions o;
  o.steps = 40;
  o.output_every = 20;
  const auto base = solve_parabolic(p, o);
  auto perturbed = p;
  const auto f0 = p.f;
  const auto g0 = p.g;
  perturbed.f = [f0](double t) {
    Field f = f0(t);
    if (t > 0.5 + 1e-12) for (auto& v : f.data) v += 3.0;
    return f;
  };
  perturbed.g = [g0](double t) {
    auto g = g0(t);
    if (t > 0.5 + 1e-12) for (auto& v : g[0].data) v *= 2.0;
    return g;
  };
  const auto other = solve_parabolic(perturbed, o);
  ASSERT_EQ(base.times[1], 0.5);
  EXPECT_EQ(base.snapshots[1].data, other.snapshots[1].data);
  EXPECT_GT(sup_diff(base.snapshots[2], other.snapshots[2]), 1e-2);
}

TEST(ParabolicTest, LinearityAndThreadDeterminism) {
  const auto fixture = catalysis();
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(12.0, 64)};
  auto make = [&](double a, double b) {
    ParabolicProblem p{fixture.symbol, fixture.boundary, grid, 0.5, {}, {}, Field{}};
    p.f = [grid, a](double t) {
      Field f(grid, 3);
      for (std::size_t k = 0; k < grid.tangential.size(); ++k) {
        const double x = grid.tangential.coordinate(k)[0];
        for (int iy = 0; iy < grid.normal.size(); ++iy) {
          for (int c = 0; c < 3; ++c) f.at(k, iy, c) = a * std::sin(x + c + t) * std::exp(-grid.normal.y[iy]);
        }
      }
      return f;
    };
    p.g = [grid, b](double t) {
      TraceField row(grid.tangential, 3);
      for (std::size_t k = 0; k < grid.tangential.size(); ++k) {
        const double x = grid.tangential.coordinate(k)[0];
        const CVector v = catalysis_row_datum({}, std::sin(t) * std::cos(x), std::cos(2 * x + t), 0.5);
        for (int c = 0; c < 3; ++c) row.at(k, c) = b * v[c];
      }
      return slot_data_from_rows(catalysis().boundary, {row});
    };
    return p;
  };
  ParabolicOptions o;
  o.steps = 16;
  const Field u1 = solve_parabolic(make(1.0, 0.0), o).snapshots.back();
  const Field u2 = solve_parabolic(make(0.0, 1.0), o).snapshots.back();
  const Field u12 = solve_parabolic(make(2.0, -3.0), o).snapshots.back();
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u12.data.size(); ++i) {
    err = std::max(err, std::abs(u12.data[i] - 2.0 * u1.data[i] + 3.0 * u2.data[i]));
    scale = std::max(scale, std::abs(u12.data[i]));
  }
  EXPECT_LE(err, 1e-10 * scale);

  set_thread_count(1);
  const Field serial = solve_parabolic(make(1.0, 1.0), o).snapshots.back();
  set_thread_count(3);
  const Field threaded = solve_parabolic(make(1.0, 1.0), o).snapshots.back();
  set_thread_count(0);
  EXPECT_EQ(serial.data, threaded.data);
}

TEST(ParabolicTest, CatalysisFluxBalance) {
  // d/dt int (beta_1 u_1 / d_1 + beta_2 u_2 / d_2) = int g_2 for the beta flux row.
  const CatalysisParameters params;
  const auto fixture = catalysis(params);
  const double L = 2 * kPi;
  const Grid grid{TangentialGrid::uniform(1, 4, L), NormalGrid::graded(24.0, 320)};
  ParabolicProblem p{fixture.symbol, fixture.boundary, grid, 1.0, {}, {}, Field{}};
  p.g = [grid, params, fixture](double t) {
    TraceField row(grid.tangential, 3);
    const CVector v = catalysis_row_datum(params, 0.0, std::sin(t), 0.3 * std::sin(2 * t));
    for (std::size_t k = 0; k < grid.tangential.size(); ++k) {
      for (int c = 0; c < 3; ++c) row.at(k, c) = v[c];
    }
    return slot_data_from_rows(fixture.boundary, {row});
  };
  const auto w = interpolant_weights(grid.normal);
  auto mass = [&](const Field& u) {
    Complex s = 0.0;
    for (std::size_t k = 0; k < grid.tangential.size(); ++k) {
      for (int iy = 0; iy < grid.normal.size(); ++iy) {
        const Complex m = params.beta[0] / params.d[0] * u.at(k, iy, 0) + params.beta[1] / params.d[1] * u.at(k, iy, 1);
        s += grid.tangential.cell_volume() * w[iy] * m;
      }
    }
    return s;
  };
  ParabolicOptions o;
  o.steps = 800;
  const auto sol = solve_parabolic(p, o);
  const Complex balance = mass(sol.snapshots.back()) - mass(sol.snapshots.front());
  const double flux = L * (1.0 - std::cos(1.0));
  EXPECT_NEAR(balance.real(), flux, 1e-6);
  EXPECT_NEAR(balance.imag(), 0.0, 1e-6);
}

TEST(ParabolicTest, SectorGateAndErrors) {
  const auto heat = heat_dirichlet();
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(10.0, 64)};
  // Spectrum on the ray arg = 1.7 > pi/2.
  const InteriorSymbol rotated(2, 1, polyharmonic_coefficients(2, 1, CMatrix::Constant(1, 1, std::polar(1.0, 1.7))));
  const BoundaryOperatorSpec spec(rotated, heat.boundary.rows());
  ParabolicProblem wide{rotated, spec, grid, 1.0, {}, {}, Field{}};
  try {
    solve_parabolic(wide);
    FAIL() << "expected a sector error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Sector);
  }

  ParabolicProblem nan_data{heat.symbol, heat.boundary, grid, 1.0, {}, {}, Field{}};
  nan_data.g = [grid](double t) {
    TraceField g(grid.tangential, 1);
    if (t > 0.3) g.at(1, 0) = std::nan("");
    return std::vector<TraceField>{g};
  };
  ParabolicOptions o;
  o.steps = 10;
  try {
    solve_parabolic(nan_data, o);
    FAIL() << "expected a numerical error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numerical);
    const std::string what = e.what();
    EXPECT_NE(what.find("xi'"), std::string::npos) << what;
    EXPECT_NE(what.find("time step 3"), std::string::npos) << what;
  }

  ParabolicProblem wrong{heat.symbol, heat.boundary, grid, 1.0, {}, {}, Field{}};
  wrong.g = [grid](double) { return std::vector<TraceField>{}; };
  EXPECT_THROW(solve_parabolic(wrong, o), Error);
  ParabolicProblem negative_time{heat.symbol, heat.boundary, grid, -1.0, {}, {}, Field{}};
  EXPECT_THROW(solve_parabolic(negative_time, o), Error);
}

TEST(MrHarnessTest, CompatibleDataStableUnderRefinement) {
  for (const auto& fixture : {heat_dirichlet(), catalysis()}) {
    MrHarnessOptions o;
    o.trials = 3;
    o.resolutions = {{16, 96}, {64, 96}, {256, 96}};
    const auto report = mr_ratio_harness(fixture.symbol, fixture.boundary, o);
    EXPECT_TRUE(report.stable) << fixture.name;
    for (double g : report.growth) EXPECT_LT(std::abs(g), 0.3) << fixture.name;
    EXPECT_EQ(report.samples.size(), 9u);
    for (const auto& s : report.samples) EXPECT_GT(s.ratio, 0.0);
  }
}

TEST(MrHarnessTest, IncompatibleDataBlowsUp) {
  const auto fixture = heat_dirichlet();
  MrHarnessOptions o;
  o.trials = 1;
  o.violate_compatibility = true;
  o.resolutions = {{16, 96}, {64, 96}, {256, 96}, {1024, 96}, {4096, 96}};
  const auto report = mr_ratio_harness(fixture.symbol, fixture.boundary, o);
  EXPECT_FALSE(report.stable);
  EXPECT_GE(report.blowup, 3.0);
}
