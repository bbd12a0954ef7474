// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lopashka/cli.hpp"
#include "lopashka/companion.hpp"
#include "lopashka/ellipticity.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/halfspace.hpp"
#include "lopashka/kernels.hpp"
#include "lopashka/lopatinskii.hpp"
#include "lopashka/parabolic.hpp"

using namespace lopashka;

namespace {

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

std::string sci(double x) { return fmt("%.3e", x); }

class Criterion {
 public:
  Criterion(int id, std::string name, double budget_seconds)
      : id_(id), name_(std::move(name)), budget_(budget_seconds), start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    ok_ = ok_ && ok;
    details_.push_back(ok ? detail : detail + " [violated]");
  }

  // Prints the verdict line; the runtime budget is part of the criterion.
  bool finish() {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    check(seconds < budget_, "runtime " + fmt("%.1f", seconds) + " s < " + fmt("%.0f", budget_) + " s");
    std::string joined;
    for (std::size_t i = 0; i < details_.size(); ++i) joined += (i ? "; " : "") + details_[i];
    std::cout << (ok_ ? "PASS" : "FAIL") << " criterion " << id_ << " (" << name_ << "): " << joined << std::endl;
    return ok_;
  }

  // Runs a block; an exception fails the criterion with its message.
  void guard(const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(false, std::string("exception: ") + e.what());
    }
  }

 private:
  int id_;
  std::string name_;
  double budget_;
  std::chrono::steady_clock::time_point start_;
  bool ok_ = true;
  std::vector<std::string> details_;
};

InteriorSymbol laplacian_times(const CMatrix& D) { return InteriorSymbol(2, static_cast<int>(D.rows()), polyharmonic_coefficients(2, 1, D)); }

// Largest |arg| of the eigenvalues of a 2x2 matrix by the quadratic formula.
double max_arg_2x2(const CMatrix& A) {
  const Complex tr = A.trace();
  const Complex disc = std::sqrt(tr * tr - 4.0 * A.determinant());
  return std::max(std::abs(std::arg((tr + disc) / 2.0)), std::abs(std::arg((tr - disc) / 2.0)));
}

bool criterion_ellipticity() {
  Criterion c(1, "ellipticity", 5.0);
  c.guard([&] {
    const double lap = ellipticity_angle(heat_dirichlet().symbol, 4096).angle;
    c.check(std::abs(lap) <= 1e-8, "Laplacian angle " + sci(lap));
    CMatrix D = CMatrix::Zero(2, 2);
    D(0, 0) = 1.0;
    D(1, 1) = std::polar(1.0, 0.3);
    const double rot = ellipticity_angle(laplacian_times(D), 4096).angle;
    c.check(std::abs(rot - 0.3) <= 1e-8, "diag(1, e^{0.3i}) angle error " + sci(std::abs(rot - 0.3)));
    CMatrix S(2, 2);
    S << 1.0, 0.5, -0.5, 1.0;
    const double skew = ellipticity_angle(laplacian_times(S), 4096).angle;
    c.check(std::abs(skew - std::atan(0.5)) <= 1e-6 && std::abs(skew - max_arg_2x2(S)) <= 1e-6,
            "skew-coupled angle error " + sci(std::abs(skew - std::atan(0.5))) + " (eigen-oracle " +
                sci(std::abs(skew - max_arg_2x2(S))) + ")");
  });
  return c.finish();
}

bool criterion_lopatinskii() {
  Criterion c(2, "Lopatinskii-Shapiro", 30.0);
  c.guard([&] {
    for (const auto& p : {heat_dirichlet(), heat_neumann()}) {
      const auto v = ls_sweep(p.symbol, p.boundary, kPi / 2);
      c.check(v.passes && v.worst_condition < 10.0 && v.oracle_max_error <= 1e-8,
              p.name + " " + (v.passes ? "passes" : "fails") + " over " + std::to_string(v.sweep_size) +
                  " points, worst condition " + fmt("%.3f", v.worst_condition) + ", oracle " + sci(v.oracle_max_error));
    }
    const auto cat = catalysis(CatalysisParameters{{1, 2, 3}, {1, 1, 1}, {1, -2}, {1, 3}});
    const auto v = ls_sweep(cat.symbol, cat.boundary, kPi / 2);
    c.check(v.passes && v.oracle_max_error <= 1e-8,
            std::string("catalysis ") + (v.passes ? "passes" : "fails") + ", oracle " + sci(v.oracle_max_error));
    const auto dup = duplicate_rows();
    const auto d = ls_sweep(dup.symbol, dup.boundary, kPi / 2);
    c.check(!d.passes && d.failure == "rank deficient", "duplicate rows verdict \"" + d.failure + "\"");
  });
  return c.finish();
}

bool criterion_kernels() {
  Criterion c(3, "kernel lab", 60.0);
  c.guard([&] {
    const double p = p_kernel(1, 0, 2, 1.0);
    c.check(std::abs(p - std::exp(-1.0)) <= 1e-8, "p_{1,0}^2(1) error " + sci(std::abs(p - std::exp(-1.0))));
    double worst = 0.0;
    int cases = 0;
    for (int k : {1, 2, 4}) {
      for (auto [cc, y] : {std::pair{0.5, 2.0}, std::pair{1.0, 1.0}, std::pair{2.0, 0.5}}) {
        for (int n : {2, 3}) {
          worst = std::max(worst, lemma_integral_identity_check(k, 0, n, cc, y).residual);
          ++cases;
        }
      }
    }
    c.check(worst <= 1e-6, "integral identity worst residual " + sci(worst) + " over " + std::to_string(cases) + " cases");
    const auto heat = heat_dirichlet();
    std::vector<double> cs;
    bool feasible = true;
    for (double theta : {0.0, kPi / 3, -kPi / 3}) {
      for (double r : {1.0, 4.0, 16.0}) {
        const Complex lambda = std::polar(r, theta);
        const auto fit = verify_kernel_decay(compute_kernel_field(heat.symbol, heat.boundary, lambda, kernel_grid(1, 1, lambda)));
        feasible = feasible && fit.feasible;
        cs.push_back(fit.c);
      }
    }
    double mean = 0.0;
    for (double v : cs) mean += v / static_cast<double>(cs.size());
    double dev = 0.0;
    for (double v : cs) dev = std::max(dev, std::abs(v - mean) / mean);
    c.check(feasible && dev <= 0.2, std::string("heat decay fit ") + (feasible ? "feasible" : "infeasible") +
                                        ", c = " + fmt("%.4f", mean) + " +- " + fmt("%.1f", 100 * dev) + "%");
  });
  return c.finish();
}

double sup_error(const Field& u, const std::function<Complex(double, double, int)>& exact) {
  double err = 0.0;
  for (std::size_t t = 0; t < u.grid.tangential.size(); ++t) {
    const double x = u.grid.tangential.coordinate(t)[0];
    for (int iy = 0; iy < u.grid.normal.size(); ++iy) {
      for (int comp = 0; comp < u.components; ++comp) {
        err = std::max(err, std::abs(u.at(t, iy, comp) - exact(x, u.grid.normal.y[iy], comp)));
      }
    }
  }
  return err;
}

Field sample(const Grid& grid, int N, const std::function<Complex(double, double, int)>& fn) {
  Field f(grid, N);
  for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
    const double x = grid.tangential.coordinate(t)[0];
    for (int iy = 0; iy < grid.normal.size(); ++iy) {
      for (int comp = 0; comp < N; ++comp) f.at(t, iy, comp) = fn(x, grid.normal.y[iy], comp);
    }
  }
  return f;
}

TraceField trace(const TangentialGrid& grid, const CVector& v, const std::function<double(double)>& shape) {
  TraceField g(grid, static_cast<int>(v.size()));
  for (std::size_t t = 0; t < grid.size(); ++t) {
    for (int comp = 0; comp < v.size(); ++comp) g.at(t, comp) = v(comp) * shape(grid.coordinate(t)[0]);
  }
  return g;
}

Grid heat_grid(int tangential, int normal) {
  return Grid{TangentialGrid::uniform(1, tangential, 2.0 * kPi), NormalGrid::graded(40.0, normal)};
}

bool criterion_halfspace() {
  Criterion c(4, "half-space solver", 120.0);
  c.guard([&] {
    // u* = e^{-y} cos x' is harmonic: lambda u* - Delta u* = lambda u*.
    const auto heat = heat_dirichlet();
    auto exact = [](double x, double y, int) -> Complex { return std::exp(-y) * std::cos(x); };
    const Grid grid = heat_grid(256, 256);
    HalfSpaceProblem hp{heat.symbol, heat.boundary, 1.0, grid, sample(grid, 1, exact),
                        {trace(grid.tangential, CVector::Ones(1), [](double x) { return std::cos(x); })}};
    const double e = sup_error(solve_halfspace(hp).u, exact);
    c.check(e <= 1e-6, "Dirichlet heat 256x256 sup error " + sci(e));

    // g = 1 / (a + cos x'): Fourier coefficients 2 (-r)^|k| / s with s = sqrt(a^2 - 1), r = a - s.
    const double a = 1.5, s = std::sqrt(a * a - 1.0), r = a - s;
    auto series = [&](double x, double y, int) -> Complex {
      double sum = std::exp(-y) / s;
      for (int k = 1; k <= 80; ++k) sum += 2.0 * std::pow(-r, k) / s * std::cos(k * x) * std::exp(-std::sqrt(1.0 + k * k) * y);
      return sum;
    };
    auto error_at = [&](int points) {
      const Grid g = heat_grid(points, 64);
      HalfSpaceProblem q{heat.symbol, heat.boundary, 1.0, g, Field(),
                         {trace(g.tangential, CVector::Ones(1), [&](double x) { return 1.0 / (a + std::cos(x)); })}};
      return sup_error(solve_halfspace(q).u, series);
    };
    const double e32 = error_at(32), e64 = error_at(64);
    c.check(e32 > 100.0 * e64, "tangential convergence 32 -> 64 modes: " + sci(e32) + " -> " + sci(e64));

    // Catalysis with u*_i = e^{-a_i y} cos x': (lambda - d_i Delta) u*_i = (lambda + d_i (1 - a_i^2)) u*_i.
    const CatalysisParameters params;
    const auto cat = catalysis(params);
    const double decay[3] = {1.0, 2.0, 1.0};
    auto cat_exact = [&](double x, double y, int comp) -> Complex { return std::exp(-decay[comp] * y) * std::cos(x); };
    const Grid cg = heat_grid(64, 256);
    const CVector datum = catalysis_row_datum(
        params, params.alpha[0] + params.alpha[1] + params.alpha[2], params.beta[0] * decay[0] + params.beta[1] * decay[1],
        params.gamma[0] * decay[0] + params.gamma[1] * decay[2]);
    HalfSpaceProblem cp{cat.symbol, cat.boundary, 1.0, cg,
                        sample(cg, 3, [&](double x, double y, int comp) {
                          return (1.0 + params.d[comp] * (1.0 - decay[comp] * decay[comp])) * cat_exact(x, y, comp);
                        }),
                        slot_data_from_rows(cat.boundary, {trace(cg.tangential, datum, [](double x) { return std::cos(x); })})};
    const double ec = sup_error(solve_halfspace(cp).u, cat_exact);
    c.check(ec <= 1e-5, "catalysis manufactured sup error " + sci(ec));

    ResolventHarnessOptions ro;
    ro.trials = 3;
    ro.tangential_points = 32;
    ro.normal_points = 96;
    const auto rep = resolvent_estimate_harness(heat.symbol, heat.boundary, ro);
    c.check(rep.stable && rep.spread <= 1.3, "resolvent ratios over |lambda| in [1, 1e3]: spread " + fmt("%.3f", rep.spread));
  });
  return c.finish();
}

bool criterion_rbounds() {
  Criterion c(5, "R-bounds", 60.0);
  c.guard([&] {
    for (const auto& suite : cli::rbound_suite_names()) {
      const auto o = cli::run_rbound_suite(suite, 0);
      std::string detail = suite;
      const auto& r = o.results;
      if (suite == "definition") {
        detail += ": estimate / sup = " + fmt("%.4f", r.at("estimate").get<double>() / r.at("analytic_sup").get<double>());
      } else if (suite == "neumann") {
        detail += ": estimate " + fmt("%.4f", r.at("resolvent_estimate").get<double>()) + " <= " + fmt("%.4f", 1.05 / (1.0 - 0.5));
      } else if (suite == "sector") {
        detail += ": derivative " + fmt("%.4f", r.at("derivative_estimate").get<double>()) + " <= " +
                  fmt("%.4f", r.at("bound").get<double>());
      } else if (suite == "mikhlin") {
        detail += ": max spread " + fmt("%.3f", r.at("max_spread").get<double>()) + " < 2";
      } else {
        detail += ": " + std::to_string(r.at("violations").get<int>()) + " violations in " +
                  std::to_string(r.at("samples").get<int>());
      }
      c.check(o.passed(), detail);
    }
  });
  return c.finish();
}

// u* = e^{-t} e^{-y} cos x' solves d_t u - Delta u = -u*.
ParabolicProblem heat_manufactured() {
  const auto heat = heat_dirichlet();
  const Grid grid{TangentialGrid::uniform(1, 8, 2 * kPi), NormalGrid::graded(20.0, 160)};
  auto field = [grid](double t, double sign) {
    return sample(grid, 1, [&](double x, double y, int) -> Complex { return sign * std::exp(-t - y) * std::cos(x); });
  };
  ParabolicProblem p{heat.symbol, heat.boundary, grid, 1.0, {}, {}, field(0.0, 1.0)};
  p.f = [field](double t) { return field(t, -1.0); };
  p.g = [grid](double t) {
    return std::vector<TraceField>{trace(grid.tangential, CVector::Ones(1), [t](double x) { return std::exp(-t) * std::cos(x); })};
  };
  return p;
}

double sup_diff(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
  return d;
}

bool criterion_parabolic() {
  Criterion c(6, "parabolic", 180.0);
  c.guard([&] {
    const auto p = heat_manufactured();
    std::vector<Field> u;
    for (int steps : {20, 40, 80}) {
      ParabolicOptions o;
      o.steps = steps;
      u.push_back(solve_parabolic(p, o).snapshots.back());
    }
    const double order = std::log2(sup_diff(u[0], u[1]) / sup_diff(u[1], u[2]));
    c.check(order >= 1.9, "temporal order by step halving " + fmt("%.3f", order));

    for (const auto& fixture : {heat_dirichlet(), catalysis()}) {
      const auto rep = mr_ratio_harness(fixture.symbol, fixture.boundary, MrHarnessOptions{});
      double growth = 0.0;
      for (double g : rep.growth) growth = std::max(growth, g);
      c.check(rep.stable && growth < 0.3, fixture.name + " MR ratio " + fmt("%.4f", rep.max_ratio.front()) + " -> " +
                                              fmt("%.4f", rep.max_ratio.back()) + ", max growth " +
                                              fmt("%.2f", 100 * growth) + "%");
    }
    MrHarnessOptions control;
    control.trials = 2;
    control.violate_compatibility = true;
    const auto heat = heat_dirichlet();
    const auto bad = mr_ratio_harness(heat.symbol, heat.boundary, control);
    c.check(bad.blowup >= 3.0, "incompatible-data control blow-up " + fmt("%.2f", bad.blowup) + "x");

    const double k0 = kappa_exponent(1, 0, 2.0), k1 = kappa_exponent(1, 1, 2.0);
    c.check(k0 == 0.75 && k1 == 0.25, "kappa_0 = " + fmt("%.17g", k0) + ", kappa_1 = " + fmt("%.17g", k1));
  });
  return c.finish();
}

bool criterion_structure() {
  Criterion c(7, "structural invariants", 300.0);
  c.guard([&] {
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    double proj = 0.0, homog = 0.0, split_sum = 0.0, leak = 0.0;
    for (const auto& name : fixture_names()) {
      const Problem p = make_fixture(name);
      for (const auto& row : p.boundary.rows()) {
        for (std::size_t k = 0; k < row.components.size(); ++k) {
          const CMatrix& P = row.components[k].projection.matrix();
          proj = std::max(proj, (P * P - P).norm());
          for (std::size_t l = 0; l < row.components.size(); ++l) {
            if (l != k) proj = std::max(proj, (P * row.components[l].projection.matrix()).norm());
          }
        }
      }
      for (int t = 0; t < 10; ++t) {
        std::vector<Complex> xi(p.symbol.dim()), txi(p.symbol.dim());
        const double s = std::exp(ud(rng));
        for (int i = 0; i < p.symbol.dim(); ++i) {
          xi[i] = ud(rng);
          txi[i] = s * xi[i];
        }
        const CMatrix a = p.symbol.eval(std::span<const Complex>(xi));
        const CMatrix b = p.symbol.eval(std::span<const Complex>(txi));
        homog = std::max(homog, (b - std::pow(s, p.symbol.order()) * a).norm() / std::max(1.0, b.norm()));
      }
      if (name == "duplicate-rows" || name == "zero-boundary") continue;
      const int m = p.symbol.half_order();
      for (int t = 0; t < 10; ++t) {
        const double r = 0.5 * (ud(rng) + 1.0);
        const std::vector<Complex> b(p.symbol.tangential_dim(), r / std::sqrt(static_cast<double>(p.symbol.tangential_dim())));
        const Complex sigma = std::polar(1.0 - std::pow(r, 2 * m), 1.4 * ud(rng));
        const auto cs = build_companion(p.symbol, b, sigma);
        const auto split = spectral_split(cs);
        const auto map = build_solution_map(cs, boundary_rows(p.boundary, b), split);
        const CMatrix I = CMatrix::Identity(split.P_plus.rows(), split.P_plus.cols());
        split_sum = std::max(split_sum, (split.P_plus + split.P_minus - I).norm() / std::max(1.0, split.P_minus.norm()));
        leak = std::max(leak, (split.P_plus * map.M).norm() / std::max(1.0, map.M.norm()));
      }
    }
    c.check(proj <= 1e-10, "projection algebra " + sci(proj));
    c.check(homog <= 1e-12, "homogeneity " + sci(homog));
    c.check(split_sum <= 1e-9, "P+ + P- = I " + sci(split_sum));
    c.check(leak <= 1e-9, "P+ M = 0 " + sci(leak));

    // Linearity of the half-space solve in (f, g).
    const auto cat = catalysis();
    const Grid grid = heat_grid(16, 64);
    std::normal_distribution<double> nd;
    auto random_problem = [&]() {
      Field f = sample(grid, 3, [&](double x, double y, int) { return Complex(nd(rng), nd(rng)) * std::exp(-y) * std::cos(x); });
      CVector v(3);
      for (int i = 0; i < 3; ++i) v(i) = Complex(nd(rng), nd(rng));
      auto rows = std::vector<TraceField>{trace(grid.tangential, v, [](double x) { return std::sin(x) + 0.3 * std::cos(2 * x); })};
      return HalfSpaceProblem{cat.symbol, cat.boundary, Complex(2.0, 1.0), grid, std::move(f), slot_data_from_rows(cat.boundary, rows)};
    };
    auto p1 = random_problem();
    auto p2 = random_problem();
    auto p12 = p1;
    for (std::size_t i = 0; i < p12.f.data.size(); ++i) p12.f.data[i] += p2.f.data[i];
    for (std::size_t s = 0; s < p12.g.size(); ++s) {
      for (std::size_t i = 0; i < p12.g[s].data.size(); ++i) p12.g[s].data[i] += p2.g[s].data[i];
    }
    const auto u1 = solve_halfspace(p1).u, u2 = solve_halfspace(p2).u, u12 = solve_halfspace(p12).u;
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < u12.data.size(); ++i) {
      diff = std::max(diff, std::abs(u12.data[i] - u1.data[i] - u2.data[i]));
      scale = std::max(scale, std::abs(u12.data[i]));
    }
    c.check(diff <= 1e-10 * scale, "linearity of solves " + sci(diff / scale));

    // Byte-identical reports for identical argv and seed, independent of the worker count.
    const std::string path = "acceptance_catalysis.json";
    std::ostringstream sink, errs;
    cli::run({"fixtures", "emit", "catalysis", "--out", path}, sink, errs);
    bool identical = true;
    for (const auto& cmd : std::vector<std::vector<std::string>>{
             {"analyze", "ls", "--problem", path, "--arc-points", "16", "--directions", "8", "--radii", "8"},
             {"solve", "elliptic", "--problem", path, "--grid", "32x64"},
             {"verify", "rbounds", "--suite", "definition"}}) {
      std::vector<std::string> args{"--no-timestamps", "--seed", "3", "--threads", "1"};
      args.insert(args.end(), cmd.begin(), cmd.end());
      std::ostringstream a, b, e;
      const int ca = cli::run(args, a, e);
      args[4] = "2";
      const int cb = cli::run(args, b, e);
      identical = identical && ca == 0 && cb == 0 && a.str() == b.str() && !a.str().empty();
    }
    std::remove(path.c_str());
    c.check(identical, std::string("CLI report determinism ") + (identical ? "byte-identical" : "differs"));
  });
  return c.finish();
}

}  // namespace

int main() {
  bool all = true;
  all = criterion_ellipticity() && all;
  all = criterion_lopatinskii() && all;
  all = criterion_kernels() && all;
  all = criterion_halfspace() && all;
  all = criterion_rbounds() && all;
  all = criterion_parabolic() && all;
  all = criterion_structure() && all;
  return all ? 0 : 1;
}
