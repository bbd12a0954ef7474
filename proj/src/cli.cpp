#include "lopashka/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "lopashka/ellipticity.hpp"
#include "lopashka/field_io.hpp"
#include "lopashka/fixtures.hpp"
#include "lopashka/halfspace.hpp"
#include "lopashka/kernels.hpp"
#include "lopashka/lopatinskii.hpp"
#include "lopashka/parabolic.hpp"
#include "lopashka/parallel.hpp"
#include "lopashka/rbounds.hpp"

namespace lopashka::cli {

using nlohmann::json;

namespace {

struct Context {
  std::uint64_t seed = 0;
  bool timestamps = true;
  int threads = 0;
  std::string report_path;
};

// What a command run is about: enough to hash the configuration and route the report.
struct Invocation {
  std::string command;
  std::map<std::string, std::string> config;
  json problem;  // null when the command takes no problem
  std::string out_path;
  bool out_is_data = false;  // --out receives a binary field rather than the report
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::string complex_text(Complex z) {
  return format_number(z.real()) + (z.imag() < 0 ? "" : "+") + format_number(z.imag()) + "i";
}

void emit_report(const Context& ctx, const Invocation& inv, const Outcome& outcome, double seconds,
                 const std::string& error, std::ostream& out) {
  std::string key = inv.command + "\n";
  for (const auto& [k, v] : inv.config) key += k + "=" + v + "\n";
  key += inv.problem.dump();

  json report;
  report["command"] = inv.command;
  report["config"] = inv.config;
  report["config_hash"] = hex64(fnv1a64(key));
  report["seed"] = ctx.seed;
  if (!inv.problem.is_null()) report["problem"] = inv.problem.value("name", std::string("unnamed"));
  report["results"] = outcome.results;
  report["verdicts"] = outcome.verdicts;
  report["verdict"] = error.empty() && outcome.passed() ? "pass" : "fail";
  if (!error.empty()) report["error"] = error;
  report["table"] = json{{"columns", outcome.table.columns}, {"csv", outcome.table.csv()}};
  if (ctx.timestamps) {
    report["timestamp"] = utc_timestamp();
    report["timings"] = json{{"wall_seconds", seconds}};
  }
  const std::string text = report.dump(2) + "\n";

  const bool csv = ends_with(inv.out_path, ".csv");
  if (csv) write_text(inv.out_path, outcome.table.csv());
  if (!ctx.report_path.empty()) {
    write_text(ctx.report_path, text);
  } else if (!inv.out_path.empty() && !csv && !inv.out_is_data) {
    write_text(inv.out_path, text);
  } else {
    out << text;
  }
}

Problem take_problem(Invocation& inv, const std::string& path) {
  Problem problem = load_problem_file(path);
  inv.problem = problem_to_json(problem);
  return problem;
}

// Tangential points per dimension and the number of normal points.
std::pair<std::vector<int>, int> grid_shape(const std::string& text, int n) {
  const auto sizes = parse_grid(text);
  if (static_cast<int>(sizes.size()) == n + 1) {
    return {std::vector<int>(sizes.begin(), sizes.end() - 1), sizes.back()};
  }
  if (sizes.size() == 2) return {std::vector<int>(n, sizes[0]), sizes[1]};
  throw Error(ErrorKind::Parse, "grid \"" + text + "\" needs 2 or " + std::to_string(n + 1) + " sizes");
}

// Smooth periodic boundary data: slot s carries Q_s c_s prod_d exp(cos(2 pi x_d / L_d + s + d / 2) - 1)
// with random coefficients c_s, so every slot field lies in the range of its projection.
std::vector<TraceField> synthetic_slot_data(const BoundaryOperatorSpec& spec, const TangentialGrid& tg,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  std::vector<TraceField> g;
  for (std::size_t s = 0; s < spec.slots().size(); ++s) {
    const auto& slot = spec.slots()[s];
    const CMatrix& Q = spec.row(slot.row).components[slot.component].projection.range_basis();
    CVector c(Q.cols());
    for (int i = 0; i < c.size(); ++i) c(i) = Complex(ud(rng), ud(rng));
    const CVector v = Q * c;
    TraceField field(tg, spec.components());
    for (std::size_t t = 0; t < tg.size(); ++t) {
      const auto x = tg.coordinate(t);
      double profile = 1.0;
      for (int d = 0; d < tg.dims(); ++d) {
        profile *= std::exp(std::cos(2.0 * kPi * x[d] / tg.lengths[d] + static_cast<double>(s) + 0.5 * d) - 1.0);
      }
      for (int comp = 0; comp < spec.components(); ++comp) field.at(t, comp) = v(comp) * profile;
    }
    g.push_back(std::move(field));
  }
  return g;
}

json slot_reports(const DataClassReport& data) {
  json slots = json::array();
  for (const auto& s : data.slots) {
    slots.push_back(json{{"slot", s.slot},
                         {"row", s.row},
                         {"component", s.component},
                         {"order", s.order},
                         {"kappa", s.kappa},
                         {"space_order", s.space_order},
                         {"compatibility_required", s.compatibility_required},
                         {"compatibility_defect", s.compatibility_defect},
                         {"compatible", s.compatible}});
  }
  return slots;
}

// --- commands ---------------------------------------------------------------

struct EllipticityArgs {
  std::string problem;
  int samples = 4096;
  std::string out;
};

Outcome analyze_ellipticity(const Context&, Invocation& inv, const EllipticityArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  inv.config["samples"] = std::to_string(a.samples);
  inv.out_path = a.out;
  if (a.samples < 64) throw Error(ErrorKind::Domain, "--samples must be at least 64");

  const auto rep = ellipticity_angle(p.symbol, a.samples);
  Outcome o;
  o.results = json{{"even_order", rep.is_even_order},
                   {"a0_invertible", rep.a0_invertible},
                   {"a0_condition", rep.a0_condition},
                   {"a0_min_singular", rep.a0_min_singular},
                   {"elliptic", rep.elliptic},
                   {"angle", rep.angle},
                   {"worst_xi", rep.worst_xi},
                   {"samples", rep.samples},
                   {"refinement_delta", rep.refinement_delta}};
  o.verdicts["parameter_elliptic"] = rep.elliptic;
  o.table.columns = {"samples", "angle"};
  for (int s = std::max(64, a.samples / 8); s < a.samples; s *= 2) {
    o.table.rows.push_back({std::to_string(s), format_number(ellipticity_angle(p.symbol, s).angle)});
  }
  o.table.rows.push_back({std::to_string(a.samples), format_number(rep.angle)});
  return o;
}

struct LsArgs {
  std::string problem;
  double phi = kPi / 2;
  int arc_points = 64;
  int directions = 32;
  int radii = 16;
  bool no_oracle = false;
  std::string out;
};

Outcome analyze_ls(const Context&, Invocation& inv, const LsArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  inv.config["phi"] = format_number(a.phi);
  inv.config["arc_points"] = std::to_string(a.arc_points);
  inv.config["directions"] = std::to_string(a.directions);
  inv.config["radii"] = std::to_string(a.radii);
  inv.config["oracle"] = a.no_oracle ? "false" : "true";
  inv.out_path = a.out;

  LsSweepOptions opts;
  opts.arc_points = a.arc_points;
  opts.directions = a.directions;
  opts.radii = a.radii;
  opts.oracle_check = !a.no_oracle;
  const auto v = ls_sweep(p.symbol, p.boundary, a.phi, opts);
  Outcome o;
  o.results = json{{"passes", v.passes},
                   {"failure", v.failure},
                   {"worst_condition", v.worst_condition},
                   {"worst_lambda", complex_json(v.worst_lambda)},
                   {"worst_xi", v.worst_xi},
                   {"sweep_size", v.sweep_size},
                   {"failures", v.failures},
                   {"M_norm_sup", v.M_norm_sup},
                   {"oracle_max_error", v.oracle_max_error}};
  o.verdicts["lopatinskii_shapiro"] = v.passes;
  o.table.columns = {"phi", "sweep_size", "failures", "worst_condition", "M_norm_sup", "oracle_max_error"};
  o.table.rows.push_back({format_number(a.phi), std::to_string(v.sweep_size), std::to_string(v.failures),
                          format_number(v.worst_condition), format_number(v.M_norm_sup),
                          format_number(v.oracle_max_error)});
  return o;
}

struct SolveEllipticArgs {
  std::string problem;
  std::string grid = "256x256";
  std::string lambda = "1+0i";
  double length = 2.0 * kPi;
  double extent = 40.0;
  std::string out;
};

Outcome solve_elliptic(const Context& ctx, Invocation& inv, const SolveEllipticArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  const Complex lambda = parse_complex(a.lambda);
  const int n = p.symbol.tangential_dim();
  const auto [points, normal] = grid_shape(a.grid, n);
  inv.config["grid"] = a.grid;
  inv.config["lambda"] = complex_text(lambda);
  inv.config["length"] = format_number(a.length);
  inv.config["extent"] = format_number(a.extent);
  inv.out_path = a.out;
  inv.out_is_data = true;

  const Grid grid{TangentialGrid(points, std::vector<double>(n, a.length)), NormalGrid::graded(a.extent, normal)};
  HalfSpaceProblem hp{p.symbol, p.boundary, lambda, grid, Field{}, synthetic_slot_data(p.boundary, grid.tangential, ctx.seed)};
  const auto sol = solve_halfspace(hp);
  if (!a.out.empty()) save_field_array(a.out, to_field_array(sol.u));

  const auto& d = sol.diagnostics;
  Outcome o;
  auto dims = to_field_array(sol.u).dims;
  o.results = json{{"lambda", complex_json(lambda)},
                   {"dims", dims},
                   {"boundary_residual", d.boundary_residual},
                   {"pde_residual", d.pde_residual},
                   {"leakage", d.leakage},
                   {"frequencies", d.frequencies},
                   {"skipped", d.skipped},
                   {"fallback", d.fallback},
                   {"sup_norm", max_abs(sol.u)},
                   {"l2_norm", lp_norm(sol.u, 2.0)}};
  o.verdicts["boundary_rows"] = d.boundary_residual <= tol::kBoundary;
  o.verdicts["subspace_leakage"] = d.leakage <= 1e-8;
  o.table.columns = {"iy", "y", "sup_abs_u"};
  for (int iy = 0; iy < grid.normal.size(); iy += std::max(1, grid.normal.size() / 16)) {
    double sup = 0.0;
    for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
      for (int c = 0; c < sol.u.components; ++c) sup = std::max(sup, std::abs(sol.u.at(t, iy, c)));
    }
    o.table.rows.push_back({std::to_string(iy), format_number(grid.normal.y[iy]), format_number(sup)});
  }
  return o;
}

struct SolveParabolicArgs {
  std::string problem;
  double T = 1.0;
  double dt = 1e-3;
  std::string grid = "32x128";
  double length = 2.0 * kPi;
  double extent = 16.0;
  int output_every = 0;
  std::string out;
};

Outcome solve_parabolic_command(const Context& ctx, Invocation& inv, const SolveParabolicArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  const int n = p.symbol.tangential_dim();
  const auto [points, normal] = grid_shape(a.grid, n);
  if (!(a.T > 0.0) || !(a.dt > 0.0)) throw Error(ErrorKind::Domain, "--T and --dt must be positive");
  const int steps = std::max(1, static_cast<int>(std::lround(a.T / a.dt)));
  const int every = a.output_every > 0 ? a.output_every : std::max(1, steps / 10);
  inv.config["T"] = format_number(a.T);
  inv.config["dt"] = format_number(a.dt);
  inv.config["grid"] = a.grid;
  inv.config["length"] = format_number(a.length);
  inv.config["extent"] = format_number(a.extent);
  inv.config["output_every"] = std::to_string(every);
  inv.out_path = a.out;
  inv.out_is_data = true;

  ParabolicProblem pp{p.symbol, p.boundary,
                      Grid{TangentialGrid(points, std::vector<double>(n, a.length)), NormalGrid::graded(a.extent, normal)},
                      a.T, {}, {}, {}};
  // Zero initial state and boundary data switched on smoothly, (1 - e^{-t}) g(x'): compatible at t = 0.
  const auto shape = synthetic_slot_data(p.boundary, pp.grid.tangential, ctx.seed);
  pp.g = [shape](double t) {
    auto g = shape;
    const double factor = -std::expm1(-t);
    for (auto& field : g) {
      for (auto& z : field.data) z *= factor;
    }
    return g;
  };
  ParabolicOptions opts;
  opts.steps = steps;
  opts.output_every = every;
  const auto sol = solve_parabolic(pp, opts);
  if (!a.out.empty()) save_field_array(a.out, to_field_array(sol.snapshots));

  Outcome o;
  o.results = json{{"steps", sol.diagnostics.steps},
                   {"dt", a.T / steps},
                   {"times", sol.times},
                   {"dims", to_field_array(sol.snapshots).dims},
                   {"boundary_residual", sol.diagnostics.boundary_residual},
                   {"stage_residual", sol.diagnostics.stage_residual},
                   {"frequencies", sol.diagnostics.frequencies},
                   {"data_slots", slot_reports(sol.data)},
                   {"data_validated", sol.data.validated}};
  o.verdicts["data_compatible"] = sol.data.compatible();
  o.verdicts["boundary_rows"] = sol.diagnostics.boundary_residual <= tol::kBoundary;
  o.table.columns = {"t", "sup_abs_u", "l2_norm"};
  for (std::size_t s = 0; s < sol.snapshots.size(); ++s) {
    o.table.rows.push_back({format_number(sol.times[s]), format_number(max_abs(sol.snapshots[s])),
                            format_number(lp_norm(sol.snapshots[s], 2.0))});
  }
  return o;
}

struct KernelArgs {
  std::string problem;
  std::string lambda_grid = "default";
  int points = 256;
  int normal_points = 64;
  std::string out;
};

std::vector<Complex> lambda_grid(const std::string& spec) {
  std::vector<Complex> lambdas;
  if (spec == "default") {
    for (double theta : {0.0, kPi / 3, -kPi / 3}) {
      for (double r : {1.0, 4.0, 16.0}) lambdas.push_back(std::polar(r, theta));
    }
    return lambdas;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) lambdas.push_back(parse_complex(item));
  if (lambdas.empty()) throw Error(ErrorKind::Parse, "empty lambda grid");
  return lambdas;
}

Outcome verify_kernels(const Context&, Invocation& inv, const KernelArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  const auto lambdas = lambda_grid(a.lambda_grid);
  inv.config["lambda_grid"] = a.lambda_grid;
  inv.config["points"] = std::to_string(a.points);
  inv.config["normal_points"] = std::to_string(a.normal_points);
  inv.out_path = a.out;

  const int n = p.symbol.tangential_dim();
  const int m = p.symbol.half_order();
  Outcome o;
  o.table.columns = {"lambda_re", "lambda_im", "feasible", "M", "c", "coverage", "exponent"};
  std::vector<double> cs;
  bool feasible = true;
  json fits = json::array();
  for (Complex lambda : lambdas) {
    const auto K = compute_kernel_field(p.symbol, p.boundary, lambda, kernel_grid(n, m, lambda, a.points, a.normal_points));
    const auto fit = verify_kernel_decay(K);
    feasible = feasible && fit.feasible;
    if (fit.feasible) cs.push_back(fit.c);
    fits.push_back(json{{"lambda", complex_json(lambda)},
                        {"feasible", fit.feasible},
                        {"M", fit.M},
                        {"c", fit.c},
                        {"coverage", fit.coverage},
                        {"exponent", fit.exponent},
                        {"note", fit.note}});
    o.table.rows.push_back({format_number(lambda.real()), format_number(lambda.imag()), fit.feasible ? "1" : "0",
                            format_number(fit.M), format_number(fit.c), format_number(fit.coverage),
                            format_number(fit.exponent)});
  }
  double mean = 0.0;
  for (double c : cs) mean += c / static_cast<double>(cs.size());
  double deviation = 0.0;
  for (double c : cs) deviation = std::max(deviation, std::abs(c - mean) / mean);
  o.results = json{{"fits", fits}, {"c_mean", mean}, {"c_max_relative_deviation", deviation}};
  o.verdicts["decay_fit_feasible"] = feasible;
  o.verdicts["c_stable"] = feasible && deviation <= 0.2;
  return o;
}

struct RboundArgs {
  std::string suite;
  std::string out;
};

Outcome verify_rbounds(const Context& ctx, Invocation& inv, const RboundArgs& a) {
  inv.config["suite"] = a.suite;
  inv.out_path = a.out;
  return run_rbound_suite(a.suite, ctx.seed);
}

struct MrArgs {
  std::string problem;
  int trials = 4;
  int levels = 5;
  int normal_points = 128;
  int tangential_points = 16;
  double T = 1.0;
  bool negative_control = false;
  std::string out;
};

Outcome verify_mr(const Context& ctx, Invocation& inv, const MrArgs& a) {
  const Problem p = take_problem(inv, a.problem);
  inv.config["trials"] = std::to_string(a.trials);
  inv.config["levels"] = std::to_string(a.levels);
  inv.config["normal_points"] = std::to_string(a.normal_points);
  inv.config["tangential_points"] = std::to_string(a.tangential_points);
  inv.config["T"] = format_number(a.T);
  inv.config["negative_control"] = a.negative_control ? "true" : "false";
  inv.out_path = a.out;
  if (a.levels < 2) throw Error(ErrorKind::Domain, "--levels must be at least 2");

  MrHarnessOptions opts;
  opts.trials = a.trials;
  opts.seed = ctx.seed;
  opts.T = a.T;
  opts.tangential_points = a.tangential_points;
  opts.violate_compatibility = a.negative_control;
  opts.resolutions.clear();
  for (int l = 0, steps = 16; l < a.levels; ++l, steps *= 4) opts.resolutions.push_back({steps, a.normal_points});
  const auto rep = mr_ratio_harness(p.symbol, p.boundary, opts);

  Outcome o;
  o.results = json{{"max_ratio", rep.max_ratio},
                   {"growth", rep.growth},
                   {"stable", rep.stable},
                   {"blowup", rep.blowup},
                   {"skipped", rep.skipped}};
  if (a.negative_control) {
    o.verdicts["control_blows_up"] = rep.blowup >= 3.0;
  } else {
    o.verdicts["ratio_bounded"] = rep.stable;
  }
  o.table.columns = {"steps", "normal_points", "trial", "lhs", "rhs", "ratio"};
  for (const auto& s : rep.samples) {
    const auto& r = opts.resolutions[s.resolution];
    o.table.rows.push_back({std::to_string(r.steps), std::to_string(r.normal_points), std::to_string(s.trial),
                            format_number(s.lhs), format_number(s.rhs), format_number(s.ratio)});
  }
  return o;
}

// --- R-bound suites -----------------------------------------------------------

CMatrix random_unitary(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> nd;
  CMatrix A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = Complex(nd(rng), nd(rng));
  Eigen::HouseholderQR<CMatrix> qr(A);
  return qr.householderQ() * CMatrix::Identity(d, d);
}

Outcome suite_definition(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<CMatrix> diag;
  for (int f = 0; f < 12; ++f) {
    CMatrix D = CMatrix::Zero(5, 5);
    for (int i = 0; i < 5; ++i) D(i, i) = Complex(nd(rng), nd(rng));
    diag.push_back(D);
  }
  OperatorFamily fam{diag, std::vector<Complex>(diag.size(), 0.0)};
  RBoundOptions opts;
  opts.seed = seed;
  const auto est = estimate_rbound(fam, opts);
  // On a Hilbert space the R-bound equals the uniform bound: max |d_ii| for diagonal members.
  double sup = 0.0;
  for (const auto& D : diag) sup = std::max(sup, D.cwiseAbs().maxCoeff());
  Outcome o;
  o.results = json{{"estimate", est.estimate}, {"sup_norm", est.sup_norm}, {"analytic_sup", sup},
                   {"trials", est.trials}, {"confidence_spread", est.confidence_spread}};
  o.verdicts["hilbert_estimate_within_5pct"] = std::abs(est.estimate - sup) <= 0.05 * sup;
  o.table.columns = {"estimate", "sup_norm", "analytic_sup"};
  o.table.rows.push_back({format_number(est.estimate), format_number(est.sup_norm), format_number(sup)});
  return o;
}

Outcome suite_neumann(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CMatrix> members;
  for (int f = 0; f < 16; ++f) members.push_back(0.5 * random_unitary(rng, 6));
  OperatorFamily fam{members, std::vector<Complex>(members.size(), 0.0)};
  RBoundOptions opts;
  opts.seed = seed;
  const auto c = neumann_rbound_check(fam, opts, 0.05, 0.5);
  Outcome o;
  o.results = json{{"rho", c.rho}, {"bound", c.bound}, {"resolvent_estimate", c.resolvent_estimate}};
  o.verdicts["neumann_bound"] = c.passes && c.resolvent_estimate <= 1.05 / (1.0 - 0.5);
  o.table.columns = {"rho", "resolvent_estimate", "bound"};
  o.table.rows.push_back({format_number(c.rho), format_number(c.resolvent_estimate), format_number(c.bound)});
  return o;
}

Outcome suite_sector(std::uint64_t seed) {
  RBoundOptions opts;
  opts.seed = seed;
  auto T = [](Complex l) { return CMatrix(CMatrix::Identity(3, 3) / (1.0 + l)); };
  const auto c = sector_derivative_check(T, kPi / 4, kPi / 2, opts);
  Outcome o;
  o.results = json{{"C", c.C},
                   {"derivative_estimate", c.derivative_estimate},
                   {"bound", c.bound},
                   {"fd_disagreement", c.fd_disagreement},
                   {"fd_stable", c.fd_stable}};
  o.verdicts["sector_derivative_bound"] = c.passes;
  o.table.columns = {"C", "derivative_estimate", "bound"};
  o.table.rows.push_back({format_number(c.C), format_number(c.derivative_estimate), format_number(c.bound)});
  return o;
}

Outcome suite_mikhlin(std::uint64_t) {
  MikhlinGrid g;
  g.points_per_sign = 13;
  std::vector<double> mus;
  for (int i = 0; i <= 6; ++i) mus.push_back(std::pow(10.0, -3.0 + i));
  const auto rep = resolvent_symbol_uniformity(1, 1.0, 2, 32, mus, g, 2.0);
  Outcome o;
  o.results = json{{"alphas", rep.alphas}, {"spread", rep.spread}, {"max_spread", rep.max_spread}, {"sups", rep.sups}};
  o.verdicts["symbols_uniform"] = rep.passes;
  o.table.columns = {"alpha", "k", "sup"};
  for (std::size_t a = 0; a < rep.alphas.size(); ++a) {
    std::string alpha;
    for (int v : rep.alphas[a]) alpha += std::to_string(v);
    for (std::size_t k = 0; k < rep.sups[a].size(); ++k) {
      o.table.rows.push_back({alpha, std::to_string(k + 1), format_number(rep.sups[a][k])});
    }
  }
  return o;
}

Outcome suite_combinatorial(std::uint64_t seed) {
  const auto rep = combinatorial_inequality_test(10000, seed);
  Outcome o;
  o.results = json{{"samples", rep.samples}, {"violations", rep.violations}, {"worst_log_margin", rep.worst_log_margin}};
  o.verdicts["no_violations"] = rep.violations == 0 && rep.samples == 10000;
  o.table.columns = {"samples", "violations", "worst_log_margin"};
  o.table.rows.push_back({std::to_string(rep.samples), std::to_string(rep.violations),
                          format_number(rep.worst_log_margin)});
  return o;
}

bool is_verification_failure(ErrorKind kind) { return exit_code_for(kind) == kExitFail; }

}  // namespace

// --- public helpers -------------------------------------------------------------

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Sector:
    case ErrorKind::LsFailure:
    case ErrorKind::Singular:
    case ErrorKind::SpectralGap:
    case ErrorKind::Numerical:
    case ErrorKind::Consistency:
      return kExitFail;
    default:
      return kExitUsage;
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Problem resolve_problem(const json& doc) {
  if (doc.is_object() && doc.contains("fixture") && !doc.contains("m")) {
    const json& name = doc.at("fixture");
    if (!name.is_string()) throw Error(ErrorKind::Parse, "problem: \"fixture\" must be a string");
    Problem p = make_fixture(name.get<std::string>());
    for (const auto& [key, value] : doc.items()) {
      if (key == "name" && value.is_string()) {
        p.name = value.get<std::string>();
      } else if (key != "fixture") {
        p.extra[key] = value;
      }
    }
    return p;
  }
  try {
    return problem_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("invalid problem document: ") + e.what());
  }
}

Problem load_problem_file(const std::string& path) {
  const std::string text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorKind::Parse, path + ": malformed JSON at line " + std::to_string(line) + ", column " +
                                      std::to_string(col));
  }
  return resolve_problem(doc);
}

Complex parse_complex(const std::string& text) {
  const char* begin = text.c_str();
  const char* end = begin + text.size();
  auto fail = [&]() -> Complex { throw Error(ErrorKind::Parse, "cannot parse complex number \"" + text + "\""); };
  char* stop = nullptr;
  const double first = std::strtod(begin, &stop);
  if (stop == begin) return fail();
  if (stop == end) return {first, 0.0};
  if (*stop == 'i' && stop + 1 == end) return {0.0, first};
  if (*stop != '+' && *stop != '-') return fail();
  const char* second_begin = stop;
  const double second = std::strtod(second_begin, &stop);
  if (stop == second_begin || *stop != 'i' || stop + 1 != end) return fail();
  return {first, second};
}

std::vector<int> parse_grid(const std::string& text) {
  std::vector<int> sizes;
  if (text.empty() || text.back() == 'x') throw Error(ErrorKind::Parse, "cannot parse grid \"" + text + "\"");
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) {
      throw Error(ErrorKind::Parse, "cannot parse grid \"" + text + "\"");
    }
    sizes.push_back(v);
  }
  if (sizes.empty()) throw Error(ErrorKind::Parse, "cannot parse grid \"" + text + "\"");
  return sizes;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string Table::csv() const {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return s;
}

bool Outcome::passed() const {
  for (const auto& [name, v] : verdicts.items()) {
    if (!v.is_boolean() || !v.get<bool>()) return false;
  }
  return true;
}

std::vector<std::string> rbound_suite_names() { return {"definition", "neumann", "sector", "mikhlin", "combinatorial"}; }

Outcome run_rbound_suite(const std::string& suite, std::uint64_t seed) {
  if (suite == "definition") return suite_definition(seed);
  if (suite == "neumann") return suite_neumann(seed);
  if (suite == "sector") return suite_sector(seed);
  if (suite == "mikhlin") return suite_mikhlin(seed);
  if (suite == "combinatorial") return suite_combinatorial(seed);
  throw Error(ErrorKind::Domain, "unknown R-bound suite \"" + suite + "\"");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbol analysis, half-space solvers and estimate verification for mixed-order boundary problems",
               "lopashka"};
  app.require_subcommand(1);
  Context ctx;
  app.add_option("--seed", ctx.seed, "seed of every random draw")->capture_default_str();
  app.add_flag("--no-timestamps", [&](std::int64_t) { ctx.timestamps = false; }, "omit wall-clock data from reports");
  app.add_option("--threads", ctx.threads, "worker threads (overrides LOPASHKA_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--report", ctx.report_path, "write the JSON report to this path");

  auto group = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->require_subcommand(1);
    sub->fallthrough();
    return sub;
  };
  auto leaf = [](CLI::App* parent, const std::string& name, const std::string& help) {
    auto* sub = parent->add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  };

  auto* analyze = group("analyze", "symbol analysis");
  auto* solve = group("solve", "half-space solvers");
  auto* verify = group("verify", "estimate verification");
  auto* fixtures = group("fixtures", "built-in problems");

  EllipticityArgs ell;
  auto* c_ell = leaf(analyze, "ellipticity", "angle of parameter-ellipticity");
  c_ell->add_option("--problem", ell.problem, "problem JSON")->required();
  c_ell->add_option("--samples", ell.samples, "sphere samples")->capture_default_str();
  c_ell->add_option("--out", ell.out, "report path (.csv: table only)");

  LsArgs ls;
  auto* c_ls = leaf(analyze, "ls", "Lopatinskii-Shapiro sweep");
  c_ls->add_option("--problem", ls.problem, "problem JSON")->required();
  c_ls->add_option("--phi", ls.phi, "sector angle in (0, pi]")->capture_default_str();
  c_ls->add_option("--arc-points", ls.arc_points)->capture_default_str()->check(CLI::PositiveNumber);
  c_ls->add_option("--directions", ls.directions)->capture_default_str()->check(CLI::PositiveNumber);
  c_ls->add_option("--radii", ls.radii)->capture_default_str()->check(CLI::PositiveNumber);
  c_ls->add_flag("--no-oracle", ls.no_oracle, "skip the ODE cross-check");
  c_ls->add_option("--out", ls.out, "report path (.csv: table only)");

  SolveEllipticArgs se;
  auto* c_se = leaf(solve, "elliptic", "resolvent problem with synthetic boundary data");
  c_se->add_option("--problem", se.problem, "problem JSON")->required();
  c_se->add_option("--grid", se.grid, "tangential x normal points")->capture_default_str();
  c_se->add_option("--lambda", se.lambda, "spectral parameter, e.g. 1+0i")->capture_default_str();
  c_se->add_option("--length", se.length, "torus period")->capture_default_str();
  c_se->add_option("--extent", se.extent, "normal extent")->capture_default_str();
  c_se->add_option("--out", se.out, "binary field output");

  SolveParabolicArgs sp;
  auto* c_sp = leaf(solve, "parabolic", "initial-boundary problem with synthetic boundary data");
  c_sp->add_option("--problem", sp.problem, "problem JSON")->required();
  c_sp->add_option("--T", sp.T, "final time")->capture_default_str();
  c_sp->add_option("--dt", sp.dt, "time step")->capture_default_str();
  c_sp->add_option("--grid", sp.grid, "tangential x normal points")->capture_default_str();
  c_sp->add_option("--length", sp.length, "torus period")->capture_default_str();
  c_sp->add_option("--extent", sp.extent, "normal extent")->capture_default_str();
  c_sp->add_option("--output-every", sp.output_every, "snapshot interval in steps (0: steps / 10)");
  c_sp->add_option("--out", sp.out, "binary space-time output");

  KernelArgs kv;
  auto* c_kv = leaf(verify, "kernels", "kernel decay fits");
  c_kv->add_option("--problem", kv.problem, "problem JSON")->required();
  c_kv->add_option("--lambda-grid", kv.lambda_grid, "default or a comma-separated list")->capture_default_str();
  c_kv->add_option("--points", kv.points, "tangential points")->capture_default_str();
  c_kv->add_option("--normal-points", kv.normal_points)->capture_default_str();
  c_kv->add_option("--out", kv.out, "report path (.csv: table only)");

  RboundArgs rb;
  auto* c_rb = leaf(verify, "rbounds", "R-bound suites");
  c_rb->add_option("--suite", rb.suite)->required()->check(CLI::IsMember(rbound_suite_names()));
  c_rb->add_option("--out", rb.out, "report path (.csv: table only)");

  MrArgs mr;
  auto* c_mr = leaf(verify, "mr", "maximal-regularity ratios under refinement");
  c_mr->add_option("--problem", mr.problem, "problem JSON")->required();
  c_mr->add_option("--trials", mr.trials)->capture_default_str()->check(CLI::PositiveNumber);
  c_mr->add_option("--levels", mr.levels, "refinement levels (steps 16 * 4^l)")->capture_default_str();
  c_mr->add_option("--normal-points", mr.normal_points)->capture_default_str();
  c_mr->add_option("--tangential-points", mr.tangential_points)->capture_default_str();
  c_mr->add_option("--T", mr.T)->capture_default_str();
  c_mr->add_flag("--negative-control", mr.negative_control, "boundary data violating compatibility");
  c_mr->add_option("--out", mr.out, "report path (.csv: table only)");

  auto* c_list = leaf(fixtures, "list", "fixture names");
  std::string emit_name;
  std::string emit_out;
  auto* c_emit = leaf(fixtures, "emit", "write a fixture problem document");
  c_emit->add_option("name", emit_name)->required();
  c_emit->add_option("--out", emit_out, "output path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
  }

  struct ThreadGuard {
    explicit ThreadGuard(int t) {
      if (t > 0) set_thread_count(t);
    }
    ~ThreadGuard() { set_thread_count(0); }
  } guard(ctx.threads);

  Invocation inv;
  inv.config["seed"] = std::to_string(ctx.seed);
  const auto start = std::chrono::steady_clock::now();
  auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    if (c_list->parsed()) {
      for (const auto& name : fixture_names()) out << name << "\n";
      return kExitPass;
    }
    if (c_emit->parsed()) {
      const std::string text = problem_to_json(make_fixture(emit_name)).dump(2) + "\n";
      if (emit_out.empty()) {
        out << text;
      } else {
        write_text(emit_out, text);
      }
      return kExitPass;
    }
    Outcome outcome;
    if (c_ell->parsed()) {
      inv.command = "analyze ellipticity";
      outcome = analyze_ellipticity(ctx, inv, ell);
    } else if (c_ls->parsed()) {
      inv.command = "analyze ls";
      outcome = analyze_ls(ctx, inv, ls);
    } else if (c_se->parsed()) {
      inv.command = "solve elliptic";
      outcome = solve_elliptic(ctx, inv, se);
    } else if (c_sp->parsed()) {
      inv.command = "solve parabolic";
      outcome = solve_parabolic_command(ctx, inv, sp);
    } else if (c_kv->parsed()) {
      inv.command = "verify kernels";
      outcome = verify_kernels(ctx, inv, kv);
    } else if (c_rb->parsed()) {
      inv.command = "verify rbounds";
      outcome = verify_rbounds(ctx, inv, rb);
    } else if (c_mr->parsed()) {
      inv.command = "verify mr";
      outcome = verify_mr(ctx, inv, mr);
    } else {
      err << app.help();
      return kExitUsage;
    }
    emit_report(ctx, inv, outcome, seconds(), "", out);
    return outcome.passed() ? kExitPass : kExitFail;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (is_verification_failure(e.kind()) && !inv.command.empty()) {
      try {
        emit_report(ctx, inv, Outcome{}, seconds(), e.what(), out);
      } catch (const Error& io) {
        err << "error: " << io.what() << "\n";
      }
    }
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace lopashka::cli
