#include <algorithm>
#include <cmath>
#include <random>

#include "lopashka/error.hpp"
#include "lopashka/fft.hpp"
#include "lopashka/normal_ode.hpp"
#include "lopashka/parabolic.hpp"

namespace lopashka {

namespace {

// c e^{i k.x'} (1 + y) e^{-decay y} cos(omega t + phase)
struct InteriorTerm {
  std::vector<int> wave;
  CVector c;
  double decay = 1.0;
  double omega = 1.0;
  double phase = 0.0;
};

// c e^{i k.x'} (cos(omega t + phase) - shift), c in ran(P) of its slot.
struct BoundaryTerm {
  int slot = 0;
  std::vector<int> wave;
  CVector c;
  double omega = 1.0;
  double phase = 0.0;
  double shift = 0.0;
};

struct TrialData {
  std::vector<InteriorTerm> interior;
  std::vector<BoundaryTerm> boundary;
};

Complex plane_wave(const TangentialGrid& grid, std::size_t t, const std::vector<int>& wave) {
  const auto x = grid.coordinate(t);
  double phase = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) phase += 2.0 * kPi * wave[d] * x[d] / grid.lengths[d];
  return std::exp(kI * phase);
}

std::vector<Field> interior_profiles(const TrialData& data, const Grid& grid, int N) {
  std::vector<Field> out;
  for (const auto& term : data.interior) {
    Field F(grid, N);
    for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
      const Complex w = plane_wave(grid.tangential, t, term.wave);
      for (int iy = 0; iy < grid.normal.size(); ++iy) {
        const double y = grid.normal.y[iy];
        const Complex a = w * (1.0 + y) * std::exp(-term.decay * y);
        for (int c = 0; c < N; ++c) F.at(t, iy, c) = a * term.c[c];
      }
    }
    out.push_back(std::move(F));
  }
  return out;
}

std::vector<TraceField> boundary_profiles(const TrialData& data, const TangentialGrid& grid, int N) {
  std::vector<TraceField> out;
  for (const auto& term : data.boundary) {
    TraceField G(grid, N);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      const Complex w = plane_wave(grid, t, term.wave);
      for (int c = 0; c < N; ++c) G.at(t, c) = w * term.c[c];
    }
    out.push_back(std::move(G));
  }
  return out;
}

FieldSource interior_source(const TrialData& data, std::vector<Field> profiles) {
  if (data.interior.empty()) return {};
  return [terms = data.interior, profiles = std::move(profiles)](double t) {
    Field f = profiles.front();
    std::fill(f.data.begin(), f.data.end(), Complex(0.0));
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double tau = std::cos(terms[j].omega * t + terms[j].phase);
      for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] += tau * profiles[j].data[i];
    }
    return f;
  };
}

TraceSource boundary_source(const TrialData& data, std::vector<TraceField> profiles, const TangentialGrid& grid,
                            int slots, int N) {
  if (data.boundary.empty()) return {};
  return [terms = data.boundary, profiles = std::move(profiles), grid, slots, N](double t) {
    std::vector<TraceField> g(slots, TraceField(grid, N));
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double tau = std::cos(terms[j].omega * t + terms[j].phase) - terms[j].shift;
      auto& target = g[terms[j].slot].data;
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += tau * profiles[j].data[i];
    }
    return g;
  };
}

CVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(normal(rng), normal(rng));
  return v;
}

std::vector<int> random_wave(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> pick(-2, 2);
  std::vector<int> w(n);
  for (auto& k : w) k = pick(rng);
  return w;
}

TrialData make_trial(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, int trial,
                     const MrHarnessOptions& options) {
  std::mt19937_64 rng(options.seed * 1000003ULL + static_cast<unsigned long long>(trial));
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int n = sym.tangential_dim();
  const int N = sym.components();
  const int m = sym.half_order();
  TrialData data;
  // 0: interior only, 1: boundary only, 2: both; the negative control carries boundary data only.
  const int kind = options.violate_compatibility ? 1 : trial % 3;
  if (kind != 1) {
    for (int j = 0; j < 2; ++j) {
      InteriorTerm term;
      term.wave = random_wave(rng, n);
      term.c = random_vector(rng, N);
      term.decay = 0.5 + 1.5 * uni(rng);
      term.omega = 1.0 + 2.0 * uni(rng);
      term.phase = 2.0 * kPi * uni(rng);
      data.interior.push_back(std::move(term));
    }
  }
  if (kind != 0) {
    const auto& slots = spec.slots();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const CMatrix W = spec.row(slots[s].row).components[slots[s].component].projection.range_basis();
      const bool needs_compat = kappa_exponent(m, slots[s].order, 2.0) > 0.5;
      BoundaryTerm term;
      term.slot = static_cast<int>(s);
      term.wave = random_wave(rng, n);
      term.c = W * random_vector(rng, slots[s].rank);
      term.omega = 1.0 + 2.0 * uni(rng);
      term.phase = 2.0 * kPi * uni(rng);
      if (options.violate_compatibility) {
        // Only the slots that need compatibility: a tangentially uniform datum
        // switched on at t = 0 against u0 = 0.
        if (!needs_compat) continue;
        term.wave.assign(n, 0);
        term.omega = 0.0;
        term.phase = 0.0;
      } else if (needs_compat) {
        term.shift = std::cos(term.phase);
      }
      data.boundary.push_back(std::move(term));
    }
  }
  return data;
}

// ||f||_{L2} + sum over slots of ||g||_{L2(J; H^{2m kappa})} + [g]_{kappa, time}, on a fine reference sampling.
double data_norm(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec, const TrialData& data,
                 const TangentialGrid& tangential, const MrHarnessOptions& options) {
  const int N = sym.components();
  const int m = sym.half_order();
  const int S = options.data_time_samples;
  const double dt = options.T / S;
  const double vol = tangential.cell_volume();
  double total = 0.0;
  if (!data.interior.empty()) {
    const Grid ref{tangential, NormalGrid::graded(options.normal_extent, 512)};
    const auto w = interpolant_weights(ref.normal);
    const auto source = interior_source(data, interior_profiles(data, ref, N));
    double sq = 0.0;
    for (int i = 0; i < S; ++i) {
      const Field f = source((i + 0.5) * dt);
      for (std::size_t t = 0; t < tangential.size(); ++t) {
        for (int iy = 0; iy < ref.normal.size(); ++iy) {
          for (int c = 0; c < N; ++c) sq += dt * vol * w[iy] * std::norm(f.at(t, iy, c));
        }
      }
    }
    total += std::sqrt(sq);
  }
  if (!data.boundary.empty()) {
    const auto& slots = spec.slots();
    const auto source =
        boundary_source(data, boundary_profiles(data, tangential, N), tangential, static_cast<int>(slots.size()), N);
    std::vector<std::vector<TraceField>> samples;
    for (int i = 0; i < S; ++i) samples.push_back(source((i + 0.5) * dt));
    const std::size_t M = tangential.size();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const double kappa = kappa_exponent(m, slots[s].order, 2.0);
      double space_sq = 0.0;
      std::vector<std::vector<Complex>> values;
      for (const auto& sample : samples) {
        std::vector<Complex> hat = sample[s].data;
        fft_many(hat, tangential.points, N, false);
        for (std::size_t t = 0; t < M; ++t) {
          double xi2 = 0.0;
          for (double x : tangential.wavenumber(t)) xi2 += x * x;
          const double weight = std::pow(1.0 + xi2, 2.0 * m * kappa / 2.0);
          for (int c = 0; c < N; ++c) space_sq += dt * vol / M * std::norm(weight * hat[t * N + c]);
        }
        values.push_back(sample[s].data);
      }
      total += std::sqrt(space_sq) + time_seminorm(values, dt, vol, kappa);
    }
  }
  return total;
}

// ||d_t u|| + sum_{|alpha| = 2m} ||D^alpha u|| in L2 over (0, T) x half-space.
double solution_norm(const ParabolicProblem& problem, int steps) {
  ParabolicStepper stepper(problem, steps);
  const auto& grid = problem.grid;
  const int n = grid.tangential.dims();
  const int N = problem.sym.components();
  const int m = problem.sym.half_order();
  const int ny = grid.normal.size();
  const std::size_t Mt = grid.tangential.size();
  const auto w = interpolant_weights(grid.normal);
  const double scale = grid.tangential.cell_volume() / Mt;
  const auto alphas = multi_indices(n + 1, 2 * m);
  std::vector<std::vector<double>> xi(Mt);
  for (std::size_t t = 0; t < Mt; ++t) xi[t] = grid.tangential.wavenumber(t);
  std::vector<double> alpha_sq(alphas.size(), 0.0);
  double dtu_sq = 0.0;
  const double dt = stepper.dt();

  auto accumulate = [&](double weight) {
    std::vector<std::vector<Complex>> jets(2 * m + 1);
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const int k = alphas[a][n];
      if (jets[k].empty()) jets[k] = stepper.spectral_normal_derivative(k);
      double sq = 0.0;
      for (std::size_t t = 0; t < Mt; ++t) {
        double factor = 1.0;
        for (int d = 0; d < n; ++d) factor *= std::pow(xi[t][d], alphas[a][d]);
        if (factor == 0.0) continue;
        for (int iy = 0; iy < ny; ++iy) {
          for (int c = 0; c < N; ++c) sq += w[iy] * std::norm(factor * jets[k][(t * ny + iy) * N + c]);
        }
      }
      alpha_sq[a] += weight * scale * sq;
    }
  };

  accumulate(0.5 * dt);
  while (stepper.step() < stepper.steps()) {
    const std::vector<Complex> before = stepper.spectral();
    stepper.advance();
    const auto& after = stepper.spectral();
    double sq = 0.0;
    for (std::size_t t = 0; t < Mt; ++t) {
      for (int iy = 0; iy < ny; ++iy) {
        for (int c = 0; c < N; ++c) {
          const std::size_t i = (t * ny + iy) * N + c;
          sq += w[iy] * std::norm((after[i] - before[i]) / dt);
        }
      }
    }
    dtu_sq += dt * scale * sq;
    accumulate(stepper.step() == stepper.steps() ? 0.5 * dt : dt);
  }
  double total = std::sqrt(dtu_sq);
  for (double v : alpha_sq) total += std::sqrt(v);
  return total;
}

}  // namespace

MrReport mr_ratio_harness(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec,
                          const MrHarnessOptions& options) {
  if (options.resolutions.empty()) throw Error(ErrorKind::Domain, "mr harness: no resolutions");
  if (options.trials < 1) throw Error(ErrorKind::Domain, "mr harness: need at least one trial");
  const int n = sym.tangential_dim();
  const int N = sym.components();
  const TangentialGrid tangential = TangentialGrid::uniform(n, options.tangential_points, options.tangential_length);
  MrReport report;
  report.max_ratio.assign(options.resolutions.size(), 0.0);
  for (int trial = 0; trial < options.trials; ++trial) {
    const TrialData data = make_trial(sym, spec, trial, options);
    const double rhs = data_norm(sym, spec, data, tangential, options);
    if (!(rhs > 0.0)) {
      ++report.skipped;
      continue;
    }
    for (std::size_t r = 0; r < options.resolutions.size(); ++r) {
      const auto& res = options.resolutions[r];
      const Grid grid{tangential, NormalGrid::graded(options.normal_extent, res.normal_points)};
      ParabolicProblem problem{sym, spec, grid, options.T, {}, {}, Field{}};
      problem.f = interior_source(data, interior_profiles(data, grid, N));
      problem.g = boundary_source(data, boundary_profiles(data, tangential, N), tangential,
                                  static_cast<int>(spec.slots().size()), N);
      MrSample sample;
      sample.resolution = static_cast<int>(r);
      sample.trial = trial;
      sample.lhs = solution_norm(problem, res.steps);
      sample.rhs = rhs;
      sample.ratio = sample.lhs / rhs;
      report.max_ratio[r] = std::max(report.max_ratio[r], sample.ratio);
      report.samples.push_back(sample);
    }
  }
  report.stable = true;
  for (std::size_t r = 0; r + 1 < report.max_ratio.size(); ++r) {
    const double g = report.max_ratio[r] > 0.0 ? report.max_ratio[r + 1] / report.max_ratio[r] - 1.0 : 0.0;
    report.growth.push_back(g);
    if (!(g < options.growth_limit)) report.stable = false;
  }
  report.blowup = report.max_ratio.front() > 0.0 ? report.max_ratio.back() / report.max_ratio.front() : 0.0;
  return report;
}

}  // namespace lopashka
