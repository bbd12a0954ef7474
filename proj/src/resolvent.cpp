#include <algorithm>
#include <cmath>
#include <random>

#include "lopashka/ellipticity.hpp"
#include "lopashka/error.hpp"
#include "lopashka/halfspace.hpp"

namespace lopashka {

namespace {

// Random smooth data on the unit-scale problem, dilated to the scale s.
struct TrialData {
  Field f;
  std::vector<TraceField> g;
};

TrialData random_data(const BoundaryOperatorSpec& spec, const Grid& grid, double s, double base_length,
                      bool with_f, bool with_g, std::mt19937_64& rng) {
  const int N = spec.components();
  const int n = grid.tangential.dims();
  const int m = spec.order() / 2;
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(1.0, 3.0);
  const int kmax = 3;
  std::vector<std::vector<int>> modes;
  for (int k1 = -kmax; k1 <= kmax; ++k1) {
    if (n == 1) {
      modes.push_back({k1});
    } else {
      for (int k2 = -kmax; k2 <= kmax; ++k2) modes.push_back({k1, k2});
    }
  }
  auto phase = [&](const std::vector<double>& x, const std::vector<int>& k) {
    double a = 0.0;
    for (int d = 0; d < n; ++d) a += 2.0 * kPi * k[d] * x[d] / (base_length * s);
    return std::exp(kI * a);
  };
  TrialData data;
  data.f = Field(grid, N);
  if (with_f) {
    for (const auto& k : modes) {
      const double decay = ud(rng);
      CVector amp0(N), amp1(N);
      for (int c = 0; c < N; ++c) {
        amp0(c) = Complex(nd(rng), nd(rng));
        amp1(c) = Complex(nd(rng), nd(rng));
      }
      for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
        const Complex e = phase(grid.tangential.coordinate(t), k);
        for (int iy = 0; iy < grid.normal.size(); ++iy) {
          const double y = grid.normal.y[iy] / s;
          const double prof = std::exp(-decay * y);
          for (int c = 0; c < N; ++c) data.f.at(t, iy, c) += e * prof * (amp0(c) + y * amp1(c));
        }
      }
    }
  }
  for (const auto& slot : spec.slots()) {
    const CMatrix& P = spec.row(slot.row).components[slot.component].projection.matrix();
    TraceField g(grid.tangential, N);
    if (with_g) {
      const double amplitude = std::pow(s, 2 * m - slot.order);
      for (const auto& k : modes) {
        CVector v(N);
        for (int c = 0; c < N; ++c) v(c) = Complex(nd(rng), nd(rng));
        v = amplitude * (P * v);
        for (std::size_t t = 0; t < grid.tangential.size(); ++t) {
          const Complex e = phase(grid.tangential.coordinate(t), k);
          for (int c = 0; c < N; ++c) g.at(t, c) += e * v(c);
        }
      }
    }
    data.g.push_back(std::move(g));
  }
  return data;
}

}  // namespace

ResolventReport resolvent_estimate_harness(const InteriorSymbol& sym, const BoundaryOperatorSpec& spec,
                                           const ResolventHarnessOptions& options) {
  const int m = sym.half_order();
  const int n = sym.tangential_dim();
  std::vector<MultiIndex> alphas = options.alphas;
  if (alphas.empty()) {
    for (int k = 0; k <= 2 * m; ++k) {
      for (auto& a : multi_indices(n + 1, k)) alphas.push_back(a);
    }
  }
  const auto ell = ellipticity_angle(sym, 64);
  const double base_length = 8.0 * kPi;
  const double base_depth = 30.0;
  ResolventReport report;
  for (double modulus : options.moduli) {
    const double s = std::pow(modulus, -1.0 / (2 * m));
    Grid grid{TangentialGrid::uniform(n, options.tangential_points, base_length * s),
              NormalGrid::graded(base_depth * s, options.normal_points)};
    double modulus_max = 0.0;
    for (double arg : options.arguments) {
      if (std::abs(arg) >= kPi - ell.angle) {
        ++report.skipped;
        continue;
      }
      const Complex lambda = std::polar(modulus, arg);
      for (int trial = 0; trial < options.trials; ++trial) {
        // The same shapes for every lambda: the seed depends on the trial only.
        std::mt19937_64 rng(options.seed * 1000003ULL + 7919ULL * trial + 1);
        const bool with_f = trial % 3 != 1;
        const bool with_g = trial % 3 != 0;
        TrialData data = random_data(spec, grid, s, base_length, with_f, with_g, rng);
        double rhs = lp_norm(data.f, options.p);
        for (std::size_t q = 0; q < spec.slots().size(); ++q) {
          int k = spec.slots()[q].order;
          if (options.swap_weights) k = 2 * m - 1 - k;
          const TraceField w = weight_multiplier(lambda, data.g[q], m, (2.0 * m - k) / (2.0 * m));
          rhs += lp_norm(extension_operator(lambda, w, grid.normal, m), options.p);
        }
        if (!(rhs > 0.0)) {
          ++report.skipped;
          continue;
        }
        HalfSpaceProblem problem{sym, spec, lambda, grid, std::move(data.f), std::move(data.g)};
        HalfSpaceOptions hopts;
        hopts.check_pde_residual = false;
        const SolutionField sol = solve_halfspace(problem, hopts);
        ResolventSample sample{lambda, trial, 0.0, alphas.front()};
        for (const auto& alpha : alphas) {
          const double weight = std::pow(modulus, 1.0 - alpha.order() / (2.0 * m));
          const double lhs = weight * lp_norm(sol.derivative(alpha), options.p);
          if (lhs / rhs > sample.ratio) {
            sample.ratio = lhs / rhs;
            sample.worst_alpha = alpha;
          }
        }
        modulus_max = std::max(modulus_max, sample.ratio);
        report.samples.push_back(sample);
      }
    }
    report.max_ratio_per_modulus.push_back(modulus_max);
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double r : report.max_ratio_per_modulus) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  report.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  report.stable = report.spread <= 1.0 + options.stability;
  return report;
}

}  // namespace lopashka
