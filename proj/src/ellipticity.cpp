#include "lopashka/ellipticity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lopashka/error.hpp"
#include "lopashka/linalg.hpp"
#include "lopashka/parallel.hpp"
#include "lopashka/tolerances.hpp"

namespace lopashka {

namespace {

struct SampleResult {
  double angle = 0.0;
  bool hit = false;
};

SampleResult analyze_point(const InteriorSymbol& sym, std::span<const Complex> xi) {
  const CMatrix A = sym.eval(xi);
  Eigen::ComplexEigenSolver<CMatrix> es(A, false);
  if (es.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver failed at xi = (";
    for (std::size_t i = 0; i < xi.size(); ++i) os << (i ? ", " : "") << xi[i];
    os << ")";
    throw Error(ErrorKind::Numerical, os.str());
  }
  const double scale = std::max(A.norm(), 1e-300);
  SampleResult r;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const Complex mu = es.eigenvalues()(i);
    const double arg = std::abs(std::arg(mu));
    if (std::abs(mu) <= tol::kArg * scale || kPi - arg <= tol::kArg) r.hit = true;
    r.angle = std::max(r.angle, arg);
  }
  return r;
}

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<std::vector<double>> sphere_points(int dim, int count) {
  std::vector<std::vector<double>> pts;
  if (dim < 1 || count < 1) throw Error(ErrorKind::Domain, "sphere_points: bad arguments");
  if (dim == 1) {
    pts.push_back({1.0});
    pts.push_back({-1.0});
    return pts;
  }
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * kPi * i / count;
      pts.push_back({std::cos(t), std::sin(t)});
    }
    return pts;
  }
  if (dim == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double t = golden * i;
      pts.push_back({r * std::cos(t), r * std::sin(t), z});
    }
    return pts;
  }
  // Hyperspherical coordinates with a uniform tensor grid of angles.
  const int angles = dim - 1;
  const int per = std::max(2, static_cast<int>(std::ceil(std::pow(count, 1.0 / angles))));
  std::vector<int> idx(angles, 0);
  while (true) {
    std::vector<double> x(dim, 1.0);
    for (int a = 0; a < angles; ++a) {
      const bool last = (a == angles - 1);
      const double t = last ? 2.0 * kPi * idx[a] / per : kPi * (idx[a] + 0.5) / per;
      for (int d = a + 1; d < dim; ++d) x[d] *= std::sin(t);
      x[a] *= std::cos(t);
    }
    pts.push_back(x);
    int a = 0;
    while (a < angles && ++idx[a] == per) idx[a++] = 0;
    if (a == angles) break;
  }
  return pts;
}

EllipticityReport ellipticity_angle_on(const InteriorSymbol& sym,
                                       const std::vector<std::vector<double>>& directions) {
  EllipticityReport rep;
  rep.is_even_order = sym.is_even_order();
  rep.samples = static_cast<int>(directions.size());
  Eigen::JacobiSVD<CMatrix> svd(sym.leading_normal());
  const auto& sv = svd.singularValues();
  rep.a0_min_singular = sv(sv.size() - 1);
  rep.a0_condition = condition_number(sym.leading_normal());
  rep.a0_invertible = rep.a0_min_singular > 1e-12 * std::max(1.0, sv(0));
  if (!rep.is_even_order) {
    rep.elliptic = false;
    rep.angle = kPi;
    return rep;
  }
  std::vector<SampleResult> results(directions.size());
  parallel_for(directions.size(), [&](std::size_t i) {
    const auto xi = to_complex(directions[i]);
    results[i] = analyze_point(sym, xi);
  });
  bool hit = false;
  double best = -1.0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    hit = hit || results[i].hit;
    const double a = results[i].angle;
    if (a > best || (a == best && lex_less(directions[i], rep.worst_xi))) {
      best = a;
      rep.worst_xi = directions[i];
    }
  }
  rep.elliptic = !hit && rep.a0_invertible;
  rep.angle = hit ? kPi : best;
  return rep;
}

EllipticityReport ellipticity_angle(const InteriorSymbol& sym, int sphere_samples) {
  if (sphere_samples < 64) {
    throw Error(ErrorKind::Precondition, "ellipticity_angle needs at least 64 sphere samples");
  }
  EllipticityReport rep = ellipticity_angle_on(sym, sphere_points(sym.dim(), sphere_samples));
  if (rep.is_even_order) {
    const EllipticityReport coarse =
        ellipticity_angle_on(sym, sphere_points(sym.dim(), sphere_samples / 2));
    rep.refinement_delta = rep.angle - coarse.angle;
  }
  return rep;
}

double check_complex_perturbation(const InteriorSymbol& sym, double eps, int samples) {
  if (!(eps >= 0.0 && eps < 1.0)) throw Error(ErrorKind::Precondition, "eps must lie in [0, 1)");
  const int dim = sym.dim();
  const auto xis = sphere_points(dim, samples);
  const auto etas = sphere_points(dim, std::max(16, 2 * dim * dim));
  std::vector<double> worst(xis.size(), 0.0);
  parallel_for(xis.size(), [&](std::size_t i) {
    std::vector<Complex> z(dim);
    for (const auto& e : etas) {
      for (int d = 0; d < dim; ++d) z[d] = Complex(xis[i][d], eps * e[d]);
      Eigen::ComplexEigenSolver<CMatrix> es(sym.eval(z), false);
      for (int k = 0; k < es.eigenvalues().size(); ++k) {
        worst[i] = std::max(worst[i], std::abs(std::arg(es.eigenvalues()(k))));
      }
    }
  });
  return *std::max_element(worst.begin(), worst.end());
}

}  // namespace lopashka
