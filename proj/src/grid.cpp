#include "lopashka/grid.hpp"

#include <cmath>

#include "lopashka/error.hpp"

namespace lopashka {

TangentialGrid::TangentialGrid(std::vector<int> pts, std::vector<double> lens)
    : points(std::move(pts)), lengths(std::move(lens)) {
  if (points.empty() || points.size() != lengths.size()) {
    throw Error(ErrorKind::Dimension, "tangential grid: points and lengths must match");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 1 || (points[i] & (points[i] - 1)) != 0) {
      throw Error(ErrorKind::Domain, "tangential grid: points per dimension must be a power of two");
    }
    if (!(lengths[i] > 0.0)) throw Error(ErrorKind::Domain, "tangential grid: period must be positive");
  }
}

TangentialGrid TangentialGrid::uniform(int n, int pts, double length) {
  return TangentialGrid(std::vector<int>(n, pts), std::vector<double>(n, length));
}

std::size_t TangentialGrid::size() const {
  std::size_t s = 1;
  for (int p : points) s *= static_cast<std::size_t>(p);
  return s;
}

double TangentialGrid::cell_volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) v *= lengths[i] / points[i];
  return v;
}

std::vector<int> TangentialGrid::unflatten(std::size_t t) const {
  std::vector<int> idx(points.size());
  for (int d = static_cast<int>(points.size()) - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(t % points[d]);
    t /= points[d];
  }
  return idx;
}

std::vector<double> TangentialGrid::coordinate(std::size_t t) const {
  const auto idx = unflatten(t);
  std::vector<double> x(idx.size());
  for (std::size_t d = 0; d < idx.size(); ++d) x[d] = lengths[d] * idx[d] / points[d];
  return x;
}

std::vector<double> TangentialGrid::wavenumber(std::size_t t) const {
  const auto idx = unflatten(t);
  std::vector<double> xi(idx.size());
  for (std::size_t d = 0; d < idx.size(); ++d) {
    const int k = idx[d] < points[d] / 2 ? idx[d] : idx[d] - points[d];
    xi[d] = 2.0 * kPi * k / lengths[d];
  }
  return xi;
}

NormalGrid NormalGrid::graded(double Y, int points, double grading) {
  if (points < 8) throw Error(ErrorKind::Domain, "normal grid needs at least 8 points");
  if (!(Y > 0.0) || !(grading >= 1.0)) throw Error(ErrorKind::Domain, "normal grid: bad extent or grading");
  NormalGrid g;
  g.grading = grading;
  for (int i = 0; i < points; ++i) g.y.push_back(Y * std::pow(static_cast<double>(i) / (points - 1), grading));
  return g;
}

NormalGrid NormalGrid::uniform(double Y, int points) { return graded(Y, points, 1.0); }

std::vector<double> NormalGrid::weights() const {
  std::vector<double> w(y.size(), 0.0);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double h = y[i + 1] - y[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

Field::Field(Grid g, int N)
    : grid(std::move(g)), components(N), data(grid.tangential.size() * grid.normal.size() * N, 0.0) {}

TraceField::TraceField(TangentialGrid g, int N) : grid(std::move(g)), components(N), data(grid.size() * N, 0.0) {}

double lp_norm(const Field& f, double p) {
  const auto w = f.grid.normal.weights();
  const double cell = f.grid.tangential.cell_volume();
  double s = 0.0;
  const int ny = f.grid.normal.size();
  for (std::size_t t = 0; t < f.grid.tangential.size(); ++t) {
    for (int iy = 0; iy < ny; ++iy) {
      double local = 0.0;
      for (int c = 0; c < f.components; ++c) local += std::norm(f.at(t, iy, c));
      s += cell * w[iy] * std::pow(local, p / 2.0);
    }
  }
  return std::pow(s, 1.0 / p);
}

double lp_norm(const TraceField& f, double p) {
  const double cell = f.grid.cell_volume();
  double s = 0.0;
  for (std::size_t t = 0; t < f.grid.size(); ++t) {
    double local = 0.0;
    for (int c = 0; c < f.components; ++c) local += std::norm(f.at(t, c));
    s += cell * std::pow(local, p / 2.0);
  }
  return std::pow(s, 1.0 / p);
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (const auto& v : f.data) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace lopashka
