#pragma once

#include <vector>

#include "lopashka/types.hpp"

namespace lopashka {

// Periodic tangential torus [0, L_1) x ... x [0, L_n).
struct TangentialGrid {
  std::vector<int> points;
  std::vector<double> lengths;

  TangentialGrid() = default;
  TangentialGrid(std::vector<int> pts, std::vector<double> lens);
  static TangentialGrid uniform(int n, int points, double length);

  int dims() const { return static_cast<int>(points.size()); }
  std::size_t size() const;
  double cell_volume() const;
  // Multi-index of a flat (row-major) position.
  std::vector<int> unflatten(std::size_t t) const;
  std::vector<double> coordinate(std::size_t t) const;
  // Angular wavenumber vector xi' of the DFT mode at flat position t.
  std::vector<double> wavenumber(std::size_t t) const;
};

// Graded normal mesh y_i = Y (i / (P-1))^grading on [0, Y].
struct NormalGrid {
  std::vector<double> y;
  double grading = 2.0;

  static NormalGrid graded(double Y, int points, double grading = 2.0);
  static NormalGrid uniform(double Y, int points);

  int size() const { return static_cast<int>(y.size()); }
  double extent() const { return y.back(); }
  // Trapezoidal quadrature weights.
  std::vector<double> weights() const;
};

struct Grid {
  TangentialGrid tangential;
  NormalGrid normal;
};

// Field on a grid with values in C^N; data[(t * ny + iy) * N + c].
struct Field {
  Grid grid;
  int components = 1;
  std::vector<Complex> data;

  Field() = default;
  Field(Grid g, int N);

  Complex& at(std::size_t t, int iy, int c) { return data[(t * grid.normal.size() + iy) * components + c]; }
  Complex at(std::size_t t, int iy, int c) const {
    return data[(t * grid.normal.size() + iy) * components + c];
  }
};

// Boundary field on the tangential torus; data[t * N + c].
struct TraceField {
  TangentialGrid grid;
  int components = 1;
  std::vector<Complex> data;

  TraceField() = default;
  TraceField(TangentialGrid g, int N);

  Complex& at(std::size_t t, int c) { return data[t * components + c]; }
  Complex at(std::size_t t, int c) const { return data[t * components + c]; }
};

// Discrete L^p norms with rectangle (tangential) and trapezoid (normal) weights.
double lp_norm(const Field& f, double p = 2.0);
double lp_norm(const TraceField& f, double p = 2.0);
double max_abs(const Field& f);

}  // namespace lopashka
