#pragma once

#include <vector>

#include "lopashka/grid.hpp"

namespace lopashka {

// Piecewise degree-5 interpolation of nodal data on each element of a normal
// mesh: coefficients in the local variable tau = (y - y_e) / h_e in [0, 1].
class ElementInterpolation {
 public:
  explicit ElementInterpolation(const NormalGrid& grid);

  static constexpr int kNodes = 6;
  int elements() const { return static_cast<int>(start_.size()); }
  int stencil_start(int e) const { return start_[e]; }
  double width(int e) const { return width_[e]; }
  // Maps the 6 stencil values to coefficients of tau^j.
  const RMatrix& forward(int e) const { return forward_[e]; }
  // Maps the 6 stencil values to coefficients of the reversed polynomial p(1 - tau).
  const RMatrix& reversed(int e) const { return reversed_[e]; }

 private:
  std::vector<int> start_;
  std::vector<double> width_;
  std::vector<RMatrix> forward_;
  std::vector<RMatrix> reversed_;
};

struct ForcedSolve {
  CMatrix states;  // ny x dim, row i is v(y_i)
  bool fallback = false;
};

// Solution of v' = M v + G(y) on [0, Y] that stays bounded in both directions:
// modes of M with Re < 0 start from 0 at y = 0, the others vanish at y = Y.
// G is given by its nodal values (ny x dim) and interpolated per element.
// This is the restriction to y >= 0 of the full-line solution for forcing
// supported in [0, Y].
ForcedSolve solve_forced_line(const CMatrix& M, const CMatrix& G, const NormalGrid& grid,
                              const ElementInterpolation& interp, double condition_limit = 1e8);

// Quadrature weights on the nodes that integrate the piecewise degree-5
// interpolant exactly (sixth order for smooth integrands).
std::vector<double> interpolant_weights(const NormalGrid& grid);

// phi_0(A), ..., phi_{count-1}(A) through one augmented matrix exponential.
std::vector<CMatrix> matrix_phi(const CMatrix& A, int count);

// Fornberg finite-difference weights for derivative `order` at x0 on the given nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int order);

}  // namespace lopashka
