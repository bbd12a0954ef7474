#pragma once

#include <map>
#include <span>
#include <vector>

#include "lopashka/tolerances.hpp"
#include "lopashka/types.hpp"

namespace lopashka {

// Exponent vector of a monomial xi^alpha.
struct MultiIndex {
  std::vector<int> entries;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e);
  MultiIndex(std::initializer_list<int> e) : MultiIndex(std::vector<int>(e)) {}

  int order() const;
  std::size_t size() const { return entries.size(); }
  int operator[](std::size_t i) const { return entries[i]; }

  auto operator<=>(const MultiIndex&) const = default;
};

// xi^alpha for a complex point.
Complex monomial(const MultiIndex& alpha, std::span<const Complex> xi);

// All multi-indices of the given length and total order, in lexicographic order.
std::vector<MultiIndex> multi_indices(int length, int order);

std::vector<Complex> to_complex(std::span<const double> x);

using CoefficientMap = std::map<MultiIndex, CMatrix>;

// Homogeneous constant-coefficient matrix symbol A(xi) = sum_{|alpha|=2m} a_alpha xi^alpha.
// The last coordinate is the normal variable.  Odd orders are representable so
// that ellipticity analysis can reject them explicitly; every half-space
// routine requires an even order.
class InteriorSymbol {
 public:
  InteriorSymbol(int dim, int components, CoefficientMap coeffs);

  int order() const { return order_; }
  bool is_even_order() const { return order_ % 2 == 0; }
  // m with order = 2m; throws for odd orders.
  int half_order() const;
  int dim() const { return dim_; }
  int tangential_dim() const { return dim_ - 1; }
  int components() const { return components_; }
  const CoefficientMap& coefficients() const { return coeffs_; }

  // Coefficient of xi_{n+1}^{2m}.
  const CMatrix& leading_normal() const { return coeffs_.at(normal_index_); }

  CMatrix eval(std::span<const Complex> xi) const;
  CMatrix eval(std::span<const double> xi) const;

  // Homogeneous tangential parts: tilde a_l(xi') = sum_{|alpha'|=l} a_{(alpha', 2m-l)} xi'^alpha'.
  CMatrix tangential_part(int l, std::span<const Complex> xi_prime) const;
  // sum_l tilde a_l(xi') eta^{2m-l}.
  CMatrix eval_split(std::span<const Complex> xi_prime, Complex eta) const;

  InteriorSymbol scaled(double factor) const;

 private:
  int dim_;
  int components_;
  int order_;
  MultiIndex normal_index_;
  CoefficientMap coeffs_;
};

// Coefficients of tilde a_l keyed by tangential multi-index alpha' (length n), for l = 0..2m.
std::vector<CoefficientMap> tangential_decompose(const InteriorSymbol& sym);

// Evaluate a polynomial map given by tangential_decompose.
CMatrix eval_polynomial(const CoefficientMap& poly, int components, std::span<const Complex> x);

// Idempotent N x N matrix with an orthonormal basis of its range.
class Projection {
 public:
  explicit Projection(CMatrix matrix, double tol = tol::kProjection);

  const CMatrix& matrix() const { return matrix_; }
  int size() const { return static_cast<int>(matrix_.rows()); }
  int rank() const { return static_cast<int>(range_basis_.cols()); }
  // N x rank with orthonormal columns spanning ran(P).
  const CMatrix& range_basis() const { return range_basis_; }

 private:
  CMatrix matrix_;
  CMatrix range_basis_;
};

// One homogeneous component b_{j,k}(xi) P_{j,k} of a boundary row.
struct BoundaryComponent {
  int order = 0;
  Projection projection;
  CoefficientMap coeffs;  // keyed by beta with |beta| = order, length n+1
};

struct BoundaryRow {
  std::vector<BoundaryComponent> components;
  int max_order() const;
};

// Position of one data slot (row j, component c of that row) in the stacked data vector.
struct DataSlot {
  int row;
  int component;
  int order;
  int rank;
  int offset;
};

class BoundaryOperatorSpec {
 public:
  // Validates the projection algebra and range invariance against the symbol.
  BoundaryOperatorSpec(const InteriorSymbol& sym, std::vector<BoundaryRow> rows,
                       double tol = tol::kProjection);

  int dim() const { return dim_; }
  int components() const { return components_; }
  int order() const { return order_; }
  int row_count() const { return static_cast<int>(rows_.size()); }
  const std::vector<BoundaryRow>& rows() const { return rows_; }
  const BoundaryRow& row(int j) const;

  // Data slots in row-major (row, component) order and the total stacked dimension.
  const std::vector<DataSlot>& slots() const { return slots_; }
  int data_dim() const { return data_dim_; }

 private:
  int dim_;
  int components_;
  int order_;
  std::vector<BoundaryRow> rows_;
  std::vector<DataSlot> slots_;
  int data_dim_ = 0;
};

// Full row symbol B_j(xi) = sum_k b_{j,k}(xi) P_{j,k}; j is 0-based.
CMatrix eval_boundary(const BoundaryOperatorSpec& spec, int j, std::span<const Complex> xi);
// Single component b_{j,k}(xi) P_{j,k}.
CMatrix eval_boundary_component(const BoundaryOperatorSpec& spec, int j, int component,
                                std::span<const Complex> xi);
// tilde b_{j,k,l}(xi') = sum_{|beta'|=l} b_{j,k,(beta',k-l)} xi'^beta' (without the projection).
CMatrix boundary_tangential_part(const BoundaryOperatorSpec& spec, int j, int component, int l,
                                 std::span<const Complex> xi_prime);

// Split a row datum g_j into its slot coordinates W^H P_{j,k} g_j; rejects data
// outside the direct sum of the component ranges.
CVector stack_row_data(const BoundaryOperatorSpec& spec, const std::vector<CVector>& row_data,
                       double tol = 1e-10);

}  // namespace lopashka
