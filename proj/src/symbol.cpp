#include "lopashka/symbol.hpp"

#include <cmath>
#include <sstream>

#include "lopashka/error.hpp"

namespace lopashka {

namespace {

std::string describe(const MultiIndex& alpha) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? "," : "") << alpha[i];
  os << ")";
  return os.str();
}

void check_finite(const CMatrix& m, const std::string& what) {
  if (!m.allFinite()) throw Error(ErrorKind::Domain, what + " has non-finite entries");
}

void append_indices(int length, int order, std::vector<int>& prefix, std::vector<MultiIndex>& out) {
  if (static_cast<int>(prefix.size()) == length - 1) {
    prefix.push_back(order);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = order; a >= 0; --a) {
    prefix.push_back(a);
    append_indices(length, order - a, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

MultiIndex::MultiIndex(std::vector<int> e) : entries(std::move(e)) {
  for (int v : entries) {
    if (v < 0) throw Error(ErrorKind::Domain, "multi-index entries must be non-negative");
  }
}

int MultiIndex::order() const {
  int s = 0;
  for (int v : entries) s += v;
  return s;
}

Complex monomial(const MultiIndex& alpha, std::span<const Complex> xi) {
  if (alpha.size() != xi.size()) {
    throw Error(ErrorKind::Dimension, "monomial: point has length " + std::to_string(xi.size()) +
                                          ", multi-index has length " + std::to_string(alpha.size()));
  }
  Complex r = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    for (int p = 0; p < alpha[i]; ++p) r *= xi[i];
  }
  return r;
}

std::vector<MultiIndex> multi_indices(int length, int order) {
  std::vector<MultiIndex> out;
  if (length == 0) {
    if (order == 0) out.emplace_back();
    return out;
  }
  std::vector<int> prefix;
  append_indices(length, order, prefix, out);
  return out;
}

std::vector<Complex> to_complex(std::span<const double> x) {
  return std::vector<Complex>(x.begin(), x.end());
}

InteriorSymbol::InteriorSymbol(int dim, int components, CoefficientMap coeffs)
    : dim_(dim), components_(components), order_(-1), coeffs_(std::move(coeffs)) {
  if (dim < 1) throw Error(ErrorKind::Domain, "interior symbol: dimension must be >= 1");
  if (components < 1) throw Error(ErrorKind::Domain, "interior symbol: N must be >= 1");
  if (coeffs_.empty()) throw Error(ErrorKind::Domain, "interior symbol: no coefficients");
  for (const auto& [alpha, a] : coeffs_) {
    if (static_cast<int>(alpha.size()) != dim) {
      throw Error(ErrorKind::Dimension, "interior symbol: multi-index " + describe(alpha) +
                                            " does not have length " + std::to_string(dim));
    }
    if (a.rows() != components || a.cols() != components) {
      throw Error(ErrorKind::Dimension, "interior symbol: coefficient " + describe(alpha) +
                                            " is not " + std::to_string(components) + "x" +
                                            std::to_string(components));
    }
    check_finite(a, "interior coefficient " + describe(alpha));
    if (order_ < 0) order_ = alpha.order();
    if (alpha.order() != order_) {
      throw Error(ErrorKind::Domain, "interior symbol is not homogeneous: " + describe(alpha));
    }
  }
  if (order_ < 1) throw Error(ErrorKind::Domain, "interior symbol must have positive order");
  std::vector<int> e(dim, 0);
  e.back() = order_;
  normal_index_ = MultiIndex(e);
  if (!coeffs_.count(normal_index_)) {
    throw Error(ErrorKind::Domain, "interior symbol: coefficient of xi_{n+1}^{" +
                                       std::to_string(order_) + "} is missing");
  }
}

int InteriorSymbol::half_order() const {
  if (!is_even_order()) {
    throw Error(ErrorKind::Precondition, "symbol of odd order " + std::to_string(order_));
  }
  return order_ / 2;
}

CMatrix InteriorSymbol::eval(std::span<const Complex> xi) const {
  if (static_cast<int>(xi.size()) != dim_) {
    throw Error(ErrorKind::Dimension, "eval_interior: point of length " + std::to_string(xi.size()) +
                                          ", symbol dimension " + std::to_string(dim_));
  }
  CMatrix r = CMatrix::Zero(components_, components_);
  for (const auto& [alpha, a] : coeffs_) r += monomial(alpha, xi) * a;
  return r;
}

CMatrix InteriorSymbol::eval(std::span<const double> xi) const {
  const auto c = to_complex(xi);
  return eval(std::span<const Complex>(c));
}

CMatrix InteriorSymbol::tangential_part(int l, std::span<const Complex> xi_prime) const {
  if (static_cast<int>(xi_prime.size()) != dim_ - 1) {
    throw Error(ErrorKind::Dimension, "tangential point has wrong length");
  }
  CMatrix r = CMatrix::Zero(components_, components_);
  if (l < 0 || l > order_) return r;
  for (const auto& [alpha, a] : coeffs_) {
    if (alpha.entries.back() != order_ - l) continue;
    Complex mono = 1.0;
    for (int i = 0; i < dim_ - 1; ++i) {
      for (int p = 0; p < alpha[i]; ++p) mono *= xi_prime[i];
    }
    r += mono * a;
  }
  return r;
}

CMatrix InteriorSymbol::eval_split(std::span<const Complex> xi_prime, Complex eta) const {
  CMatrix r = CMatrix::Zero(components_, components_);
  Complex eta_pow = 1.0;
  for (int l = order_; l >= 0; --l) {
    r += tangential_part(l, xi_prime) * eta_pow;
    eta_pow *= eta;
  }
  return r;
}

InteriorSymbol InteriorSymbol::scaled(double factor) const {
  CoefficientMap c = coeffs_;
  for (auto& [alpha, a] : c) a *= factor;
  return InteriorSymbol(dim_, components_, std::move(c));
}

std::vector<CoefficientMap> tangential_decompose(const InteriorSymbol& sym) {
  std::vector<CoefficientMap> parts(sym.order() + 1);
  const int n = sym.tangential_dim();
  for (const auto& [alpha, a] : sym.coefficients()) {
    const int l = sym.order() - alpha.entries.back();
    MultiIndex tangential(std::vector<int>(alpha.entries.begin(), alpha.entries.begin() + n));
    auto [it, inserted] = parts[l].emplace(tangential, a);
    if (!inserted) it->second += a;
  }
  return parts;
}

CMatrix eval_polynomial(const CoefficientMap& poly, int components, std::span<const Complex> x) {
  CMatrix r = CMatrix::Zero(components, components);
  for (const auto& [alpha, a] : poly) r += monomial(alpha, x) * a;
  return r;
}

Projection::Projection(CMatrix matrix, double tol) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw Error(ErrorKind::Dimension, "projection must be a non-empty square matrix");
  }
  check_finite(matrix_, "projection");
  const double scale = std::max(1.0, matrix_.norm());
  if ((matrix_ * matrix_ - matrix_).norm() > tol * scale) {
    throw Error(ErrorKind::Domain, "projection is not idempotent (|P^2 - P| = " +
                                       std::to_string((matrix_ * matrix_ - matrix_).norm()) + ")");
  }
  // The range of an idempotent is spanned by its left singular vectors with
  // singular values >= 1 (all nonzero singular values of a projection are >= 1).
  Eigen::JacobiSVD<CMatrix> svd(matrix_, Eigen::ComputeFullU);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 0.5) ++rank;
  }
  range_basis_ = svd.matrixU().leftCols(rank);
}

int BoundaryRow::max_order() const {
  int k = -1;
  for (const auto& c : components) k = std::max(k, c.order);
  return k;
}

BoundaryOperatorSpec::BoundaryOperatorSpec(const InteriorSymbol& sym, std::vector<BoundaryRow> rows,
                                           double tol)
    : dim_(sym.dim()), components_(sym.components()), order_(sym.order()), rows_(std::move(rows)) {
  const int m = sym.half_order();
  if (static_cast<int>(rows_.size()) != m) {
    throw Error(ErrorKind::Dimension, "boundary operator needs m = " + std::to_string(m) +
                                          " rows, got " + std::to_string(rows_.size()));
  }
  for (std::size_t j = 0; j < rows_.size(); ++j) {
    const auto& row = rows_[j];
    const std::string where = "boundary row " + std::to_string(j);
    if (row.components.empty()) throw Error(ErrorKind::Domain, where + " has no components");
    if (row.max_order() >= order_) {
      throw Error(ErrorKind::Domain, where + ": order must be < " + std::to_string(order_));
    }
    for (std::size_t c = 0; c < row.components.size(); ++c) {
      const auto& comp = row.components[c];
      const CMatrix& P = comp.projection.matrix();
      if (comp.order < 0) throw Error(ErrorKind::Domain, where + ": negative order");
      if (P.rows() != components_) {
        throw Error(ErrorKind::Dimension, where + ": projection has wrong size");
      }
      for (std::size_t c2 = 0; c2 < row.components.size(); ++c2) {
        if (c2 == c) continue;
        if (row.components[c2].order == comp.order) {
          throw Error(ErrorKind::Domain, where + ": two components of order " +
                                             std::to_string(comp.order));
        }
        if ((P * row.components[c2].projection.matrix()).norm() > tol) {
          throw Error(ErrorKind::Domain, where + ": projections are not mutually annihilating");
        }
      }
      const CMatrix complement = CMatrix::Identity(components_, components_) - P;
      for (const auto& [beta, b] : comp.coeffs) {
        if (static_cast<int>(beta.size()) != dim_) {
          throw Error(ErrorKind::Dimension, where + ": multi-index " + describe(beta) +
                                                " has wrong length");
        }
        if (beta.order() != comp.order) {
          throw Error(ErrorKind::Domain, where + ": multi-index " + describe(beta) +
                                             " does not have order " + std::to_string(comp.order));
        }
        if (b.rows() != components_ || b.cols() != components_) {
          throw Error(ErrorKind::Dimension, where + ": coefficient has wrong size");
        }
        check_finite(b, where + " coefficient");
        if ((complement * b * P).norm() > tol * std::max(1.0, b.norm())) {
          throw Error(ErrorKind::Domain, where + ": coefficient " + describe(beta) +
                                             " does not leave ran(P) invariant");
        }
      }
      slots_.push_back(DataSlot{static_cast<int>(j), static_cast<int>(c), comp.order,
                                comp.projection.rank(), data_dim_});
      data_dim_ += comp.projection.rank();
    }
  }
}

const BoundaryRow& BoundaryOperatorSpec::row(int j) const {
  if (j < 0 || j >= row_count()) {
    throw Error(ErrorKind::Domain, "boundary row index " + std::to_string(j) + " out of range");
  }
  return rows_[j];
}

CMatrix eval_boundary_component(const BoundaryOperatorSpec& spec, int j, int component,
                                std::span<const Complex> xi) {
  const auto& row = spec.row(j);
  if (component < 0 || component >= static_cast<int>(row.components.size())) {
    throw Error(ErrorKind::Domain, "boundary component index out of range");
  }
  if (static_cast<int>(xi.size()) != spec.dim()) {
    throw Error(ErrorKind::Dimension, "eval_boundary: point has wrong length");
  }
  const auto& comp = row.components[component];
  CMatrix r = CMatrix::Zero(spec.components(), spec.components());
  for (const auto& [beta, b] : comp.coeffs) r += monomial(beta, xi) * b;
  return r * comp.projection.matrix();
}

CMatrix eval_boundary(const BoundaryOperatorSpec& spec, int j, std::span<const Complex> xi) {
  const auto& row = spec.row(j);
  CMatrix r = CMatrix::Zero(spec.components(), spec.components());
  for (int c = 0; c < static_cast<int>(row.components.size()); ++c) {
    r += eval_boundary_component(spec, j, c, xi);
  }
  return r;
}

CMatrix boundary_tangential_part(const BoundaryOperatorSpec& spec, int j, int component, int l,
                                 std::span<const Complex> xi_prime) {
  const auto& comp = spec.row(j).components.at(component);
  const int n = spec.dim() - 1;
  if (static_cast<int>(xi_prime.size()) != n) {
    throw Error(ErrorKind::Dimension, "tangential point has wrong length");
  }
  CMatrix r = CMatrix::Zero(spec.components(), spec.components());
  for (const auto& [beta, b] : comp.coeffs) {
    if (beta.entries.back() != comp.order - l) continue;
    Complex mono = 1.0;
    for (int i = 0; i < n; ++i) {
      for (int p = 0; p < beta[i]; ++p) mono *= xi_prime[i];
    }
    r += mono * b;
  }
  return r;
}

CVector stack_row_data(const BoundaryOperatorSpec& spec, const std::vector<CVector>& row_data,
                       double tol) {
  if (static_cast<int>(row_data.size()) != spec.row_count()) {
    throw Error(ErrorKind::Dimension, "expected one data vector per boundary row");
  }
  CVector out(spec.data_dim());
  for (int j = 0; j < spec.row_count(); ++j) {
    const CVector& g = row_data[j];
    if (g.size() != spec.components()) {
      throw Error(ErrorKind::Dimension, "boundary datum has wrong length");
    }
    CVector covered = CVector::Zero(g.size());
    for (const auto& slot : spec.slots()) {
      if (slot.row != j) continue;
      const auto& proj = spec.row(j).components[slot.component].projection;
      const CVector part = proj.matrix() * g;
      covered += part;
      out.segment(slot.offset, slot.rank) = proj.range_basis().adjoint() * part;
    }
    if ((g - covered).norm() > tol * std::max(1.0, g.norm())) {
      throw Error(ErrorKind::Domain, "datum of boundary row " + std::to_string(j) +
                                         " lies outside the sum of the component ranges");
    }
  }
  return out;
}

}  // namespace lopashka
