#pragma once

#include <optional>
#include <span>
#include <vector>

#include "knpemi/common.hpp"

namespace knpemi {

/// Compressed sparse rows; column indices sorted and unique within a row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col, std::vector<double> val);

  /// Sums duplicates. Triplets need not be sorted.
  static CsrMatrix from_triplets(Index rows, Index cols, std::span<const Index> r, std::span<const Index> c,
                                 std::span<const double> v);
  static CsrMatrix identity(Index n);
  static CsrMatrix diagonal(std::span<const double> d);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::size_t nnz() const { return col_.size(); }
  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col() const { return col_; }
  std::span<const double> values() const { return val_; }
  std::span<double> values() { return val_; }

  /// Value at (i, j), zero if not stored.
  double at(Index i, Index j) const;
  std::vector<double> diagonal_values() const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  /// y = b - A x
  void residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const;

  /// max row sum of |a_ij|
  double norm_inf() const;
  /// max |a_ij - a_ji|
  double asymmetry() const;

  CsrMatrix transpose() const;
  /// this + s * other
  CsrMatrix add(const CsrMatrix& other, double s = 1.0) const;
  CsrMatrix scaled(double s) const;

  void check_invariants() const;

 private:
  Index rows_ = 0, cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_;
  std::vector<double> val_;
};

/// C = A * B
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
/// P^T A P
CsrMatrix galerkin_product(const CsrMatrix& p, const CsrMatrix& a);

/// Matrix, right-hand side and an optional nullspace basis vector.
struct SparseSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::optional<std::vector<double>> nullspace;

  Index size() const { return matrix.rows(); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += a x
void axpy(double a, std::span<const double> x, std::span<double> y);
/// Removes the component along `basis` (not necessarily normalized).
void project_out(std::span<double> x, std::span<const double> basis);

/// Dense LU with partial pivoting; near-zero pivots are lifted for
/// semidefinite coarse operators.
class DenseLu {
 public:
  DenseLu() = default;
  explicit DenseLu(const CsrMatrix& a);
  void solve(std::span<const double> b, std::span<double> x) const;
  Index size() const { return n_; }
  bool perturbed() const { return perturbed_; }

 private:
  Index n_ = 0;
  std::vector<double> lu_;
  std::vector<Index> piv_;
  bool perturbed_ = false;
};

}  // namespace knpemi
