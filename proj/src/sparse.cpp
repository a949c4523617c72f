#include "knpemi/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace knpemi {

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col,
                     std::vector<double> val)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)), val_(std::move(val)) {
  check_invariants();
}

void CsrMatrix::check_invariants() const {
  if (static_cast<Index>(row_ptr_.size()) != rows_ + 1) throw NumericalError("CsrMatrix: row pointer size");
  if (col_.size() != val_.size()) throw NumericalError("CsrMatrix: column/value size mismatch");
  if (row_ptr_.front() != 0 || row_ptr_.back() != static_cast<Index>(col_.size())) {
    throw NumericalError("CsrMatrix: row pointer bounds");
  }
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_[k] < 0 || col_[k] >= cols_) throw NumericalError("CsrMatrix: column out of range");
      if (k > row_ptr_[i] && col_[k] <= col_[k - 1]) throw NumericalError("CsrMatrix: unsorted or duplicate column");
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::span<const Index> r, std::span<const Index> c,
                                   std::span<const double> v) {
  std::vector<Index> count(rows + 1, 0);
  for (Index i : r) ++count[i + 1];
  std::partial_sum(count.begin(), count.end(), count.begin());
  std::vector<Index> order(r.size());
  std::vector<Index> fill(count.begin(), count.end() - 1);
  for (std::size_t k = 0; k < r.size(); ++k) order[fill[r[k]]++] = static_cast<Index>(k);
  std::vector<Index> row_ptr(rows + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  col.reserve(r.size());
  val.reserve(r.size());
  for (Index i = 0; i < rows; ++i) {
    auto begin = order.begin() + count[i];
    auto end = order.begin() + count[i + 1];
    std::stable_sort(begin, end, [&](Index a, Index b) { return c[a] < c[b]; });
    for (auto it = begin; it != end; ++it) {
      if (!col.empty() && static_cast<Index>(col.size()) > row_ptr[i] && col.back() == c[*it]) {
        val.back() += v[*it];
      } else {
        col.push_back(c[*it]);
        val.push_back(v[*it]);
      }
    }
    row_ptr[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col), std::move(val));
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<double> d(n, 1.0);
  return diagonal(d);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> d) {
  const Index n = static_cast<Index>(d.size());
  std::vector<Index> rp(n + 1), col(n);
  std::iota(rp.begin(), rp.end(), 0);
  std::iota(col.begin(), col.end(), 0);
  return CsrMatrix(n, n, std::move(rp), std::move(col), std::vector<double>(d.begin(), d.end()));
}

double CsrMatrix::at(Index i, Index j) const {
  const auto b = col_.begin() + row_ptr_[i];
  const auto e = col_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  return (it != e && *it == j) ? val_[it - col_.begin()] : 0.0;
}

std::vector<double> CsrMatrix::diagonal_values() const {
  std::vector<double> d(rows_, 0.0);
  for (Index i = 0; i < std::min(rows_, cols_); ++i) d[i] = at(i, i);
  return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
#pragma omp parallel for schedule(static) if (rows_ > 50000)
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

void CsrMatrix::residual(std::span<const double> b, std::span<const double> x, std::span<double> r) const {
#pragma omp parallel for schedule(static) if (rows_ > 50000)
  for (Index i = 0; i < rows_; ++i) {
    double s = b[i];
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s -= val_[k] * x[col_[k]];
    r[i] = s;
  }
}

double CsrMatrix::norm_inf() const {
  double m = 0.0;
  for (Index i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(val_[k]);
    m = std::max(m, s);
  }
  return m;
}

double CsrMatrix::asymmetry() const {
  double m = 0.0;
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) m = std::max(m, std::abs(val_[k] - at(col_[k], i)));
  }
  return m;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Index> rp(cols_ + 1, 0);
  for (Index c : col_) ++rp[c + 1];
  std::partial_sum(rp.begin(), rp.end(), rp.begin());
  std::vector<Index> fill(rp.begin(), rp.end() - 1);
  std::vector<Index> col(col_.size());
  std::vector<double> val(val_.size());
  for (Index i = 0; i < rows_; ++i) {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const Index dst = fill[col_[k]]++;
      col[dst] = i;
      val[dst] = val_[k];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(rp), std::move(col), std::move(val));
}

CsrMatrix CsrMatrix::add(const CsrMatrix& o, double s) const {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw NumericalError("CsrMatrix::add: shape mismatch");
  std::vector<Index> rp(rows_ + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  col.reserve(nnz() + o.nnz());
  val.reserve(nnz() + o.nnz());
  for (Index i = 0; i < rows_; ++i) {
    Index a = row_ptr_[i], ae = row_ptr_[i + 1];
    Index b = o.row_ptr_[i], be = o.row_ptr_[i + 1];
    while (a < ae || b < be) {
      if (b >= be || (a < ae && col_[a] < o.col_[b])) {
        col.push_back(col_[a]);
        val.push_back(val_[a++]);
      } else if (a >= ae || o.col_[b] < col_[a]) {
        col.push_back(o.col_[b]);
        val.push_back(s * o.val_[b++]);
      } else {
        col.push_back(col_[a]);
        val.push_back(val_[a++] + s * o.val_[b++]);
      }
    }
    rp[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix(rows_, cols_, std::move(rp), std::move(col), std::move(val));
}

CsrMatrix CsrMatrix::scaled(double s) const {
  CsrMatrix out = *this;
  for (double& v : out.val_) v *= s;
  return out;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw NumericalError("multiply: inner dimension mismatch");
  const Index n = a.rows(), m = b.cols();
  std::vector<Index> rp(n + 1, 0);
  std::vector<Index> col;
  std::vector<double> val;
  std::vector<Index> marker(m, -1);
  std::vector<double> acc(m, 0.0);
  std::vector<Index> touched;
  const auto arp = a.row_ptr(), acol = a.col();
  const auto brp = b.row_ptr(), bcol = b.col();
  const auto aval = a.values(), bval = b.values();
  for (Index i = 0; i < n; ++i) {
    touched.clear();
    for (Index ka = arp[i]; ka < arp[i + 1]; ++ka) {
      const Index j = acol[ka];
      const double av = aval[ka];
      for (Index kb = brp[j]; kb < brp[j + 1]; ++kb) {
        const Index c = bcol[kb];
        if (marker[c] != i) {
          marker[c] = i;
          acc[c] = 0.0;
          touched.push_back(c);
        }
        acc[c] += av * bval[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index c : touched) {
      col.push_back(c);
      val.push_back(acc[c]);
    }
    rp[i + 1] = static_cast<Index>(col.size());
  }
  return CsrMatrix(n, m, std::move(rp), std::move(col), std::move(val));
}

CsrMatrix galerkin_product(const CsrMatrix& p, const CsrMatrix& a) {
  return multiply(p.transpose(), multiply(a, p));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void project_out(std::span<double> x, std::span<const double> basis) {
  const double bb = dot(basis, basis);
  if (bb == 0.0) return;
  axpy(-dot(x, basis) / bb, basis, x);
}

DenseLu::DenseLu(const CsrMatrix& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw NumericalError("DenseLu: matrix must be square");
  const Index n = n_;
  lu_.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (Index k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) lu_[i * n + a.col()[k]] = a.values()[k];
  }
  double scale = 0.0;
  for (Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(lu_[i * n + i]));
  if (scale == 0.0) scale = 1.0;
  const double tiny = 1e-12 * scale;
  piv_.resize(n);
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    for (Index i = k + 1; i < n; ++i) {
      if (std::abs(lu_[i * n + k]) > std::abs(lu_[p * n + k])) p = i;
    }
    piv_[k] = p;
    if (p != k) {
      for (Index j = 0; j < n; ++j) std::swap(lu_[k * n + j], lu_[p * n + j]);
    }
    double& d = lu_[k * n + k];
    if (std::abs(d) < tiny) {
      d = d < 0.0 ? -tiny : tiny;
      perturbed_ = true;
    }
    for (Index i = k + 1; i < n; ++i) {
      const double l = lu_[i * n + k] / d;
      lu_[i * n + k] = l;
      if (l == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) lu_[i * n + j] -= l * lu_[k * n + j];
    }
  }
}

void DenseLu::solve(std::span<const double> b, std::span<double> x) const {
  const Index n = n_;
  std::copy(b.begin(), b.end(), x.begin());
  for (Index k = 0; k < n; ++k) {
    if (piv_[k] != k) std::swap(x[k], x[piv_[k]]);
  }
  for (Index i = 0; i < n; ++i) {
    double s = x[i];
    for (Index j = 0; j < i; ++j) s -= lu_[i * n + j] * x[j];
    x[i] = s;
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (Index j = i + 1; j < n; ++j) s -= lu_[i * n + j] * x[j];
    x[i] = s / lu_[i * n + i];
  }
}

}  // namespace knpemi
