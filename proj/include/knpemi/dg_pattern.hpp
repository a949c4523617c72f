#pragma once

#include <vector>

#include "knpemi/dgspace.hpp"
#include "knpemi/sparse.hpp"

namespace knpemi {

/// Block sparsity of a DG operator: each cell couples to itself and to its
/// neighbours across interior and membrane facets. Columns of a row are the
/// coupled cells in ascending order, local_size() entries each.
class DgPattern {
 public:
  explicit DgPattern(const DgSpace& space);

  Index rows() const { return static_cast<Index>(row_ptr_.size()) - 1; }
  std::size_t nnz() const { return col_.size(); }
  /// Position in the value array of entry (dof(a,i), dof(b,j)).
  std::size_t entry(Index a, int i, Index b, int j) const;

  const std::vector<Index>& row_ptr() const { return row_ptr_; }
  const std::vector<Index>& col() const { return col_; }

 private:
  int nloc_;
  std::vector<Index> cell_ptr_;
  std::vector<Index> cell_adj_;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_;
};

/// Accumulates entries in a fixed DG pattern; order of additions is the
/// order of the calls, so results are deterministic.
class MatrixBuilder {
 public:
  explicit MatrixBuilder(const DgPattern& pattern) : pattern_(&pattern), values_(pattern.nnz(), 0.0) {}

  void add(Index a, int i, Index b, int j, double v) { values_[pattern_->entry(a, i, b, j)] += v; }
  CsrMatrix finish() const;

 private:
  const DgPattern* pattern_;
  std::vector<double> values_;
};

}  // namespace knpemi
