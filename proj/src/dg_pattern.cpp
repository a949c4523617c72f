#include "knpemi/dg_pattern.hpp"

#include <algorithm>

namespace knpemi {

DgPattern::DgPattern(const DgSpace& space) : nloc_(space.local_size()) {
  const Mesh2D& mesh = space.mesh();
  const Index nc = mesh.num_cells();
  cell_ptr_.assign(nc + 1, 0);
  std::vector<Index> list;
  for (Index c = 0; c < nc; ++c) {
    list.assign(1, c);
    for (int k = 0; k < 3; ++k) {
      const Facet& f = mesh.facet(mesh.cell_facet(c, k));
      if (f.cls == FacetClass::Exterior) continue;
      list.push_back(f.cell[0] == c ? f.cell[1] : f.cell[0]);
    }
    std::sort(list.begin(), list.end());
    cell_adj_.insert(cell_adj_.end(), list.begin(), list.end());
    cell_ptr_[c + 1] = static_cast<Index>(cell_adj_.size());
  }
  row_ptr_.assign(static_cast<std::size_t>(nc) * nloc_ + 1, 0);
  col_.reserve(static_cast<std::size_t>(cell_adj_.size()) * nloc_ * nloc_);
  for (Index c = 0; c < nc; ++c) {
    for (int i = 0; i < nloc_; ++i) {
      for (Index k = cell_ptr_[c]; k < cell_ptr_[c + 1]; ++k) {
        for (int j = 0; j < nloc_; ++j) col_.push_back(cell_adj_[k] * nloc_ + j);
      }
      row_ptr_[c * nloc_ + i + 1] = static_cast<Index>(col_.size());
    }
  }
}

std::size_t DgPattern::entry(Index a, int i, Index b, int j) const {
  Index slot = 0;
  const Index begin = cell_ptr_[a];
  const Index end = cell_ptr_[a + 1];
  while (begin + slot < end && cell_adj_[begin + slot] != b) ++slot;
  if (begin + slot == end) throw NumericalError("DgPattern: cells are not coupled");
  return static_cast<std::size_t>(row_ptr_[a * nloc_ + i]) + static_cast<std::size_t>(slot) * nloc_ + j;
}

CsrMatrix MatrixBuilder::finish() const {
  return CsrMatrix(pattern_->rows(), pattern_->rows(), pattern_->row_ptr(), pattern_->col(), values_);
}

}  // namespace knpemi
