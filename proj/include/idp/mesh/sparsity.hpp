#pragma once

#include <algorithm>
#include <set>
#include <vector>

namespace idp {

/// Compressed row storage of the stencil graph I(i). Columns in each row are
/// sorted and always include the diagonal. Every operator (m_ij, c_ij,
/// beta_ij, B_ij, d_ij) lives on this one graph, indexed by entry position.
class SparsityGraph {
 public:
  SparsityGraph() = default;

  explicit SparsityGraph(const std::vector<std::set<int>>& rows) {
    row_ptr_.assign(rows.size() + 1, 0);
    for (std::size_t i = 0; i < rows.size(); ++i)
      row_ptr_[i + 1] = row_ptr_[i] + static_cast<int>(rows[i].size());
    col_.reserve(row_ptr_.back());
    for (const auto& r : rows) col_.insert(col_.end(), r.begin(), r.end());
    diag_.resize(rows.size());
    transpose_.resize(col_.size());
    for (int i = 0; i < n_rows(); ++i) {
      diag_[i] = find(i, i);
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) transpose_[k] = find(col_[k], i);
    }
  }

  int n_rows() const { return static_cast<int>(row_ptr_.size()) - 1; }
  int n_entries() const { return static_cast<int>(col_.size()); }
  int row_begin(int i) const { return row_ptr_[i]; }
  int row_end(int i) const { return row_ptr_[i + 1]; }
  int col(int k) const { return col_[k]; }
  int diag(int i) const { return diag_[i]; }
  /// Entry index of (j, i) given the entry index of (i, j).
  int transpose(int k) const { return transpose_[k]; }
  int row_size(int i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  /// Entry index of (i, j), or -1 when j is not in I(i).
  int find(int i, int j) const {
    const auto first = col_.begin() + row_ptr_[i];
    const auto last = col_.begin() + row_ptr_[i + 1];
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return -1;
    return static_cast<int>(it - col_.begin());
  }

 private:
  std::vector<int> row_ptr_{0};
  std::vector<int> col_;
  std::vector<int> diag_;
  std::vector<int> transpose_;
};

}  // namespace idp
