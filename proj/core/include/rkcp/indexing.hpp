#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rkcp/errors.hpp"

namespace rkcp {

using Index = std::int64_t;

/// Tensor extents together with the distinguished mode k whose subproblem is
/// solved. Derived sizes: N = prod(dims), n = dims[mode], M = N / n.
class Shape {
public:
  Shape(std::vector<Index> dims, int mode);

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index extent(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
  int mode() const { return mode_; }

  Index mode_size() const { return dims_[static_cast<std::size_t>(mode_)]; }  // n
  Index total_size() const { return total_; }                                 // N
  Index complement_size() const { return total_ / mode_size(); }              // M

private:
  std::vector<Index> dims_;
  int mode_;
  Index total_;
};

/// Position of a tensor cell in the mode-k unfolding: row in [0, n),
/// flattened column in [0, M).
struct ModeKCoordinate {
  Index row = 0;
  Index col = 0;
};

/// Map a full multi-index to its mode-k unfolding coordinate. The column
/// strides over the non-k modes in ascending mode order:
///   col = sum_{l != k} multi[l] * J_l,  J_l = prod_{m < l, m != k} n_m.
ModeKCoordinate mode_k_coords(const Shape& shape, std::span<const Index> multi_index);

/// Inverse of mode_k_coords.
std::vector<Index> multi_index_from_coords(const Shape& shape, const ModeKCoordinate& coord);

/// Column-major vectorization index: row + col * n_rows.
Index vec_index(Index n_rows, Index row, Index col);

}  // namespace rkcp
