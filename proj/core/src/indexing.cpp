#include "rkcp/indexing.hpp"

#include <string>

namespace rkcp {

Shape::Shape(std::vector<Index> dims, int mode) : dims_(std::move(dims)), mode_(mode) {
  if (dims_.size() < 2) {
    throw ValidationError("shape needs at least 2 modes, got " +
                          std::to_string(dims_.size()));
  }
  if (mode_ < 0 || mode_ >= static_cast<int>(dims_.size())) {
    throw ValidationError("mode " + std::to_string(mode_) + " outside [0, " +
                          std::to_string(dims_.size()) + ")");
  }
  total_ = 1;
  for (std::size_t axis = 0; axis < dims_.size(); ++axis) {
    if (dims_[axis] < 1) {
      throw ValidationError("axis " + std::to_string(axis) + " has extent " +
                            std::to_string(dims_[axis]) + ", must be >= 1");
    }
    total_ *= dims_[axis];
  }
}

ModeKCoordinate mode_k_coords(const Shape& shape, std::span<const Index> multi_index) {
  const int d = shape.order();
  if (static_cast<int>(multi_index.size()) != d) {
    throw IndexError("multi-index has " + std::to_string(multi_index.size()) +
                     " entries, shape has " + std::to_string(d) + " modes");
  }
  ModeKCoordinate coord;
  Index stride = 1;
  for (int axis = 0; axis < d; ++axis) {
    const Index idx = multi_index[static_cast<std::size_t>(axis)];
    if (idx < 0 || idx >= shape.extent(axis)) {
      throw IndexError("axis " + std::to_string(axis) + " index " + std::to_string(idx) +
                       " outside [0, " + std::to_string(shape.extent(axis)) + ")");
    }
    if (axis == shape.mode()) {
      coord.row = idx;
    } else {
      coord.col += idx * stride;
      stride *= shape.extent(axis);
    }
  }
  return coord;
}

std::vector<Index> multi_index_from_coords(const Shape& shape, const ModeKCoordinate& coord) {
  if (coord.row < 0 || coord.row >= shape.mode_size()) {
    throw IndexError("row " + std::to_string(coord.row) + " outside [0, " +
                     std::to_string(shape.mode_size()) + ")");
  }
  if (coord.col < 0 || coord.col >= shape.complement_size()) {
    throw IndexError("col " + std::to_string(coord.col) + " outside [0, " +
                     std::to_string(shape.complement_size()) + ")");
  }
  const int d = shape.order();
  std::vector<Index> multi(static_cast<std::size_t>(d), 0);
  multi[static_cast<std::size_t>(shape.mode())] = coord.row;
  Index rest = coord.col;
  for (int axis = 0; axis < d; ++axis) {
    if (axis == shape.mode()) continue;
    multi[static_cast<std::size_t>(axis)] = rest % shape.extent(axis);
    rest /= shape.extent(axis);
  }
  return multi;
}

Index vec_index(Index n_rows, Index row, Index col) {
  if (row < 0 || row >= n_rows) {
    throw IndexError("row " + std::to_string(row) + " outside [0, " +
                     std::to_string(n_rows) + ")");
  }
  if (col < 0) {
    throw IndexError("col " + std::to_string(col) + " negative");
  }
  return row + col * n_rows;
}

}  // namespace rkcp
