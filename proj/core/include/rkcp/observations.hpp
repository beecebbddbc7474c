#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rkcp/errors.hpp"
#include "rkcp/indexing.hpp"

namespace rkcp {

/// The fixed factor matrices A_l for every mode l != k, in ascending mode
/// order. Factor l has shape n_l x r. The Khatri-Rao product Z they induce is
/// never materialized; rows are evaluated on demand (kr_row).
class FactorSet {
public:
  static FactorSet create(std::vector<Eigen::MatrixXd> factors, const Shape& shape);

  const std::vector<Eigen::MatrixXd>& factors() const { return factors_; }
  const Eigen::MatrixXd& factor(std::size_t position) const { return factors_[position]; }
  Index rank() const { return rank_; }

private:
  FactorSet(std::vector<Eigen::MatrixXd> factors, Index rank);

  std::vector<Eigen::MatrixXd> factors_;  // ascending modes, mode k omitted
  Index rank_;
};

/// One observed tensor entry in mode-k unfolding coordinates.
struct ObservationEntry {
  Index row = 0;   // i_m, mode-k index
  Index col = 0;   // j_m, flattened index over the other modes
  double value = 0.0;  // y_m
};

/// An observed multi-index with its value, as read from input.
struct RawObservation {
  std::vector<Index> multi_index;
  double value = 0.0;
};

/// The q observed entries with cached Khatri-Rao rows and a partition by
/// mode-k slice. This is the only representation of the selection matrix S
/// and of the zero-filled unfolding T; neither is ever materialized.
/// Immutable after construction.
class ObservationSet {
public:
  const Shape& shape() const { return shape_; }
  Index q() const { return static_cast<Index>(entries_.size()); }
  Index rank() const { return cached_rows_.cols(); }

  const std::vector<ObservationEntry>& entries() const { return entries_; }
  /// q x r matrix Z_Omega; row m is z^(m).
  const Eigen::MatrixXd& cached_rows() const { return cached_rows_; }
  /// Entry positions m with i_m = i, in insertion order.
  const std::vector<Index>& slice(Index i) const {
    return slice_index_[static_cast<std::size_t>(i)];
  }

  /// Verification hook: additively disturb the first cached row. Used as a
  /// negative control to prove the equivalence checks can fail.
  void perturb_first_cached_row(double eps);

  friend ObservationSet build_observation_set(const Shape& shape, const FactorSet& factors,
                                              std::span<const RawObservation> raw);

private:
  ObservationSet(Shape shape, std::vector<ObservationEntry> entries,
                 Eigen::MatrixXd cached_rows, std::vector<std::vector<Index>> slice_index);

  Shape shape_;
  std::vector<ObservationEntry> entries_;
  Eigen::MatrixXd cached_rows_;
  std::vector<std::vector<Index>> slice_index_;
};

/// Row `col` of the Khatri-Rao product Z: the Hadamard product of the factor
/// rows addressed by the multi-index of `col` under the unfolding convention.
/// Cost O(d r).
Eigen::RowVectorXd kr_row(const FactorSet& factors, const Shape& shape, Index col);

/// Convert raw observations to unfolding coordinates, cache their Khatri-Rao
/// rows (O(q d r)), and partition them by slice. Duplicate multi-indices are
/// rejected: S is a subset of identity columns.
ObservationSet build_observation_set(const Shape& shape, const FactorSet& factors,
                                     std::span<const RawObservation> raw);

/// Sparse MTTKRP: B with B_{i,:} = sum_{m in Omega_i} y_m z^(m). Equals T Z
/// because the missing entries of T are zero. Cost O(q r).
Eigen::MatrixXd sparse_mttkrp(const ObservationSet& obs);

}  // namespace rkcp
