#include "rkcp/observations.hpp"

#include <string>
#include <unordered_set>

namespace rkcp {

FactorSet::FactorSet(std::vector<Eigen::MatrixXd> factors, Index rank)
    : factors_(std::move(factors)), rank_(rank) {}

FactorSet FactorSet::create(std::vector<Eigen::MatrixXd> factors, const Shape& shape) {
  const int d = shape.order();
  if (static_cast<int>(factors.size()) != d - 1) {
    throw ValidationError("expected " + std::to_string(d - 1) + " factor matrices, got " +
                          std::to_string(factors.size()));
  }
  Index rank = -1;
  std::size_t position = 0;
  for (int axis = 0; axis < d; ++axis) {
    if (axis == shape.mode()) continue;
    const Eigen::MatrixXd& f = factors[position];
    if (rank < 0) rank = f.cols();
    if (f.cols() != rank) {
      throw ValidationError("factor for mode " + std::to_string(axis) +
                            " has rank " + std::to_string(f.cols()) +
                            ", expected " + std::to_string(rank));
    }
    if (f.rows() != shape.extent(axis)) {
      throw ValidationError("factor for mode " + std::to_string(axis) + " has " +
                            std::to_string(f.rows()) + " rows, shape wants " +
                            std::to_string(shape.extent(axis)));
    }
    ++position;
  }
  if (rank < 1) throw ValidationError("factor rank must be >= 1");
  return FactorSet(std::move(factors), rank);
}

Eigen::RowVectorXd kr_row(const FactorSet& factors, const Shape& shape, Index col) {
  if (col < 0 || col >= shape.complement_size()) {
    throw IndexError("Khatri-Rao row " + std::to_string(col) + " outside [0, " +
                     std::to_string(shape.complement_size()) + ")");
  }
  Eigen::RowVectorXd z = Eigen::RowVectorXd::Ones(factors.rank());
  Index rest = col;
  std::size_t position = 0;
  for (int axis = 0; axis < shape.order(); ++axis) {
    if (axis == shape.mode()) continue;
    const Index idx = rest % shape.extent(axis);
    rest /= shape.extent(axis);
    z = z.cwiseProduct(factors.factor(position).row(idx));
    ++position;
  }
  return z;
}

ObservationSet::ObservationSet(Shape shape, std::vector<ObservationEntry> entries,
                               Eigen::MatrixXd cached_rows,
                               std::vector<std::vector<Index>> slice_index)
    : shape_(std::move(shape)),
      entries_(std::move(entries)),
      cached_rows_(std::move(cached_rows)),
      slice_index_(std::move(slice_index)) {}

void ObservationSet::perturb_first_cached_row(double eps) {
  if (cached_rows_.size() > 0) cached_rows_(0, 0) += eps;
}

ObservationSet build_observation_set(const Shape& shape, const FactorSet& factors,
                                     std::span<const RawObservation> raw) {
  const Index n = shape.mode_size();
  const Index r = factors.rank();
  const Index q = static_cast<Index>(raw.size());

  std::vector<ObservationEntry> entries;
  entries.reserve(raw.size());
  Eigen::MatrixXd cached(q, r);
  std::vector<std::vector<Index>> slices(static_cast<std::size_t>(n));
  std::unordered_set<Index> seen;
  seen.reserve(raw.size());

  for (Index m = 0; m < q; ++m) {
    const RawObservation& obs = raw[static_cast<std::size_t>(m)];
    const ModeKCoordinate coord = mode_k_coords(shape, obs.multi_index);
    const Index cell = vec_index(n, coord.row, coord.col);
    if (!seen.insert(cell).second) {
      std::string idx;
      for (std::size_t a = 0; a < obs.multi_index.size(); ++a) {
        idx += (a ? "," : "") + std::to_string(obs.multi_index[a]);
      }
      throw ValidationError("duplicate observation at (" + idx + ")");
    }
    entries.push_back({coord.row, coord.col, obs.value});
    cached.row(m) = kr_row(factors, shape, coord.col);
    slices[static_cast<std::size_t>(coord.row)].push_back(m);
  }
  return ObservationSet(shape, std::move(entries), std::move(cached), std::move(slices));
}

Eigen::MatrixXd sparse_mttkrp(const ObservationSet& obs) {
  const Index n = obs.shape().mode_size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, obs.rank());
  for (Index i = 0; i < n; ++i) {
    for (const Index m : obs.slice(i)) {
      b.row(i) += obs.entries()[static_cast<std::size_t>(m)].value * obs.cached_rows().row(m);
    }
  }
  return b;
}

}  // namespace rkcp
