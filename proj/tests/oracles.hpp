// Independent brute-force references used to freeze expected values. These
// deliberately re-derive everything from first principles (their own
// mixed-radix decoding, explicit Khatri-Rao and Kronecker materialization)
// and never call the code paths they check.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rkcp/indexing.hpp"
#include "rkcp/observations.hpp"

namespace oracles {

using rkcp::Index;

// Multi-index of `cell` with axis 0 fastest, all d axes.
inline std::vector<Index> decode_full(const std::vector<Index>& dims, Index cell) {
  std::vector<Index> multi(dims.size());
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    multi[axis] = cell % dims[axis];
    cell /= dims[axis];
  }
  return multi;
}

// Column index of a multi-index in the mode-k unfolding: ascending non-k
// axes, axis strides grown left to right.
inline Index unfold_col(const std::vector<Index>& dims, int mode,
                        const std::vector<Index>& multi) {
  Index col = 0;
  Index stride = 1;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    if (static_cast<int>(axis) == mode) continue;
    col += multi[axis] * stride;
    stride *= dims[axis];
  }
  return col;
}

// Full M x r Khatri-Rao product of the non-k factors, materialized row by
// row with explicit Hadamard products.
inline Eigen::MatrixXd full_khatri_rao(const std::vector<Eigen::MatrixXd>& factors,
                                       const std::vector<Index>& dims, int mode) {
  Index m_rows = 1;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    if (static_cast<int>(axis) != mode) m_rows *= dims[axis];
  }
  const Index rank = factors.front().cols();
  Eigen::MatrixXd z(m_rows, rank);
  for (Index row = 0; row < m_rows; ++row) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Ones(rank);
    Index rest = row;
    std::size_t position = 0;
    for (std::size_t axis = 0; axis < dims.size(); ++axis) {
      if (static_cast<int>(axis) == mode) continue;
      const Index idx = rest % dims[axis];
      rest /= dims[axis];
      acc = acc.cwiseProduct(factors[position].row(idx));
      ++position;
    }
    z.row(row) = acc;
  }
  return z;
}

// Zero-filled mode-k unfolding with the observed values scattered in.
inline Eigen::MatrixXd full_unfolding(const std::vector<Index>& dims, int mode, Index n,
                                      Index m_cols,
                                      const std::vector<rkcp::RawObservation>& raw) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, m_cols);
  for (const rkcp::RawObservation& obs : raw) {
    t(obs.multi_index[static_cast<std::size_t>(mode)], unfold_col(dims, mode, obs.multi_index)) =
        obs.value;
  }
  return t;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// N x q selection matrix picking the observed cells of vec(T).
inline Eigen::MatrixXd selection_matrix(Index n, Index big_n,
                                        const std::vector<Index>& dims, int mode,
                                        const std::vector<rkcp::RawObservation>& raw) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(big_n, static_cast<Index>(raw.size()));
  for (std::size_t m = 0; m < raw.size(); ++m) {
    const Index row = raw[m].multi_index[static_cast<std::size_t>(mode)];
    const Index col = unfold_col(dims, mode, raw[m].multi_index);
    s(row + col * n, static_cast<Index>(m)) = 1.0;
  }
  return s;
}

inline double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  const double scale = std::max(got.norm(), want.norm());
  return scale > 0.0 ? (got - want).norm() / scale : 0.0;
}

}  // namespace oracles
