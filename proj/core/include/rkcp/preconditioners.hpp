#pragma once

#include <Eigen/Dense>

#include "rkcp/operators.hpp"

namespace rkcp {

/// Exact diagonal of H reshaped to n x r, every entry strictly positive.
struct JacobiDiag {
  Eigen::MatrixXd diag;
};

/// Lower-triangular factors L_i with L_i L_i^T = M^(i), the exact i-th
/// r x r diagonal block of H (principal submatrix on {i + c n : c in [0, r)}).
struct BlockJacobi {
  std::vector<Eigen::MatrixXd> factors;
};

/// Diagonal of H without forming it:
///   D = Ktilde (Omega Ztilde) + lambda diag(K) 1_r^T,  Ktilde = K o K,
/// where row i of (Omega Ztilde) = sum_{m in Omega_i} z^(m) o z^(m), computed
/// by squaring cached rows on demand. One-time cost O(q r + n^2 r). Throws
/// PrecondSingularError if any entry is <= 0 (possible only at lambda = 0
/// with an empty slice).
JacobiDiag build_jacobi_diag(const ProblemInstance& p, FlopCounter* counter = nullptr);

/// Entrywise R / D. O(n r).
Eigen::MatrixXd apply_jacobi(const JacobiDiag& jacobi, const Eigen::MatrixXd& r,
                             FlopCounter* counter = nullptr, Phase phase = Phase::Precond);

/// Assemble and factor the blocks
///   M^(i) = sum_l Ktilde_{i,l} E^(l) + lambda K_{i,i} I_r
/// by contracting Ktilde against the Grams stacked as an n x r^2 matrix
/// (O(n^2 r^2)), then Cholesky-factoring each (O(n r^3)). Blocks are PD for
/// lambda > 0; a failed factorization names its slice.
BlockJacobi build_block_jacobi(const ProblemInstance& p, const SliceGrams& grams,
                               FlopCounter* counter = nullptr);

/// Per row i, solve L_i L_i^T x = R[i,:]^T. O(n r^2).
Eigen::MatrixXd apply_block_jacobi(const BlockJacobi& blocks, const Eigen::MatrixXd& r,
                                   FlopCounter* counter = nullptr,
                                   Phase phase = Phase::Precond);

}  // namespace rkcp
