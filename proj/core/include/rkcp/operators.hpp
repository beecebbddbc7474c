#pragma once

#include <Eigen/Dense>

#include "rkcp/flops.hpp"
#include "rkcp/kernel.hpp"
#include "rkcp/observations.hpp"

namespace rkcp {

inline constexpr Index kDefaultOracleCap = 400;  // max n*r for dense paths

/// Everything the mode-k subproblem needs: the system
///   H vec(W) = vec(K B),   H = (Z (x) K)^T S S^T (Z (x) K) + lambda (I_r (x) K)
/// under column-major vec, with W treated as an n x r matrix throughout.
struct ProblemInstance {
  Shape shape;
  ObservationSet obs;
  FactorSet factors;
  KernelMatrix kernel;
  double lambda = 0.0;
  Eigen::MatrixXd mttkrp;  // B = T Z, accumulated sparsely

  Index n() const { return shape.mode_size(); }
  Index r() const { return factors.rank(); }
  Index q() const { return obs.q(); }

  /// Validates dimensional consistency and lambda >= 0; computes B.
  static ProblemInstance create(Shape shape, ObservationSet obs, FactorSet factors,
                                KernelMatrix kernel, double lambda);
};

/// The n pre-aggregated r x r slice Gram matrices
///   E^(i) = sum_{m in Omega_i} z^(m) (z^(m))^T,
/// which carry all missing-data geometry the iteration loop needs.
struct SliceGrams {
  std::vector<Eigen::MatrixXd> grams;

  const Eigen::MatrixXd& operator[](Index i) const {
    return grams[static_cast<std::size_t>(i)];
  }
  Index size() const { return static_cast<Index>(grams.size()); }
};

/// Dense oracle: assemble H explicitly from observation outer products
///   H = sum_m g_m g_m^T + lambda (I_r (x) K),  g_m = z^(m) (x) K[i_m,:]^T,
/// (row i_m + j_m n of Z (x) K is Z[j_m,:] (x) K[i_m,:] under column-major
/// vec). O(q n^2 r^2) time; Z is never materialized. Throws OracleScaleError
/// when n*r exceeds `oracle_cap`.
Eigen::MatrixXd build_dense_hessian(const ProblemInstance& p, FlopCounter* counter = nullptr,
                                    Index oracle_cap = kDefaultOracleCap);

/// Oracle application: unvec(H vec(V)).
Eigen::MatrixXd mvp_dense(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& v,
                          FlopCounter* counter = nullptr);

/// On-the-fly MVP: U = K V; e_m = <U[i_m,:], z^(m)>; P accumulated per slice
/// from e_m z^(m); returns K P + lambda U. O(q r + n^2 r) per call.
/// Summation order is fixed: ascending slice, insertion order within a slice.
Eigen::MatrixXd mvp_onfly(const ProblemInstance& p, const Eigen::MatrixXd& v,
                          FlopCounter* counter = nullptr);

/// Accumulate the slice Grams. Setup cost O(q r^2); empty slices give zero.
SliceGrams build_slice_grams(const ObservationSet& obs, FlopCounter* counter = nullptr);

/// Pre-aggregated MVP: U = K V; Y[i,:] = U[i,:] E^(i); returns K Y + lambda U.
/// O(n^2 r + n r^2) per call, independent of q.
Eigen::MatrixXd mvp_preaggregated(const ProblemInstance& p, const SliceGrams& grams,
                                  const Eigen::MatrixXd& v, FlopCounter* counter = nullptr);

/// Data-only reduced operator H_red (no kernel multiplications, no lambda):
/// e_m = <V[i_m,:], z^(m)>; U[i,:] = sum_{m: i_m = i} e_m z^(m). O(q r).
/// The full operator factors as H = P H_red P + lambda P with P = I_r (x) K.
Eigen::MatrixXd mvp_reduced(const ProblemInstance& p, const Eigen::MatrixXd& v,
                            FlopCounter* counter = nullptr);

/// Right-hand side C = K B, using (Z (x) K)^T vec(T) = vec(K T Z) = vec(K B).
Eigen::MatrixXd build_rhs(const ProblemInstance& p, FlopCounter* counter = nullptr);

}  // namespace rkcp
