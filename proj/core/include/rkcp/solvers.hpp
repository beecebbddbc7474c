#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rkcp/operators.hpp"
#include "rkcp/preconditioners.hpp"

namespace rkcp {

enum class MvpKind { Dense, OnFly, PreAggregated };
enum class PrecondKind { Identity, Jacobi, BlockJacobi };

struct SolveConfig {
  double tol = 1e-10;        // on the relative residual ||R_k||_F / ||C||_F
  int max_iters = 0;         // 0 -> 10 n r
  int refresh_interval = 50; // inverse-free tracking refresh period
  double breakdown_eps = 1e-14;  // relative curvature threshold
  int forced_iterations = 0; // > 0: run exactly this many, no convergence exit
  bool record_iterates = false;
  Index oracle_cap = kDefaultOracleCap;  // dense paths only
};

/// Tracking error measured around one refresh of the inverse-free solver:
/// ||V_k - K D_k||_F / ||K D_k||_F just before and just after recomputing.
struct RefreshDrift {
  int iteration = 0;
  double before = 0.0;
  double after = 0.0;
};

struct PhaseSeconds {
  double setup = 0.0;
  double solve = 0.0;
};

struct SolveReport {
  Eigen::MatrixXd weights;  // W, n x r
  int iterations = 0;
  std::vector<double> residual_history;  // ||R_k||_F / ||C||_F, starting at k = 0
  bool converged = false;
  FlopCounter flops;
  PhaseSeconds seconds;
  std::vector<Eigen::MatrixXd> iterates;     // when record_iterates is set
  std::vector<RefreshDrift> refresh_drift;   // inverse-free only
};

/// Ground-truth baseline: assemble H densely and solve by a symmetric
/// positive-definite factorization, the O(n^3 r^3) route the iterative
/// solvers are measured against. Requires lambda > 0 and n*r within the
/// oracle cap.
SolveReport solve_dense(const ProblemInstance& p, const SolveConfig& cfg = {});

/// Standard PCG on W-shaped iterates with pluggable MVP and preconditioner.
/// All inner products are Frobenius traces. Per iteration:
///   V = MVP(P_k); alpha = tr(R_k^T Z_k) / tr(P_k^T V);
///   W, R updates; Z_{k+1} = precond(R_{k+1});
///   beta = tr(R_{k+1}^T Z_{k+1}) / tr(R_k^T Z_k); P update.
/// Breakdown when |tr(P^T V)| < breakdown_eps * ||P||_F^2. Non-convergence
/// within max_iters is a reported outcome, not an error. Requires lambda > 0.
SolveReport pcg_standard(const ProblemInstance& p, MvpKind mvp, PrecondKind precond,
                         const SolveConfig& cfg = {});

/// Kernel-preconditioned PCG with P = I_r (x) K applied inverse-free. Using
/// H = P H_red P + lambda P, residuals stay in the range of P, so tracking
/// the pseudo-residual Z_k (with r_k = P vec(Z_k)) cancels P^{-1} exactly.
/// Tracked state: Z_k, direction D_k, Ztilde_k = K Z_k (the true residual of
/// the system) and V_k = K D_k; one dense kernel multiply per iteration
/// (M_k = K U_k). Every refresh_interval iterations Ztilde and V are
/// recomputed from scratch to clear floating-point drift. Convergence is
/// tested on ||Ztilde_k||_F / ||C||_F, which is exactly the relative residual
/// of the original system. Requires lambda > 0.
SolveReport pcg_inverse_free(const ProblemInstance& p, const SolveConfig& cfg = {});

struct ConditionCheck {
  double kappa_actual = 0.0;
  double kappa_bound = 0.0;
};

/// Eigenvalue check of the kernel-preconditioned operator
///   K^{1/2}-conjugated H_red + lambda I,
/// against the bound kappa <= 1 + lam_max(H_red) lam_max(K) / lambda.
/// H_red is materialized through mvp_reduced on basis vectors; requires
/// n*r within the oracle cap and lambda > 0.
ConditionCheck condition_bound_check(const ProblemInstance& p,
                                     Index oracle_cap = kDefaultOracleCap);

}  // namespace rkcp
