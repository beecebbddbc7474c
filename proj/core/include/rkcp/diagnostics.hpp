#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "rkcp/problemgen.hpp"
#include "rkcp/solvers.hpp"

namespace rkcp {

/// Named solver configurations; the iterative ones pair MVP and
/// preconditioner the way the two approaches do.
enum class SolverKind { Dense, JacobiOnFly, BlockPreAgg, InverseFree };

SolverKind solver_kind_from_name(std::string_view name);
std::string_view solver_kind_name(SolverKind kind);

/// Run one named solver configuration on an instance.
SolveReport run_solver(const ProblemInstance& p, SolverKind kind, const SolveConfig& cfg);

/// One measured sweep point. Flop columns are exact and deterministic; the
/// full (n, r, q) triple is kept so cost models can be fit across sweeps.
struct ScalingPoint {
  Index value = 0;  // the swept variable's value
  Index n = 0, r = 0, q = 0;
  SolverKind config = SolverKind::JacobiOnFly;
  std::uint64_t setup_flops = 0;
  std::uint64_t per_iter_flops = 0;
  double setup_seconds = 0.0;
  double per_iter_seconds = 0.0;
};

struct ScalingReport {
  char sweep_variable = 'q';  // one of q, n, r
  int iters_per_point = 0;
  std::vector<ScalingPoint> points;  // ascending in value, grouped per config
};

/// For each value of the swept variable, regenerate the base instance (same
/// seed policy) and run each configuration for a fixed number of iterations
/// with no convergence exit, isolating per-iteration cost from preconditioner
/// quality. Flop columns are exact counters; seconds are informational.
ScalingReport sweep(const GenSpec& base, char variable, const std::vector<Index>& values,
                    const std::vector<SolverKind>& configs, int iters = 10);

/// One monomial n^a r^b q^c of a symbolic cost model.
struct CostTerm {
  int n_exp = 0;
  int r_exp = 0;
  int q_exp = 0;
};

struct CostFit {
  Eigen::VectorXd coefficients;  // one per term
  double relative_residual = 0.0;
};

/// Least-squares fit of per-iteration counters to the model's monomials.
/// Throws DiagnosticError on a rank-deficient design. Counters are exact
/// polynomials in the sizes, so a correct model fits to ~1e-16.
CostFit fit_cost_model(const std::vector<ScalingPoint>& points,
                       const std::vector<CostTerm>& model);

/// CSV with header `variable,value,config,setup_flops,iter_flops,setup_s,iter_s`.
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

}  // namespace rkcp
