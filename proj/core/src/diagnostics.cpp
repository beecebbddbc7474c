#include "rkcp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rkcp/io.hpp"

namespace rkcp {

SolverKind solver_kind_from_name(std::string_view name) {
  if (name == "dense") return SolverKind::Dense;
  if (name == "jacobi-onfly") return SolverKind::JacobiOnFly;
  if (name == "block-preagg") return SolverKind::BlockPreAgg;
  if (name == "inverse-free") return SolverKind::InverseFree;
  throw ValidationError("unknown solver '" + std::string(name) +
                        "' (expected dense, jacobi-onfly, block-preagg or inverse-free)");
}

std::string_view solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Dense: return "dense";
    case SolverKind::JacobiOnFly: return "jacobi-onfly";
    case SolverKind::BlockPreAgg: return "block-preagg";
    case SolverKind::InverseFree: return "inverse-free";
  }
  return "dense";
}

SolveReport run_solver(const ProblemInstance& p, SolverKind kind, const SolveConfig& cfg) {
  switch (kind) {
    case SolverKind::Dense: return solve_dense(p, cfg);
    case SolverKind::JacobiOnFly:
      return pcg_standard(p, MvpKind::OnFly, PrecondKind::Jacobi, cfg);
    case SolverKind::BlockPreAgg:
      return pcg_standard(p, MvpKind::PreAggregated, PrecondKind::BlockJacobi, cfg);
    case SolverKind::InverseFree: return pcg_inverse_free(p, cfg);
  }
  throw ValidationError("unknown solver kind");
}

ScalingReport sweep(const GenSpec& base, char variable, const std::vector<Index>& values,
                    const std::vector<SolverKind>& configs, int iters) {
  if (variable != 'q' && variable != 'n' && variable != 'r') {
    throw ValidationError("sweep variable must be one of q, n, r");
  }
  if (iters < 1) throw ValidationError("sweep needs iters >= 1");
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  if (configs.empty()) throw ValidationError("sweep needs at least one configuration");
  for (const SolverKind kind : configs) {
    if (kind == SolverKind::Dense) {
      throw ValidationError("sweep measures iterative configurations; dense has no "
                            "per-iteration cost");
    }
  }

  std::vector<Index> ordered = values;
  std::sort(ordered.begin(), ordered.end());

  ScalingReport report;
  report.sweep_variable = variable;
  report.iters_per_point = iters;
  for (const Index value : ordered) {
    GenSpec spec = base;
    if (variable == 'q') spec.q = value;
    if (variable == 'n') spec.dims[static_cast<std::size_t>(spec.mode)] = value;
    if (variable == 'r') spec.rank = value;
    const GeneratedInstance gen = generate(spec);

    for (const SolverKind kind : configs) {
      SolveConfig cfg;
      cfg.forced_iterations = iters;
      const SolveReport solve = run_solver(gen.instance, kind, cfg);
      ScalingPoint point;
      point.value = value;
      point.n = gen.instance.n();
      point.r = gen.instance.r();
      point.q = gen.instance.q();
      point.config = kind;
      point.setup_flops = solve.flops.setup();
      point.per_iter_flops = solve.flops.iteration_total() / static_cast<std::uint64_t>(iters);
      point.setup_seconds = solve.seconds.setup;
      point.per_iter_seconds = solve.seconds.solve / iters;
      report.points.push_back(point);
    }
  }
  return report;
}

CostFit fit_cost_model(const std::vector<ScalingPoint>& points,
                       const std::vector<CostTerm>& model) {
  const Index rows = static_cast<Index>(points.size());
  const Index cols = static_cast<Index>(model.size());
  if (cols < 1) throw ValidationError("cost model needs at least one term");
  if (rows < cols) {
    throw DiagnosticError("cost fit needs at least " + std::to_string(cols) +
                          " points, got " + std::to_string(rows));
  }
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (Index i = 0; i < rows; ++i) {
    const ScalingPoint& p = points[static_cast<std::size_t>(i)];
    for (Index t = 0; t < cols; ++t) {
      const CostTerm& term = model[static_cast<std::size_t>(t)];
      design(i, t) = std::pow(static_cast<double>(p.n), term.n_exp) *
                     std::pow(static_cast<double>(p.r), term.r_exp) *
                     std::pow(static_cast<double>(p.q), term.q_exp);
    }
    target(i) = static_cast<double>(p.per_iter_flops);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    throw DiagnosticError("rank-deficient cost-model design (rank " +
                          std::to_string(qr.rank()) + " of " + std::to_string(cols) + ")");
  }
  CostFit fit;
  fit.coefficients = qr.solve(target);
  const double target_norm = target.norm();
  fit.relative_residual =
      target_norm > 0.0 ? (design * fit.coefficients - target).norm() / target_norm : 0.0;
  return fit;
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  out << "variable,value,config,setup_flops,iter_flops,setup_s,iter_s\n";
  for (const ScalingPoint& p : report.points) {
    out << report.sweep_variable << "," << p.value << "," << solver_kind_name(p.config)
        << "," << p.setup_flops << "," << p.per_iter_flops << ","
        << format_g17(p.setup_seconds) << "," << format_g17(p.per_iter_seconds) << "\n";
  }
}

}  // namespace rkcp
