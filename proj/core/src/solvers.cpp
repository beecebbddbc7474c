#include "rkcp/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

namespace rkcp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double frob_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.cwiseProduct(b).sum();
}

void validate_solve(const ProblemInstance& p, const SolveConfig& cfg) {
  if (!(p.lambda > 0.0)) {
    throw ValidationError("solvers require lambda > 0 (the system may be singular for a "
                          "semi-definite kernel); operators accept lambda = 0");
  }
  if (!(cfg.tol > 0.0) || cfg.tol >= 1.0) {
    throw ValidationError("tol must be in (0, 1), got " + std::to_string(cfg.tol));
  }
  if (cfg.refresh_interval < 1) {
    throw ValidationError("refresh_interval must be >= 1");
  }
  if (!(cfg.breakdown_eps > 0.0)) {
    throw ValidationError("breakdown_eps must be positive");
  }
}

int iteration_limit(const ProblemInstance& p, const SolveConfig& cfg) {
  if (cfg.forced_iterations > 0) return cfg.forced_iterations;
  if (cfg.max_iters > 0) return cfg.max_iters;
  return static_cast<int>(10 * p.n() * p.r());
}

}  // namespace

SolveReport solve_dense(const ProblemInstance& p, const SolveConfig& cfg) {
  validate_solve(p, cfg);
  SolveReport rep;
  const Index dim = p.n() * p.r();
  const auto udim = static_cast<std::uint64_t>(dim);

  const auto t_setup = Clock::now();
  const Eigen::MatrixXd hessian = build_dense_hessian(p, &rep.flops, cfg.oracle_cap);
  const Eigen::MatrixXd c = build_rhs(p, &rep.flops);
  rep.seconds.setup = seconds_since(t_setup);

  const auto t_solve = Clock::now();
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() != Eigen::Success) {
    throw SingularSystemError("dense system factorization failed (H not positive definite)");
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(c.data(), dim);
  Eigen::VectorXd w = llt.solve(rhs);
  rep.flops.add(Phase::Iteration,
                udim * (udim + 1) * (udim + 2) / 6 + 2 * udim * udim);

  const double norm_c = rhs.norm();
  const Eigen::VectorXd residual = rhs - hessian * w;
  rep.flops.add(Phase::Iteration, udim * udim + udim);
  const double rel = norm_c > 0.0 ? residual.norm() / norm_c : 0.0;
  rep.seconds.solve = seconds_since(t_solve);

  rep.weights = Eigen::Map<const Eigen::MatrixXd>(w.data(), p.n(), p.r());
  rep.iterations = 1;
  rep.residual_history = {rel};
  rep.converged = rel <= cfg.tol;
  return rep;
}

SolveReport pcg_standard(const ProblemInstance& p, MvpKind mvp, PrecondKind precond,
                         const SolveConfig& cfg) {
  validate_solve(p, cfg);
  SolveReport rep;
  FlopCounter& counter = rep.flops;
  const Index n = p.n();
  const Index r = p.r();
  const auto nr = static_cast<std::uint64_t>(n * r);

  const auto t_setup = Clock::now();
  const Eigen::MatrixXd c = build_rhs(p, &counter);

  std::optional<Eigen::MatrixXd> hessian;
  std::optional<SliceGrams> grams;
  std::optional<JacobiDiag> jacobi;
  std::optional<BlockJacobi> blocks;
  if (mvp == MvpKind::Dense) hessian = build_dense_hessian(p, &counter, cfg.oracle_cap);
  if (mvp == MvpKind::PreAggregated || precond == PrecondKind::BlockJacobi) {
    grams = build_slice_grams(p.obs, &counter);
  }
  if (precond == PrecondKind::Jacobi) jacobi = build_jacobi_diag(p, &counter);
  if (precond == PrecondKind::BlockJacobi) blocks = build_block_jacobi(p, *grams, &counter);

  auto apply_mvp = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    switch (mvp) {
      case MvpKind::Dense: return mvp_dense(*hessian, v, &counter);
      case MvpKind::OnFly: return mvp_onfly(p, v, &counter);
      case MvpKind::PreAggregated: return mvp_preaggregated(p, *grams, v, &counter);
    }
    throw ValidationError("unknown MVP kind");
  };
  auto apply_precond = [&](const Eigen::MatrixXd& res, Phase phase) -> Eigen::MatrixXd {
    switch (precond) {
      case PrecondKind::Identity: return res;
      case PrecondKind::Jacobi: return apply_jacobi(*jacobi, res, &counter, phase);
      case PrecondKind::BlockJacobi: return apply_block_jacobi(*blocks, res, &counter, phase);
    }
    throw ValidationError("unknown preconditioner kind");
  };

  rep.weights = Eigen::MatrixXd::Zero(n, r);
  if (cfg.record_iterates) rep.iterates.push_back(rep.weights);
  const double norm_c = c.norm();
  counter.add(Phase::Setup, nr);
  if (norm_c == 0.0) {
    rep.converged = true;
    rep.residual_history = {0.0};
    rep.seconds.setup = seconds_since(t_setup);
    return rep;
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, r);
  Eigen::MatrixXd res = c;
  Eigen::MatrixXd z = apply_precond(res, Phase::Setup);
  Eigen::MatrixXd dir = z;
  double rho = frob_dot(res, z);
  counter.add(Phase::Setup, nr);
  rep.residual_history.push_back(1.0);
  rep.seconds.setup = seconds_since(t_setup);

  const auto t_solve = Clock::now();
  const bool forced = cfg.forced_iterations > 0;
  const int limit = iteration_limit(p, cfg);
  for (int it = 1; it <= limit; ++it) {
    const Eigen::MatrixXd v = apply_mvp(dir);
    const double denom = frob_dot(dir, v);
    counter.add(Phase::Iteration, nr);
    const double dir_norm2 = dir.squaredNorm();
    counter.add(Phase::Iteration, nr);
    if (std::abs(denom) < cfg.breakdown_eps * dir_norm2) {
      throw BreakdownError("PCG breakdown at iteration " + std::to_string(it) +
                               ": curvature " + std::to_string(denom),
                           it);
    }
    const double alpha = rho / denom;
    w += alpha * dir;
    counter.add(Phase::Iteration, nr);
    res -= alpha * v;
    counter.add(Phase::Iteration, nr);
    const double rel = std::sqrt(res.squaredNorm()) / norm_c;
    counter.add(Phase::Iteration, nr);
    rep.residual_history.push_back(rel);
    rep.iterations = it;
    if (cfg.record_iterates) rep.iterates.push_back(w);
    if (!forced) {
      if (rel <= cfg.tol) {
        rep.converged = true;
        break;
      }
      if (it == limit) break;
    } else if (it == limit) {
      rep.converged = rel <= cfg.tol;
    }
    const Eigen::MatrixXd z_next = apply_precond(res, Phase::Precond);
    const double rho_next = frob_dot(res, z_next);
    counter.add(Phase::Iteration, nr);
    const double beta = rho_next / rho;
    rho = rho_next;
    dir = z_next + beta * dir;
    counter.add(Phase::Iteration, nr);
  }
  rep.weights = w;
  rep.seconds.solve = seconds_since(t_solve);
  return rep;
}

SolveReport pcg_inverse_free(const ProblemInstance& p, const SolveConfig& cfg) {
  validate_solve(p, cfg);
  SolveReport rep;
  FlopCounter& counter = rep.flops;
  const Index n = p.n();
  const Index r = p.r();
  const auto nr = static_cast<std::uint64_t>(n * r);
  const auto n2r = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) *
                   static_cast<std::uint64_t>(r);
  const Eigen::MatrixXd& kernel = p.kernel.values();
  const double lambda = p.lambda;

  const auto t_setup = Clock::now();
  // C = K B doubles as Ztilde_0; one gemm covers both.
  const Eigen::MatrixXd c = build_rhs(p, &counter);

  rep.weights = Eigen::MatrixXd::Zero(n, r);
  if (cfg.record_iterates) rep.iterates.push_back(rep.weights);
  const double norm_c = c.norm();
  counter.add(Phase::Setup, nr);
  if (norm_c == 0.0) {
    rep.converged = true;
    rep.residual_history = {0.0};
    rep.seconds.setup = seconds_since(t_setup);
    return rep;
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, r);
  Eigen::MatrixXd z = p.mttkrp;       // pseudo-residual, r_k = P vec(Z_k)
  Eigen::MatrixXd dir = p.mttkrp;     // D_k
  Eigen::MatrixXd zt = c;             // Ztilde_k = K Z_k, the true residual
  Eigen::MatrixXd v = c;              // V_k = K D_k
  double rho = frob_dot(z, zt);
  counter.add(Phase::Setup, nr);
  rep.residual_history.push_back(1.0);
  rep.seconds.setup = seconds_since(t_setup);

  const auto t_solve = Clock::now();
  const bool forced = cfg.forced_iterations > 0;
  const int limit = iteration_limit(p, cfg);
  for (int it = 1; it <= limit; ++it) {
    const int k = it - 1;
    if (k > 0 && k % cfg.refresh_interval == 0) {
      // Recompute the tracked products from scratch to clear drift. The
      // drift measurements themselves are instrumentation and uncounted.
      Eigen::MatrixXd kd = kernel * dir;
      counter.add(Phase::Mvp, n2r);
      const double kd_norm = kd.norm();
      RefreshDrift drift;
      drift.iteration = k;
      drift.before = kd_norm > 0.0 ? (v - kd).norm() / kd_norm : 0.0;
      v = std::move(kd);
      zt.noalias() = kernel * z;
      counter.add(Phase::Mvp, n2r);
      rho = frob_dot(z, zt);
      counter.add(Phase::Iteration, nr);
      const Eigen::MatrixXd kd_check = kernel * dir;
      const double check_norm = kd_check.norm();
      drift.after = check_norm > 0.0 ? (v - kd_check).norm() / check_norm : 0.0;
      rep.refresh_drift.push_back(drift);
    }

    const Eigen::MatrixXd u = mvp_reduced(p, v, &counter);
    Eigen::MatrixXd qdir = u + lambda * dir;
    counter.add(Phase::Iteration, nr);
    const double denom = frob_dot(v, qdir);
    counter.add(Phase::Iteration, nr);
    const double dir_norm2 = dir.squaredNorm();
    counter.add(Phase::Iteration, nr);
    if (std::abs(denom) < cfg.breakdown_eps * dir_norm2) {
      throw BreakdownError("inverse-free PCG breakdown at iteration " + std::to_string(it) +
                               ": curvature " + std::to_string(denom),
                           it);
    }
    const double alpha = rho / denom;
    w += alpha * dir;
    counter.add(Phase::Iteration, nr);
    z -= alpha * qdir;
    counter.add(Phase::Iteration, nr);
    Eigen::MatrixXd m = kernel * u;  // the single dense kernel multiply
    counter.add(Phase::Mvp, n2r);
    zt -= alpha * (m + lambda * v);
    counter.add(Phase::Iteration, 2 * nr);
    const double rel = std::sqrt(zt.squaredNorm()) / norm_c;
    counter.add(Phase::Iteration, nr);
    rep.residual_history.push_back(rel);
    rep.iterations = it;
    if (cfg.record_iterates) rep.iterates.push_back(w);
    if (!forced) {
      if (rel <= cfg.tol) {
        rep.converged = true;
        break;
      }
      if (it == limit) break;
    } else if (it == limit) {
      rep.converged = rel <= cfg.tol;
    }
    const double rho_next = frob_dot(z, zt);
    counter.add(Phase::Iteration, nr);
    const double beta = rho_next / rho;
    rho = rho_next;
    dir = z + beta * dir;
    counter.add(Phase::Iteration, nr);
    v = zt + beta * v;
    counter.add(Phase::Iteration, nr);
  }
  rep.weights = w;
  rep.seconds.solve = seconds_since(t_solve);
  return rep;
}

ConditionCheck condition_bound_check(const ProblemInstance& p, Index oracle_cap) {
  if (!(p.lambda > 0.0)) {
    throw ValidationError("condition_bound_check requires lambda > 0");
  }
  const Index n = p.n();
  const Index r = p.r();
  const Index dim = n * r;
  if (dim > oracle_cap) {
    throw OracleScaleError("condition_bound_check needs n*r <= " +
                           std::to_string(oracle_cap) + ", got " + std::to_string(dim));
  }

  // Materialize H_red through the reduced MVP on basis matrices.
  Eigen::MatrixXd hred(dim, dim);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, r);
  for (Index j = 0; j < dim; ++j) {
    basis(j % n, j / n) = 1.0;
    const Eigen::MatrixXd image = mvp_reduced(p, basis);
    hred.col(j) = Eigen::Map<const Eigen::VectorXd>(image.data(), dim);
    basis(j % n, j / n) = 0.0;
  }
  hred = 0.5 * (hred + hred.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> kernel_eigen(p.kernel.values());
  if (kernel_eigen.info() != Eigen::Success) {
    throw DiagnosticError("kernel eigensolve failed");
  }
  const Eigen::VectorXd kernel_evs = kernel_eigen.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd ksqrt = kernel_eigen.eigenvectors() *
                                kernel_evs.cwiseSqrt().asDiagonal() *
                                kernel_eigen.eigenvectors().transpose();

  // (I_r (x) K^{1/2}) H_red (I_r (x) K^{1/2}) + lambda I, formed blockwise.
  Eigen::MatrixXd op(dim, dim);
  for (Index a = 0; a < r; ++a) {
    for (Index b = 0; b < r; ++b) {
      op.block(a * n, b * n, n, n) = ksqrt * hred.block(a * n, b * n, n, n) * ksqrt;
    }
  }
  op.diagonal().array() += p.lambda;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> op_eigen(op);
  if (op_eigen.info() != Eigen::Success) {
    throw DiagnosticError("preconditioned-operator eigensolve failed");
  }
  const double op_min = op_eigen.eigenvalues().minCoeff();
  const double op_max = op_eigen.eigenvalues().maxCoeff();
  if (!(op_min > 0.0)) {
    throw DiagnosticError("preconditioned operator lost positive definiteness: " +
                          std::to_string(op_min));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hred_eigen(hred);
  if (hred_eigen.info() != Eigen::Success) {
    throw DiagnosticError("H_red eigensolve failed");
  }
  const double hred_max = std::max(0.0, hred_eigen.eigenvalues().maxCoeff());

  ConditionCheck check;
  check.kappa_actual = op_max / op_min;
  check.kappa_bound = 1.0 + hred_max * kernel_evs.maxCoeff() / p.lambda;
  if (check.kappa_actual > check.kappa_bound * (1.0 + 1e-8)) {
    throw DiagnosticError("condition bound violated: actual " +
                          std::to_string(check.kappa_actual) + " > bound " +
                          std::to_string(check.kappa_bound));
  }
  return check;
}

}  // namespace rkcp
