#include "rkcp/verification.hpp"

#include <algorithm>
#include <cmath>

#include "rkcp/diagnostics.hpp"
#include "rkcp/solvers.hpp"

namespace rkcp {

namespace {

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale > 0.0 ? (a - b).norm() / scale : 0.0;
}

Eigen::MatrixXd random_matrix(SplitMix64& rng, Index rows, Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_uniform(-1.0, 1.0);
  }
  return m;
}

// Small deterministic instance pool for the operator checks.
GeneratedInstance equivalence_instance(std::uint64_t seed, int which) {
  static const std::vector<std::vector<Index>> dims_pool = {
      {6, 5, 4}, {8, 3, 3}, {5, 7, 2}, {10, 4, 2}, {4, 4, 4, 2}};
  static const std::vector<double> lambda_pool = {0.0, 0.1, 1.0};
  GenSpec spec;
  spec.dims = dims_pool[static_cast<std::size_t>(which) % dims_pool.size()];
  spec.mode = which % static_cast<int>(spec.dims.size());
  spec.rank = 2 + which % 3;  // 2..4
  const Index n_total = Shape(spec.dims, spec.mode).total_size();
  spec.q = std::min<Index>(80, 20 + 13 * which % 61);
  spec.q = std::min(spec.q, n_total);
  spec.lambda = lambda_pool[static_cast<std::size_t>(which) % lambda_pool.size()];
  spec.seed = seed + static_cast<std::uint64_t>(which) * 1000003ull;
  return generate(spec);
}

// Materialize (Z (x) K)^T S S^T vec(T) with everything explicit.
Eigen::MatrixXd materialized_rhs(const ProblemInstance& p) {
  const Index n = p.n();
  const Index r = p.r();
  const Index m_cols = p.shape.complement_size();
  const Index big = n * m_cols;

  // Zero-filled unfolding with observed values scattered in (S S^T vec(T)
  // equals vec(T) because unobserved entries are already zero; apply the
  // projection explicitly anyway).
  Eigen::VectorXd vec_t = Eigen::VectorXd::Zero(big);
  for (const ObservationEntry& e : p.obs.entries()) {
    vec_t(vec_index(n, e.row, e.col)) = e.value;
  }
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(big);
  for (const ObservationEntry& e : p.obs.entries()) {
    const Index cell = vec_index(n, e.row, e.col);
    projected(cell) = vec_t(cell);
  }

  // Full Khatri-Rao product and the row-structured Kronecker factor.
  Eigen::MatrixXd z_full(m_cols, r);
  for (Index col = 0; col < m_cols; ++col) {
    z_full.row(col) = kr_row(p.factors, p.shape, col);
  }
  Eigen::MatrixXd zk(big, n * r);
  for (Index j = 0; j < m_cols; ++j) {
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < r; ++c) {
        zk.block(j * n + i, c * n, 1, n) = z_full(j, c) * p.kernel.values().row(i);
      }
    }
  }
  const Eigen::VectorXd rhs = zk.transpose() * projected;
  return Eigen::Map<const Eigen::MatrixXd>(rhs.data(), n, r);
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  SplitMix64 vec_rng = fork_stream(options.seed, 77);

  // Operator realizations against the dense oracle, with symmetry and
  // positivity of the quadratic form.
  {
    CheckResult equivalence{"mvp-equivalence", true, 0.0, 1e-12};
    CheckResult symmetry{"mvp-symmetry", true, 0.0, 1e-12};
    CheckResult psd{"mvp-psd", true, 0.0, 1e-12};
    CheckResult reduced{"reduced-factorization", true, 0.0, 1e-12};
    for (int which = 0; which < 10; ++which) {
      const GeneratedInstance gen = equivalence_instance(options.seed, which);
      const ProblemInstance& p = gen.instance;
      SliceGrams grams = build_slice_grams(p.obs);
      if (options.perturb != 0.0) grams.grams[0](0, 0) += options.perturb;
      const Eigen::MatrixXd hessian = build_dense_hessian(p);
      for (int rep = 0; rep < 3; ++rep) {
        const Eigen::MatrixXd v = random_matrix(vec_rng, p.n(), p.r());
        const Eigen::MatrixXd v2 = random_matrix(vec_rng, p.n(), p.r());
        const Eigen::MatrixXd via_dense = mvp_dense(hessian, v);
        const Eigen::MatrixXd via_onfly = mvp_onfly(p, v);
        const Eigen::MatrixXd via_preagg = mvp_preaggregated(p, grams, v);
        equivalence.max_error = std::max({equivalence.max_error,
                                          rel_diff(via_dense, via_onfly),
                                          rel_diff(via_dense, via_preagg),
                                          rel_diff(via_onfly, via_preagg)});
        const double lhs = via_onfly.cwiseProduct(v2).sum();
        const double rhs = v.cwiseProduct(mvp_onfly(p, v2)).sum();
        const double sym_scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
        symmetry.max_error = std::max(symmetry.max_error, std::abs(lhs - rhs) / sym_scale);
        const double quad = via_onfly.cwiseProduct(v).sum();
        psd.max_error = std::max(psd.max_error, -quad / v.squaredNorm());
        const Eigen::MatrixXd kv = p.kernel.values() * v;
        const Eigen::MatrixXd via_reduced =
            p.kernel.values() * mvp_reduced(p, kv) + p.lambda * kv;
        reduced.max_error = std::max(reduced.max_error, rel_diff(via_onfly, via_reduced));
      }
    }
    equivalence.pass = equivalence.max_error <= equivalence.threshold;
    symmetry.pass = symmetry.max_error <= symmetry.threshold;
    psd.pass = psd.max_error <= psd.threshold;
    reduced.pass = reduced.max_error <= reduced.threshold;
    results.push_back(equivalence);
    results.push_back(symmetry);
    results.push_back(psd);
    results.push_back(reduced);
  }

  // Preconditioner exactness against the dense diagonal and blocks.
  {
    CheckResult diag_check{"jacobi-diagonal", true, 0.0, 1e-12};
    CheckResult block_check{"block-diagonal", true, 0.0, 1e-12};
    for (int which = 0; which < 10; ++which) {
      GeneratedInstance gen = equivalence_instance(options.seed + 17, which);
      ProblemInstance& p = gen.instance;
      if (!(p.lambda > 0.0)) p.lambda = 0.1;  // keep the builds well-posed
      const Eigen::MatrixXd hessian = build_dense_hessian(p);
      const Index n = p.n();
      const Index r = p.r();

      const JacobiDiag jacobi = build_jacobi_diag(p);
      Eigen::MatrixXd dense_diag(n, r);
      for (Index c = 0; c < r; ++c) {
        dense_diag.col(c) = hessian.diagonal().segment(c * n, n);
      }
      diag_check.max_error = std::max(diag_check.max_error, rel_diff(jacobi.diag, dense_diag));

      SliceGrams grams = build_slice_grams(p.obs);
      if (options.perturb != 0.0) grams.grams[0](0, 0) += options.perturb;
      const BlockJacobi blocks = build_block_jacobi(p, grams);
      for (Index i = 0; i < n; ++i) {
        Eigen::MatrixXd dense_block(r, r);
        for (Index a = 0; a < r; ++a) {
          for (Index b = 0; b < r; ++b) {
            dense_block(a, b) = hessian(i + a * n, i + b * n);
          }
        }
        const Eigen::MatrixXd& l = blocks.factors[static_cast<std::size_t>(i)];
        block_check.max_error =
            std::max(block_check.max_error,
                     rel_diff(Eigen::MatrixXd(l * l.transpose()), dense_block));
      }
    }
    diag_check.pass = diag_check.max_error <= diag_check.threshold;
    block_check.pass = block_check.max_error <= block_check.threshold;
    results.push_back(diag_check);
    results.push_back(block_check);
  }

  // Right-hand-side simplification against full materialization.
  {
    CheckResult rhs_check{"rhs-simplification", true, 0.0, 1e-13};
    for (int which = 0; which < 4; ++which) {
      const GeneratedInstance gen = equivalence_instance(options.seed + 23, which);
      if (gen.instance.shape.total_size() * gen.instance.n() * gen.instance.r() > 2000000) {
        continue;
      }
      rhs_check.max_error = std::max(
          rhs_check.max_error,
          rel_diff(build_rhs(gen.instance), materialized_rhs(gen.instance)));
    }
    rhs_check.pass = rhs_check.max_error <= rhs_check.threshold;
    results.push_back(rhs_check);
  }

  // The three iterative strategies against the direct solve.
  {
    CheckResult agree{"solver-agreement", true, 0.0, 1e-6};
    GenSpec spec;
    spec.dims = options.dims;
    spec.mode = options.mode;
    spec.rank = options.rank;
    spec.q = options.q;
    spec.lambda = options.lambda;
    spec.seed = options.seed;
    GeneratedInstance gen = generate(spec);
    if (options.perturb != 0.0) {
      gen.instance.obs.perturb_first_cached_row(options.perturb);
      gen.instance.mttkrp = sparse_mttkrp(gen.instance.obs);
    }
    const SolveReport dense = solve_dense(gen.instance);
    SolveConfig cfg;
    cfg.tol = 1e-14;  // run to the floor; agreement is measured on W
    for (const SolverKind kind :
         {SolverKind::JacobiOnFly, SolverKind::BlockPreAgg, SolverKind::InverseFree}) {
      const SolveReport rep = run_solver(gen.instance, kind, cfg);
      agree.max_error = std::max(agree.max_error, rel_diff(rep.weights, dense.weights));
    }
    agree.pass = agree.max_error <= agree.threshold;
    results.push_back(agree);
  }

  return results;
}

std::vector<CheckResult> run_quick_check() {
  // K = [2], z = (3), y = 1, lambda = 1: H = (3*2)^2 + 2 = 38, C = 6, W = 3/19.
  Shape shape({1, 1}, 0);
  FactorSet factors = FactorSet::create({(Eigen::MatrixXd(1, 1) << 3.0).finished()}, shape);
  std::vector<RawObservation> raw = {{{0, 0}, 1.0}};
  ObservationSet obs = build_observation_set(shape, factors, raw);
  KernelMatrix kernel = KernelMatrix::from_matrix((Eigen::MatrixXd(1, 1) << 2.0).finished());
  const ProblemInstance p =
      ProblemInstance::create(shape, std::move(obs), std::move(factors), std::move(kernel), 1.0);

  const double expected = 3.0 / 19.0;
  std::vector<CheckResult> results;
  const Eigen::MatrixXd hessian = build_dense_hessian(p);
  results.push_back({"hand-hessian", hessian(0, 0) == 38.0,
                     std::abs(hessian(0, 0) - 38.0), 0.0});
  const Eigen::MatrixXd rhs = build_rhs(p);
  results.push_back({"hand-rhs", rhs(0, 0) == 6.0, std::abs(rhs(0, 0) - 6.0), 0.0});
  for (const SolverKind kind : {SolverKind::Dense, SolverKind::JacobiOnFly,
                                SolverKind::BlockPreAgg, SolverKind::InverseFree}) {
    const SolveReport rep = run_solver(p, kind, {});
    const double err = std::abs(rep.weights(0, 0) - expected);
    results.push_back({"hand-" + std::string(solver_kind_name(kind)),
                       rep.converged && err <= 1e-15, err, 1e-15});
  }
  return results;
}

}  // namespace rkcp
