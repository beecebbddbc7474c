#include "rkcp/preconditioners.hpp"

#include <Eigen/Cholesky>
#include <string>

namespace rkcp {

JacobiDiag build_jacobi_diag(const ProblemInstance& p, FlopCounter* counter) {
  const Index n = p.n();
  const Index r = p.r();
  const Eigen::MatrixXd& kernel = p.kernel.values();

  // Row i of (Omega Ztilde): squared cached rows summed per slice.
  Eigen::MatrixXd omega_zt = Eigen::MatrixXd::Zero(n, r);
  for (Index i = 0; i < n; ++i) {
    for (const Index m : p.obs.slice(i)) {
      const auto z = p.obs.cached_rows().row(m);
      omega_zt.row(i) += z.cwiseProduct(z);
    }
  }
  const Eigen::MatrixXd ktilde = hadamard_square(p.kernel);
  Eigen::MatrixXd diag = ktilde * omega_zt;
  diag += p.lambda * kernel.diagonal() * Eigen::RowVectorXd::Ones(r);

  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < r; ++c) {
      if (!(diag(i, c) > 0.0)) {
        throw PrecondSingularError("Jacobi diagonal entry (" + std::to_string(i) + ", " +
                                       std::to_string(c) + ") is " +
                                       std::to_string(diag(i, c)) + ", must be positive",
                                   i);
      }
    }
  }
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(r);
    const auto uq = static_cast<std::uint64_t>(p.q());
    counter->add(Phase::Setup, uq * ur + un * un + un * un * ur + un * ur);
  }
  return JacobiDiag{std::move(diag)};
}

Eigen::MatrixXd apply_jacobi(const JacobiDiag& jacobi, const Eigen::MatrixXd& r,
                             FlopCounter* counter, Phase phase) {
  if (counter) counter->add(phase, static_cast<std::uint64_t>(r.size()));
  return r.cwiseQuotient(jacobi.diag);
}

BlockJacobi build_block_jacobi(const ProblemInstance& p, const SliceGrams& grams,
                               FlopCounter* counter) {
  const Index n = p.n();
  const Index r = p.r();
  const Eigen::MatrixXd& kernel = p.kernel.values();
  const Eigen::MatrixXd ktilde = hadamard_square(p.kernel);

  // Flattened contraction: stack each E^(l) as a row of an n x r^2 matrix and
  // form Ktilde * E_flat in one gemm.
  Eigen::MatrixXd flat(n, r * r);
  for (Index l = 0; l < n; ++l) {
    flat.row(l) = Eigen::Map<const Eigen::VectorXd>(grams[l].data(), r * r);
  }
  const Eigen::MatrixXd mixed = ktilde * flat;

  BlockJacobi blocks;
  blocks.factors.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd mixed_row(r * r);
  for (Index i = 0; i < n; ++i) {
    mixed_row = mixed.row(i);
    Eigen::MatrixXd block = Eigen::Map<const Eigen::MatrixXd>(mixed_row.data(), r, r);
    block.diagonal().array() += p.lambda * kernel(i, i);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success) {
      throw PrecondSingularError(
          "diagonal block " + std::to_string(i) + " is not positive definite", i);
    }
    blocks.factors.emplace_back(llt.matrixL());
  }
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(r);
    counter->add(Phase::Setup, un * un + un * un * ur * ur + un * ur +
                                   un * (ur * (ur + 1) * (ur + 2) / 6));
  }
  return blocks;
}

Eigen::MatrixXd apply_block_jacobi(const BlockJacobi& blocks, const Eigen::MatrixXd& r,
                                   FlopCounter* counter, Phase phase) {
  const Index n = r.rows();
  Eigen::MatrixXd out(n, r.cols());
  Eigen::VectorXd rhs(r.cols());
  for (Index i = 0; i < n; ++i) {
    const Eigen::MatrixXd& l = blocks.factors[static_cast<std::size_t>(i)];
    rhs = r.row(i).transpose();
    l.triangularView<Eigen::Lower>().solveInPlace(rhs);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(rhs);
    out.row(i) = rhs.transpose();
  }
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(r.cols());
    counter->add(phase, un * (ur * ur + ur));
  }
  return out;
}

}  // namespace rkcp
