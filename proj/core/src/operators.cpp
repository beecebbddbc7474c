#include "rkcp/operators.hpp"

#include <string>

namespace rkcp {

ProblemInstance ProblemInstance::create(Shape shape, ObservationSet obs, FactorSet factors,
                                        KernelMatrix kernel, double lambda) {
  if (obs.shape().dims() != shape.dims() || obs.shape().mode() != shape.mode()) {
    throw ValidationError("observation set was built for a different shape");
  }
  if (kernel.size() != shape.mode_size()) {
    throw ValidationError("kernel has size " + std::to_string(kernel.size()) +
                          ", mode-" + std::to_string(shape.mode()) + " extent is " +
                          std::to_string(shape.mode_size()));
  }
  if (obs.q() > 0 && obs.rank() != factors.rank()) {
    throw ValidationError("cached rows have rank " + std::to_string(obs.rank()) +
                          ", factors have rank " + std::to_string(factors.rank()));
  }
  if (lambda < 0.0) {
    throw ValidationError("lambda must be nonnegative, got " + std::to_string(lambda));
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(shape.mode_size(), factors.rank());
  if (obs.q() > 0) b = sparse_mttkrp(obs);
  return ProblemInstance{std::move(shape), std::move(obs), std::move(factors),
                         std::move(kernel), lambda, std::move(b)};
}

Eigen::MatrixXd build_dense_hessian(const ProblemInstance& p, FlopCounter* counter,
                                    Index oracle_cap) {
  const Index n = p.n();
  const Index r = p.r();
  const Index dim = n * r;
  if (dim > oracle_cap) {
    throw OracleScaleError("dense oracle needs n*r <= " + std::to_string(oracle_cap) +
                           ", got " + std::to_string(dim));
  }
  const Eigen::MatrixXd& kernel = p.kernel.values();
  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(dim, dim);

  // H = sum_m g_m g_m^T with g_m = z^(m) (x) K[i_m,:]^T; accumulate the upper
  // triangle and mirror once at the end.
  Eigen::VectorXd g(dim);
  for (Index i = 0; i < n; ++i) {
    for (const Index m : p.obs.slice(i)) {
      const auto z = p.obs.cached_rows().row(m);
      for (Index c = 0; c < r; ++c) {
        g.segment(c * n, n) = z(c) * kernel.col(i);
      }
      hessian.selfadjointView<Eigen::Upper>().rankUpdate(g, 1.0);
    }
  }
  hessian = hessian.selfadjointView<Eigen::Upper>();
  for (Index c = 0; c < r; ++c) {
    hessian.block(c * n, c * n, n, n) += p.lambda * kernel;
  }
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(r);
    const auto uq = static_cast<std::uint64_t>(p.q());
    const std::uint64_t udim = un * ur;
    counter->add(Phase::Setup, uq * (udim + udim * (udim + 1) / 2) + ur * un * un);
  }
  return hessian;
}

Eigen::MatrixXd mvp_dense(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd& v,
                          FlopCounter* counter) {
  const Eigen::Map<const Eigen::VectorXd> x(v.data(), v.size());
  Eigen::VectorXd y = hessian * x;
  if (counter) {
    counter->add(Phase::Mvp, static_cast<std::uint64_t>(v.size()) *
                                 static_cast<std::uint64_t>(v.size()));
  }
  return Eigen::Map<Eigen::MatrixXd>(y.data(), v.rows(), v.cols());
}

Eigen::MatrixXd mvp_onfly(const ProblemInstance& p, const Eigen::MatrixXd& v,
                          FlopCounter* counter) {
  const Index n = p.n();
  const Eigen::MatrixXd& kernel = p.kernel.values();

  Eigen::MatrixXd u = kernel * v;  // U = K V
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  for (Index i = 0; i < n; ++i) {
    for (const Index m : p.obs.slice(i)) {
      const auto z = p.obs.cached_rows().row(m);
      const double e = u.row(i).dot(z);
      acc.row(i) += e * z;
    }
  }
  Eigen::MatrixXd out = kernel * acc;
  out += p.lambda * u;
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(p.r());
    const auto uq = static_cast<std::uint64_t>(p.q());
    counter->add(Phase::Mvp, 2 * un * un * ur + 2 * uq * ur + un * ur);
  }
  return out;
}

SliceGrams build_slice_grams(const ObservationSet& obs, FlopCounter* counter) {
  const Index n = obs.shape().mode_size();
  const Index r = obs.rank();
  SliceGrams grams;
  grams.grams.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(r, r);
    for (const Index m : obs.slice(i)) {
      e.selfadjointView<Eigen::Upper>().rankUpdate(obs.cached_rows().row(m).transpose(), 1.0);
    }
    grams.grams.emplace_back(e.selfadjointView<Eigen::Upper>());
  }
  if (counter) {
    const auto ur = static_cast<std::uint64_t>(r);
    counter->add(Phase::Setup,
                 static_cast<std::uint64_t>(obs.q()) * ur * (ur + 1) / 2);
  }
  return grams;
}

Eigen::MatrixXd mvp_preaggregated(const ProblemInstance& p, const SliceGrams& grams,
                                  const Eigen::MatrixXd& v, FlopCounter* counter) {
  const Index n = p.n();
  const Eigen::MatrixXd& kernel = p.kernel.values();

  Eigen::MatrixXd u = kernel * v;  // U = K V
  Eigen::MatrixXd y(v.rows(), v.cols());
  for (Index i = 0; i < n; ++i) {
    y.row(i).noalias() = u.row(i) * grams[i];
  }
  Eigen::MatrixXd out = kernel * y;
  out += p.lambda * u;
  if (counter) {
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(p.r());
    counter->add(Phase::Mvp, 2 * un * un * ur + un * ur * ur + un * ur);
  }
  return out;
}

Eigen::MatrixXd mvp_reduced(const ProblemInstance& p, const Eigen::MatrixXd& v,
                            FlopCounter* counter) {
  const Index n = p.n();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  for (Index i = 0; i < n; ++i) {
    for (const Index m : p.obs.slice(i)) {
      const auto z = p.obs.cached_rows().row(m);
      const double e = v.row(i).dot(z);
      out.row(i) += e * z;
    }
  }
  if (counter) {
    counter->add(Phase::Mvp, 2 * static_cast<std::uint64_t>(p.q()) *
                                 static_cast<std::uint64_t>(p.r()));
  }
  return out;
}

Eigen::MatrixXd build_rhs(const ProblemInstance& p, FlopCounter* counter) {
  Eigen::MatrixXd c = p.kernel.values() * p.mttkrp;
  if (counter) {
    const auto un = static_cast<std::uint64_t>(p.n());
    counter->add(Phase::Setup, un * un * static_cast<std::uint64_t>(p.r()));
  }
  return c;
}

}  // namespace rkcp
