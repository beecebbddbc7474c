#include "rkcp/kernel.hpp"

#include <cmath>
#include <string>

namespace rkcp {

KernelFamily kernel_family_from_name(std::string_view name) {
  if (name == "rbf") return KernelFamily::Rbf;
  if (name == "linear") return KernelFamily::Linear;
  if (name == "identity") return KernelFamily::Identity;
  throw ValidationError("unknown kernel family '" + std::string(name) +
                        "' (expected rbf, linear or identity)");
}

std::string_view kernel_family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::Rbf: return "rbf";
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Identity: return "identity";
  }
  return "rbf";
}

KernelMatrix::KernelMatrix(Eigen::MatrixXd values, Eigen::VectorXd points)
    : values_(std::move(values)), points_(std::move(points)) {}

KernelMatrix KernelMatrix::from_matrix(Eigen::MatrixXd values, Eigen::VectorXd points) {
  if (values.rows() != values.cols()) {
    throw ValidationError("kernel matrix must be square, got " +
                          std::to_string(values.rows()) + "x" +
                          std::to_string(values.cols()));
  }
  if (values.rows() < 1) throw ValidationError("kernel matrix is empty");
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = i + 1; j < values.cols(); ++j) {
      if (values(i, j) != values(j, i)) {
        throw ValidationError("kernel matrix not symmetric at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
  if (points.size() != 0 && points.size() != values.rows()) {
    throw ValidationError("kernel points length does not match matrix size");
  }
  return KernelMatrix(std::move(values), std::move(points));
}

KernelMatrix build_kernel(const Eigen::VectorXd& points, const KernelSpec& spec) {
  const Index n = points.size();
  if (n < 1) throw ValidationError("kernel needs at least one sample point");
  if (!points.allFinite()) throw ValidationError("kernel sample points must be finite");
  if (spec.family == KernelFamily::Rbf && !(spec.lengthscale > 0.0)) {
    throw ValidationError("rbf lengthscale must be positive, got " +
                          std::to_string(spec.lengthscale));
  }
  if (spec.jitter < 0.0) throw ValidationError("jitter must be nonnegative");

  Eigen::MatrixXd values(n, n);
  switch (spec.family) {
    case KernelFamily::Identity:
      values = Eigen::MatrixXd::Identity(n, n);
      break;
    case KernelFamily::Linear:
      for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
          const double v = points(i) * points(j);
          values(i, j) = v;
          values(j, i) = v;
        }
        values(i, i) += spec.jitter;
      }
      break;
    case KernelFamily::Rbf: {
      const double inv2l2 = 1.0 / (2.0 * spec.lengthscale * spec.lengthscale);
      for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
          const double diff = points(i) - points(j);
          const double v = std::exp(-diff * diff * inv2l2);
          values(i, j) = v;
          values(j, i) = v;
        }
        values(i, i) += spec.jitter;
      }
      break;
    }
  }
  return KernelMatrix::from_matrix(std::move(values), points);
}

Eigen::MatrixXd hadamard_square(const KernelMatrix& kernel) {
  return kernel.values().cwiseProduct(kernel.values());
}

double assert_psd(const KernelMatrix& kernel, double tol) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(kernel.values());
  if (ldlt.info() != Eigen::Success) {
    throw PsdError("kernel factorization failed", std::nan(""));
  }
  const double smallest = ldlt.vectorD().minCoeff();
  if (smallest < -tol) {
    throw PsdError("kernel is indefinite: pivot " + std::to_string(smallest) +
                       " below -" + std::to_string(tol),
                   smallest);
  }
  return smallest;
}

Eigen::VectorXd uniform_grid(Index n) {
  Eigen::VectorXd points(n);
  if (n == 1) {
    points(0) = 0.0;
    return points;
  }
  for (Index i = 0; i < n; ++i) {
    points(i) = static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return points;
}

}  // namespace rkcp
