#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include "rkcp/errors.hpp"
#include "rkcp/indexing.hpp"

namespace rkcp {

enum class KernelFamily { Rbf, Linear, Identity };

KernelFamily kernel_family_from_name(std::string_view name);
std::string_view kernel_family_name(KernelFamily family);

struct KernelSpec {
  KernelFamily family = KernelFamily::Rbf;
  double lengthscale = 0.3;  // rbf only
  double jitter = 1e-10;     // added to the diagonal (rbf, linear)
};

/// Symmetric positive semi-definite Gram matrix for the RKHS mode, plus the
/// sample locations that generated it (empty when loaded from a bare matrix).
class KernelMatrix {
public:
  static KernelMatrix from_matrix(Eigen::MatrixXd values,
                                  Eigen::VectorXd points = Eigen::VectorXd());

  const Eigen::MatrixXd& values() const { return values_; }
  const Eigen::VectorXd& points() const { return points_; }
  Index size() const { return values_.rows(); }

private:
  KernelMatrix(Eigen::MatrixXd values, Eigen::VectorXd points);

  Eigen::MatrixXd values_;
  Eigen::VectorXd points_;
};

/// Evaluate the kernel on the given 1-d sample points. Each unordered pair is
/// evaluated once so symmetry is exact.
///   rbf:      K_ij = exp(-(p_i - p_j)^2 / (2 l^2)) + jitter [i = j]
///   linear:   K_ij = p_i p_j + jitter [i = j]
///   identity: K = I
KernelMatrix build_kernel(const Eigen::VectorXd& points, const KernelSpec& spec);

/// Entrywise square K o K.
Eigen::MatrixXd hadamard_square(const KernelMatrix& kernel);

/// Verify positive semi-definiteness by symmetric factorization with
/// tolerance `tol` on the pivots. Returns the smallest pivot encountered;
/// throws PsdError carrying the offending pivot if it is below -tol.
double assert_psd(const KernelMatrix& kernel, double tol);

/// Uniform sample grid p_i = i / (n - 1) on [0, 1]; {0} for n = 1.
Eigen::VectorXd uniform_grid(Index n);

}  // namespace rkcp
