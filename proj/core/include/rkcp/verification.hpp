#pragma once

#include <string>
#include <vector>

#include "rkcp/problemgen.hpp"

namespace rkcp {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_error = 0.0;
  double threshold = 0.0;
};

struct VerifyOptions {
  std::uint64_t seed = 42;
  std::vector<Index> dims = {8, 6, 5};
  int mode = 0;
  Index rank = 3;
  Index q = 60;
  double lambda = 0.1;
  /// Negative control: additively disturbs the pre-aggregated slice Grams so
  /// the equivalence checks must fail. Zero disables.
  double perturb = 0.0;
};

/// Cross-validate the three operator realizations, the preconditioner
/// diagonals/blocks and the right-hand-side simplification against the dense
/// oracle, plus a cross-solver agreement run, on seeded random instances.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

/// The 1x1 closed-form instance (K = [2], z = (3), y = 1, lambda = 1):
/// H = 38, C = 6, W = 3/19 through every solver path.
std::vector<CheckResult> run_quick_check();

}  // namespace rkcp
