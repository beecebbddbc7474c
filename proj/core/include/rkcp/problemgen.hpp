#pragma once

#include <filesystem>
#include <optional>

#include "rkcp/kernel.hpp"
#include "rkcp/operators.hpp"
#include "rkcp/rng.hpp"

namespace rkcp {

/// Deterministic synthetic-instance description. Identical specs (including
/// seed) generate bit-identical instances.
struct GenSpec {
  std::vector<Index> dims;
  int mode = 0;
  Index rank = 1;
  Index q = 0;
  KernelSpec kernel;
  double lambda = 0.1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct GeneratedInstance {
  ProblemInstance instance;
  Eigen::MatrixXd ground_truth;  // W*, n x r
};

/// Draw an instance from the generative model A_k = K W*:
///   factors ~ U[-1, 1] per entry; kernel on the uniform grid; W* standard
///   normal; q cells sampled uniformly without replacement;
///   y_m = <(K W*)[i_m,:], z^(m)> + noise_sigma * xi_m.
/// Purpose streams are forked from the seed (see rng.hpp), matrices filled
/// row by row, cells sampled by seeded partial Fisher-Yates when q/N > 0.01
/// and by rejection otherwise (both O(q) state in the sparse regime).
GeneratedInstance generate(const GenSpec& spec);

/// Emit observations, one factor file per mode != k, the kernel matrix, the
/// ground truth and a key=value manifest into an existing directory.
void write_instance(const ProblemInstance& p, const Eigen::MatrixXd& ground_truth,
                    const GenSpec& spec, const std::filesystem::path& dir);

struct LoadedInstance {
  ProblemInstance instance;
  std::optional<Eigen::MatrixXd> ground_truth;
  GenSpec spec;  // manifest echo
};

/// Rebuild an instance from a directory written by write_instance. Kernel
/// sample points are reconstructed as the uniform grid (they are a harness
/// convention and are not persisted).
LoadedInstance read_instance(const std::filesystem::path& dir);

}  // namespace rkcp
