#include "rkcp/problemgen.hpp"

#include <string>
#include <unordered_set>

#include "rkcp/io.hpp"

namespace rkcp {

namespace {

// Fixed purpose tags for the forked generator streams.
constexpr std::uint64_t kFactorStream = 1;
constexpr std::uint64_t kWeightStream = 2;
constexpr std::uint64_t kCellStream = 3;
constexpr std::uint64_t kNoiseStream = 4;

// Cells are linearized over all d axes in ascending order (axis 0 fastest).
std::vector<Index> decode_cell(const Shape& shape, Index cell) {
  std::vector<Index> multi(static_cast<std::size_t>(shape.order()));
  for (int axis = 0; axis < shape.order(); ++axis) {
    multi[static_cast<std::size_t>(axis)] = cell % shape.extent(axis);
    cell /= shape.extent(axis);
  }
  return multi;
}

std::vector<Index> sample_cells(SplitMix64& rng, Index total, Index q) {
  std::vector<Index> cells;
  cells.reserve(static_cast<std::size_t>(q));
  if (q == 0) return cells;
  if (100 * q > total) {
    // Dense regime: partial Fisher-Yates over all cell indices.
    std::vector<Index> pool(static_cast<std::size_t>(total));
    for (Index i = 0; i < total; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (Index t = 0; t < q; ++t) {
      const Index j =
          t + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(total - t)));
      std::swap(pool[static_cast<std::size_t>(t)], pool[static_cast<std::size_t>(j)]);
      cells.push_back(pool[static_cast<std::size_t>(t)]);
    }
  } else {
    // Sparse regime: rejection sampling, O(q) state.
    std::unordered_set<Index> taken;
    taken.reserve(static_cast<std::size_t>(q));
    while (static_cast<Index>(cells.size()) < q) {
      const Index cell = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(total)));
      if (taken.insert(cell).second) cells.push_back(cell);
    }
  }
  return cells;
}

std::string join_dims(const std::vector<Index>& dims) {
  std::string out;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    out += (a ? "," : "") + std::to_string(dims[a]);
  }
  return out;
}

std::filesystem::path factor_filename(int axis) {
  return "factor_" + std::to_string(axis) + ".txt";
}

}  // namespace

GeneratedInstance generate(const GenSpec& spec) {
  Shape shape(spec.dims, spec.mode);
  const Index n = shape.mode_size();
  const Index total = shape.total_size();
  if (spec.rank < 1) throw ValidationError("rank must be >= 1");
  if (spec.q < 0 || spec.q > total) {
    throw ValidationError("q=" + std::to_string(spec.q) + " outside [0, N=" +
                          std::to_string(total) + "]");
  }
  if (spec.noise_sigma < 0.0) throw ValidationError("noise_sigma must be nonnegative");
  if (spec.lambda < 0.0) throw ValidationError("lambda must be nonnegative");

  SplitMix64 factor_rng = fork_stream(spec.seed, kFactorStream);
  std::vector<Eigen::MatrixXd> factor_mats;
  for (int axis = 0; axis < shape.order(); ++axis) {
    if (axis == shape.mode()) continue;
    Eigen::MatrixXd f(shape.extent(axis), spec.rank);
    for (Index i = 0; i < f.rows(); ++i) {
      for (Index j = 0; j < f.cols(); ++j) {
        f(i, j) = factor_rng.next_uniform(-1.0, 1.0);
      }
    }
    factor_mats.push_back(std::move(f));
  }
  FactorSet factors = FactorSet::create(std::move(factor_mats), shape);

  KernelMatrix kernel = build_kernel(uniform_grid(n), spec.kernel);

  SplitMix64 weight_rng = fork_stream(spec.seed, kWeightStream);
  Eigen::MatrixXd ground_truth(n, spec.rank);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < spec.rank; ++j) {
      ground_truth(i, j) = weight_rng.next_normal();
    }
  }

  SplitMix64 cell_rng = fork_stream(spec.seed, kCellStream);
  const std::vector<Index> cells = sample_cells(cell_rng, total, spec.q);

  SplitMix64 noise_rng = fork_stream(spec.seed, kNoiseStream);
  const Eigen::MatrixXd mode_factor = kernel.values() * ground_truth;  // A_k = K W*
  std::vector<RawObservation> raw;
  raw.reserve(cells.size());
  for (const Index cell : cells) {
    RawObservation obs;
    obs.multi_index = decode_cell(shape, cell);
    const ModeKCoordinate coord = mode_k_coords(shape, obs.multi_index);
    const Eigen::RowVectorXd z = kr_row(factors, shape, coord.col);
    obs.value = mode_factor.row(coord.row).dot(z);
    if (spec.noise_sigma > 0.0) obs.value += spec.noise_sigma * noise_rng.next_normal();
    raw.push_back(std::move(obs));
  }

  ObservationSet obs = build_observation_set(shape, factors, raw);
  ProblemInstance instance = ProblemInstance::create(
      std::move(shape), std::move(obs), std::move(factors), std::move(kernel), spec.lambda);
  return GeneratedInstance{std::move(instance), std::move(ground_truth)};
}

void write_instance(const ProblemInstance& p, const Eigen::MatrixXd& ground_truth,
                    const GenSpec& spec, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("'" + dir.string() + "' is not an existing directory");
  }
  write_observations(dir / "observations.txt", p.obs);
  std::size_t position = 0;
  for (int axis = 0; axis < p.shape.order(); ++axis) {
    if (axis == p.shape.mode()) continue;
    write_matrix(dir / factor_filename(axis), p.factors.factor(position));
    ++position;
  }
  write_matrix(dir / "kernel.txt", p.kernel.values());
  write_matrix(dir / "ground_truth.txt", ground_truth);
  write_manifest(dir / "manifest.txt",
                 {{"shape", join_dims(spec.dims)},
                  {"mode", std::to_string(spec.mode)},
                  {"rank", std::to_string(spec.rank)},
                  {"lambda", format_g17(spec.lambda)},
                  {"q", std::to_string(spec.q)},
                  {"seed", std::to_string(spec.seed)},
                  {"kernel", std::string(kernel_family_name(spec.kernel.family))},
                  {"lengthscale", format_g17(spec.kernel.lengthscale)},
                  {"jitter", format_g17(spec.kernel.jitter)},
                  {"noise_sigma", format_g17(spec.noise_sigma)}});
}

LoadedInstance read_instance(const std::filesystem::path& dir) {
  const auto manifest = read_manifest(dir / "manifest.txt");
  GenSpec spec;
  for (const auto& [key, value] : manifest) {
    if (key == "shape") {
      for (const auto& piece : [&] {
             std::vector<std::string> out;
             std::string tok;
             std::stringstream ss(value);
             while (std::getline(ss, tok, ',')) out.push_back(tok);
             return out;
           }()) {
        spec.dims.push_back(std::stoll(piece));
      }
    } else if (key == "mode") {
      spec.mode = std::stoi(value);
    } else if (key == "rank") {
      spec.rank = std::stoll(value);
    } else if (key == "lambda") {
      spec.lambda = std::stod(value);
    } else if (key == "q") {
      spec.q = std::stoll(value);
    } else if (key == "seed") {
      spec.seed = std::stoull(value);
    } else if (key == "kernel") {
      spec.kernel.family = kernel_family_from_name(value);
    } else if (key == "lengthscale") {
      spec.kernel.lengthscale = std::stod(value);
    } else if (key == "jitter") {
      spec.kernel.jitter = std::stod(value);
    } else if (key == "noise_sigma") {
      spec.noise_sigma = std::stod(value);
    }
  }
  if (spec.dims.empty()) {
    throw IoError("manifest in '" + dir.string() + "' is missing the shape");
  }

  Shape shape(spec.dims, spec.mode);
  const ObservationFile obs_file = read_observations(dir / "observations.txt");
  if (obs_file.dims != spec.dims || obs_file.mode != spec.mode) {
    throw ValidationError("observation header disagrees with manifest in '" +
                          dir.string() + "'");
  }

  std::vector<Eigen::MatrixXd> factor_mats;
  for (int axis = 0; axis < shape.order(); ++axis) {
    if (axis == shape.mode()) continue;
    factor_mats.push_back(read_matrix(dir / factor_filename(axis)));
  }
  FactorSet factors = FactorSet::create(std::move(factor_mats), shape);

  KernelMatrix kernel = KernelMatrix::from_matrix(read_matrix(dir / "kernel.txt"),
                                                  uniform_grid(shape.mode_size()));
  ObservationSet obs = build_observation_set(shape, factors, obs_file.raw);

  LoadedInstance loaded{
      ProblemInstance::create(std::move(shape), std::move(obs), std::move(factors),
                              std::move(kernel), spec.lambda),
      std::nullopt, spec};
  const auto gt_path = dir / "ground_truth.txt";
  if (std::filesystem::exists(gt_path)) {
    loaded.ground_truth = read_matrix(gt_path);
  }
  return loaded;
}

}  // namespace rkcp
