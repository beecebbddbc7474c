#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "rkcp/errors.hpp"
#include "rkcp/indexing.hpp"
#include "rkcp/observations.hpp"

namespace rkcp {

/// Render a double with 17 significant digits; round-trips binary64 exactly.
std::string format_g17(double value);

/// Matrix file: first line `# rows=<n> cols=<m>`, then one comma-separated
/// row per line, 17 significant digits.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// Observation file: header `# shape=<n1,...,nd> mode=<k> q=<q>`, then one
/// line per entry with d 0-based indices followed by the value. All indices
/// are 0-based, as everywhere in the library and formats.
struct ObservationFile {
  std::vector<Index> dims;
  int mode = 0;
  std::vector<RawObservation> raw;
};

void write_observations(const std::filesystem::path& path, const ObservationSet& obs);
ObservationFile read_observations(const std::filesystem::path& path);

/// Plain key=value manifest, fixed key order.
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_manifest(
    const std::filesystem::path& path);

}  // namespace rkcp
