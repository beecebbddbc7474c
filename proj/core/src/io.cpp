#include "rkcp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rkcp {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + token + "' in '" + path.string() + "'");
  }
}

Index parse_index(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw IoError("bad integer field '" + token + "' in '" + path.string() + "'");
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_output(path);
  out << "# rows=" << m.rows() << " cols=" << m.cols() << "\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_g17(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string header;
  std::getline(in, header);
  Index rows = 0, cols = 0;
  if (std::sscanf(header.c_str(), "# rows=%ld cols=%ld", &rows, &cols) != 2 ||
      rows < 0 || cols < 0) {
    throw IoError("bad matrix header in '" + path.string() + "': " + header);
  }
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  for (Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw IoError("matrix '" + path.string() + "' truncated at row " + std::to_string(i));
    }
    const auto tokens = split(line, ',');
    if (static_cast<Index>(tokens.size()) != cols) {
      throw IoError("row " + std::to_string(i) + " of '" + path.string() + "' has " +
                    std::to_string(tokens.size()) + " fields, expected " +
                    std::to_string(cols));
    }
    for (Index j = 0; j < cols; ++j) {
      m(i, j) = parse_double(tokens[static_cast<std::size_t>(j)], path);
    }
  }
  return m;
}

void write_observations(const std::filesystem::path& path, const ObservationSet& obs) {
  std::ofstream out = open_output(path);
  const Shape& shape = obs.shape();
  out << "# shape=";
  for (int a = 0; a < shape.order(); ++a) {
    if (a) out << ",";
    out << shape.extent(a);
  }
  out << " mode=" << shape.mode() << " q=" << obs.q() << "\n";
  for (const ObservationEntry& entry : obs.entries()) {
    const auto multi = multi_index_from_coords(shape, {entry.row, entry.col});
    for (const Index idx : multi) out << idx << ",";
    out << format_g17(entry.value) << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ObservationFile read_observations(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string header;
  std::getline(in, header);

  ObservationFile file;
  Index q = -1;
  {
    std::stringstream ss(header);
    std::string tok;
    while (ss >> tok) {
      if (tok.rfind("shape=", 0) == 0) {
        for (const auto& piece : split(tok.substr(6), ',')) {
          file.dims.push_back(parse_index(piece, path));
        }
      } else if (tok.rfind("mode=", 0) == 0) {
        file.mode = static_cast<int>(parse_index(tok.substr(5), path));
      } else if (tok.rfind("q=", 0) == 0) {
        q = parse_index(tok.substr(2), path);
      }
    }
  }
  if (file.dims.empty() || q < 0) {
    throw IoError("bad observation header in '" + path.string() + "': " + header);
  }

  const std::size_t d = file.dims.size();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tokens = split(line, ',');
    if (tokens.size() != d + 1) {
      throw IoError("observation line in '" + path.string() + "' has " +
                    std::to_string(tokens.size()) + " fields, expected " +
                    std::to_string(d + 1));
    }
    RawObservation raw;
    raw.multi_index.reserve(d);
    for (std::size_t a = 0; a < d; ++a) {
      raw.multi_index.push_back(parse_index(tokens[a], path));
    }
    raw.value = parse_double(tokens[d], path);
    file.raw.push_back(std::move(raw));
  }
  if (static_cast<Index>(file.raw.size()) != q) {
    throw IoError("'" + path.string() + "' announces q=" + std::to_string(q) +
                  " but carries " + std::to_string(file.raw.size()) + " entries");
  }
  return file;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_output(path);
  for (const auto& [key, value] : entries) {
    out << key << "=" << value << "\n";
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::pair<std::string, std::string>> read_manifest(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("bad manifest line in '" + path.string() + "': " + line);
    }
    entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return entries;
}

}  // namespace rkcp
