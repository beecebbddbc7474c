#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rkcp/io.hpp"
#include "rkcp/observations.hpp"
#include "rkcp/problemgen.hpp"
#include "rkcp/rng.hpp"

using rkcp::Index;
using rkcp::RawObservation;
using rkcp::Shape;

namespace {

rkcp::FactorSet random_factors(const Shape& shape, Index rank, std::uint64_t seed) {
  rkcp::SplitMix64 rng(seed);
  std::vector<Eigen::MatrixXd> mats;
  for (int axis = 0; axis < shape.order(); ++axis) {
    if (axis == shape.mode()) continue;
    Eigen::MatrixXd f(shape.extent(axis), rank);
    for (Index i = 0; i < f.rows(); ++i) {
      for (Index j = 0; j < f.cols(); ++j) f(i, j) = rng.next_uniform(-1.0, 1.0);
    }
    mats.push_back(std::move(f));
  }
  return rkcp::FactorSet::create(std::move(mats), shape);
}

}  // namespace

TEST_CASE("kr_row hand examples") {
  const Shape shape({2, 3, 2}, 1);

  SUBCASE("all-ones factors give the all-ones row") {
    auto ones = rkcp::FactorSet::create(
        {Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2)}, shape);
    CHECK(rkcp::kr_row(ones, shape, 3) == Eigen::RowVectorXd::Ones(2));
  }

  SUBCASE("one Hadamard product, evaluated by hand") {
    Eigen::MatrixXd a0(2, 2), a2(2, 2);
    a0 << 1, 2, 9, 9;
    a2 << 3, 4, 9, 9;
    auto factors = rkcp::FactorSet::create({a0, a2}, shape);
    const Eigen::RowVectorXd z = rkcp::kr_row(factors, shape, 0);  // rows (0, 0)
    CHECK(z(0) == 3.0);
    CHECK(z(1) == 8.0);
  }

  SUBCASE("a zero factor row absorbs") {
    Eigen::MatrixXd a0 = Eigen::MatrixXd::Zero(2, 2);
    Eigen::MatrixXd a2 = Eigen::MatrixXd::Ones(2, 2);
    auto factors = rkcp::FactorSet::create({a0, a2}, shape);
    CHECK(rkcp::kr_row(factors, shape, 1).isZero(0.0));
  }

  SUBCASE("column out of range") {
    auto ones = rkcp::FactorSet::create(
        {Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(2, 2)}, shape);
    CHECK_THROWS_AS(rkcp::kr_row(ones, shape, 4), rkcp::IndexError);
  }
}

TEST_CASE("kr_row matches the materialized Khatri-Rao product") {
  const Shape shape({4, 3, 5}, 2);
  auto factors = random_factors(shape, 3, 99);
  const Eigen::MatrixXd z_full =
      oracles::full_khatri_rao(factors.factors(), shape.dims(), shape.mode());
  for (Index col = 0; col < shape.complement_size(); ++col) {
    CHECK(oracles::rel_err(rkcp::kr_row(factors, shape, col), z_full.row(col)) == 0.0);
  }
}

TEST_CASE("build_observation_set") {
  const Shape shape({2, 3, 2}, 0);
  auto factors = random_factors(shape, 2, 7);

  SUBCASE("empty input gives q = 0 with empty slices") {
    auto obs = rkcp::build_observation_set(shape, factors, {});
    CHECK(obs.q() == 0);
    CHECK(obs.slice(0).empty());
    CHECK(obs.slice(1).empty());
  }

  SUBCASE("one entry lands at the worked coordinate (1, 5)") {
    std::vector<RawObservation> raw = {{{1, 2, 1}, 2.5}};
    auto obs = rkcp::build_observation_set(shape, factors, raw);
    REQUIRE(obs.q() == 1);
    CHECK(obs.entries()[0].row == 1);
    CHECK(obs.entries()[0].col == 5);
    CHECK(obs.entries()[0].value == 2.5);
  }

  SUBCASE("two entries in one slice partition together") {
    std::vector<RawObservation> raw = {{{1, 0, 0}, 1.0}, {{1, 2, 1}, 2.0}};
    auto obs = rkcp::build_observation_set(shape, factors, raw);
    CHECK(obs.slice(0).empty());
    CHECK(obs.slice(1).size() == 2);
  }

  SUBCASE("duplicates are rejected, naming the first duplicate") {
    std::vector<RawObservation> raw = {{{0, 1, 0}, 1.0}, {{0, 1, 0}, 2.0}};
    CHECK_THROWS_WITH_AS(rkcp::build_observation_set(shape, factors, raw),
                         doctest::Contains("0,1,0"), rkcp::ValidationError);
  }

  SUBCASE("out-of-range multi-index is a domain error") {
    std::vector<RawObservation> raw = {{{0, 3, 0}, 1.0}};
    CHECK_THROWS_AS(rkcp::build_observation_set(shape, factors, raw), rkcp::IndexError);
  }
}

TEST_CASE("sparse_mttkrp hand examples") {
  SUBCASE("q = 0 gives the zero matrix") {
    const Shape shape({2, 2}, 0);
    auto factors = random_factors(shape, 2, 3);
    auto obs = rkcp::build_observation_set(shape, factors, {});
    CHECK(rkcp::sparse_mttkrp(obs).isZero(0.0));
  }

  SUBCASE("single entry: one scaled row") {
    // y = 2 with z = (3, 1) in slice 0 of n = 2.
    const Shape shape({2, 2}, 0);
    Eigen::MatrixXd a1(2, 2);
    a1 << 3, 1, 9, 9;
    auto factors = rkcp::FactorSet::create({a1}, shape);
    std::vector<RawObservation> raw = {{{0, 0}, 2.0}};
    auto obs = rkcp::build_observation_set(shape, factors, raw);
    const Eigen::MatrixXd b = rkcp::sparse_mttkrp(obs);
    CHECK(b(0, 0) == 6.0);
    CHECK(b(0, 1) == 2.0);
    CHECK(b(1, 0) == 0.0);
    CHECK(b(1, 1) == 0.0);
  }
}

TEST_CASE("sparse_mttkrp equals the dense product T Z") {
  rkcp::SplitMix64 rng(5150);
  for (int trial = 0; trial < 8; ++trial) {
    rkcp::GenSpec spec;
    spec.dims = trial % 2 ? std::vector<Index>{6, 5, 4} : std::vector<Index>{2, 3, 2};
    spec.mode = trial % static_cast<int>(spec.dims.size());
    spec.rank = 2 + trial % 2;
    const Shape shape(spec.dims, spec.mode);
    spec.q = std::min<Index>(shape.total_size(), 1 + static_cast<Index>(rng.next_below(40)));
    spec.seed = 1000 + static_cast<std::uint64_t>(trial);
    const auto gen = rkcp::generate(spec);
    const auto& p = gen.instance;

    // Reconstruct the raw list for the oracle unfolding.
    std::vector<RawObservation> raw;
    for (const auto& entry : p.obs.entries()) {
      raw.push_back({rkcp::multi_index_from_coords(shape, {entry.row, entry.col}),
                     entry.value});
    }
    const Eigen::MatrixXd z_full =
        oracles::full_khatri_rao(p.factors.factors(), spec.dims, spec.mode);
    const Eigen::MatrixXd t_full = oracles::full_unfolding(
        spec.dims, spec.mode, shape.mode_size(), shape.complement_size(), raw);
    CHECK(oracles::rel_err(rkcp::sparse_mttkrp(p.obs), t_full * z_full) <= 1e-13);
  }
}

TEST_CASE("cached rows stay consistent with kr_row") {
  rkcp::GenSpec spec;
  spec.dims = {5, 4, 3};
  spec.mode = 1;
  spec.rank = 3;
  spec.q = 30;
  spec.seed = 321;
  const auto gen = rkcp::generate(spec);
  const auto& obs = gen.instance.obs;
  for (Index m = 0; m < obs.q(); ++m) {
    const Eigen::RowVectorXd fresh =
        rkcp::kr_row(gen.instance.factors, gen.instance.shape, obs.entries()[m].col);
    CHECK(obs.cached_rows().row(m) == fresh);
  }
}

TEST_CASE("slices are a partition of [0, q)") {
  rkcp::GenSpec spec;
  spec.dims = {7, 3, 4};
  spec.rank = 2;
  spec.q = 50;
  spec.seed = 11;
  const auto gen = rkcp::generate(spec);
  const auto& obs = gen.instance.obs;
  std::vector<int> hits(static_cast<std::size_t>(obs.q()), 0);
  for (Index i = 0; i < gen.instance.n(); ++i) {
    for (const Index m : obs.slice(i)) {
      CHECK(obs.entries()[static_cast<std::size_t>(m)].row == i);
      hits[static_cast<std::size_t>(m)] += 1;
    }
  }
  for (const int h : hits) CHECK(h == 1);
}

TEST_CASE("observation file round-trips bit-exactly") {
  rkcp::GenSpec spec;
  spec.dims = {4, 3, 3};
  spec.rank = 2;
  spec.q = 17;
  spec.seed = 77;
  spec.noise_sigma = 0.3;  // irrational-looking values
  const auto gen = rkcp::generate(spec);

  const auto dir = std::filesystem::temp_directory_path() / "rkcp_obs_roundtrip";
  std::filesystem::create_directories(dir);
  const auto path = dir / "observations.txt";
  rkcp::write_observations(path, gen.instance.obs);

  const rkcp::ObservationFile file = rkcp::read_observations(path);
  CHECK(file.dims == spec.dims);
  CHECK(file.mode == spec.mode);
  REQUIRE(static_cast<Index>(file.raw.size()) == spec.q);

  auto reload = rkcp::build_observation_set(gen.instance.shape, gen.instance.factors,
                                            file.raw);
  for (Index m = 0; m < reload.q(); ++m) {
    CHECK(reload.entries()[m].row == gen.instance.obs.entries()[m].row);
    CHECK(reload.entries()[m].col == gen.instance.obs.entries()[m].col);
    CHECK(reload.entries()[m].value == gen.instance.obs.entries()[m].value);  // bit-exact
  }

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "# shape=4,3,3 mode=0 q=17");
  std::filesystem::remove_all(dir);
}
