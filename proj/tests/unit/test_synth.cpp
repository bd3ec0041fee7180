#include "aane/csv.hpp"
#include "aane/digest.hpp"
#include "aane/error.hpp"
#include "aane/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>

using namespace aane;

namespace {

synth::SyntheticSpec small_spec(std::uint64_t seed) {
  synth::SyntheticSpec spec;
  spec.blocks = 3;
  spec.nodes_per_block = 10;
  spec.timesteps = 4;
  spec.features = 4;
  spec.switch_fraction = 0.2;
  spec.seed = seed;
  return spec;
}

std::map<std::string, std::string> digests(const std::filesystem::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), root).string()] = digest::sha256_file(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("the same seed gives byte-identical datasets") {
  testing::TempDir a("synth_a"), b("synth_b"), c("synth_c");
  synth::generate(small_spec(7), a.path);
  synth::generate(small_spec(7), b.path);
  synth::generate(small_spec(8), c.path);
  const auto da = digests(a.path);
  CHECK(da.size() == 1 + 2 * 4);
  CHECK(da == digests(b.path));
  CHECK(da != digests(c.path));
}

TEST_CASE("generated files have the documented layout") {
  testing::TempDir dir("synth_layout");
  const auto spec = small_spec(1);
  const auto data = synth::generate(spec, dir.path);
  const auto ids = synth::node_ids(spec);
  REQUIRE(ids.size() == 30);
  CHECK(ids[0] == "n0000");

  const auto attrs = csv::read(dir.path / "week_0" / "attributes.csv");
  CHECK(attrs.header == std::vector<std::string>{"node_id", "f0", "f1", "f2", "f3"});
  CHECK(attrs.rows.size() == 30);
  const auto edges = csv::read(dir.path / "week_2" / "edges.csv");
  for (const auto& row : edges.rows) {
    const double count = csv::parse_number(row[2], {});
    CHECK(count >= 1);
    CHECK(count <= spec.max_count);
  }
  const auto truth = csv::read(dir.path / "ground_truth.csv");
  CHECK(truth.rows.size() == 30 * 4);
  REQUIRE(data.blocks.size() == 4);
  for (std::size_t i = 0; i < 30; ++i) CHECK(data.blocks[0][i] == static_cast<int>(i / 10));
}

TEST_CASE("movers switch to the next block in the second half") {
  testing::TempDir dir("synth_move");
  const auto spec = small_spec(3);
  const auto data = synth::generate(spec, dir.path);
  int moved = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    const int start = data.blocks[0][i];
    CHECK(data.blocks[1][i] == start);
    const int late = data.blocks[3][i];
    CHECK(data.blocks[2][i] == late);
    if (late != start) {
      CHECK(late == (start + 1) % 3);
      ++moved;
    }
  }
  CHECK(moved == 3 * 2);
}

TEST_CASE("invalid generator settings are rejected") {
  auto rejects = [](auto mutate) {
    auto spec = small_spec(0);
    mutate(spec);
    try {
      spec.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::ConfigError;
    }
    return false;
  };
  CHECK(rejects([](auto& s) { s.blocks = 0; }));
  CHECK(rejects([](auto& s) { s.p_in = 1.5; }));
  CHECK(rejects([](auto& s) { s.timesteps = 0; }));
  CHECK(rejects([](auto& s) { s.switch_fraction = -0.1; }));
  CHECK(rejects([](auto& s) { s.persistence = 2; }));
  CHECK(rejects([](auto& s) { s.features = 0; }));
}
