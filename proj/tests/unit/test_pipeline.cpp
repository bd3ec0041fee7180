#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/pipeline.hpp"
#include "aane/synth.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace aane;

namespace {

synth::SyntheticSpec small_spec(int timesteps) {
  synth::SyntheticSpec spec;
  spec.blocks = 3;
  spec.nodes_per_block = 15;
  spec.timesteps = timesteps;
  spec.features = 4;
  spec.p_in = 0.4;
  spec.p_out = 0.03;
  spec.seed = 11;
  return spec;
}

config::PipelineConfig small_config(const std::filesystem::path& in, const std::filesystem::path& out) {
  config::PipelineConfig c;
  c.input_dir = in;
  c.output_dir = out;
  c.seed = 5;
  c.solver.dimension = 4;
  c.solver.max_iterations = 20;
  c.k_range = {2, 3, 4};
  c.min_archetype_size = 5;
  c.fit.kmeans.n_init = 3;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

template <class F>
ErrorKind error_kind(F&& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("a full run is reproducible and every stage can be replayed") {
  testing::TempDir dir("pipe");
  synth::generate(small_spec(3), dir.path / "in");
  const auto first = pipeline::run_pipeline(small_config(dir.path / "in", dir.path / "out1"));
  const auto second = pipeline::run_pipeline(small_config(dir.path / "in", dir.path / "out2"));

  REQUIRE(!first.outputs.empty());
  CHECK(first.selected_k >= 2);
  std::vector<std::pair<std::string, std::string>> a, b;
  for (const auto& f : first.outputs) a.emplace_back(f.path, f.sha256);
  for (const auto& f : second.outputs) b.emplace_back(f.path, f.sha256);
  CHECK(a == b);

  for (const char* expected : {"features/week_0/attributes.csv", "embeddings/week_2.csv",
                               "clusters/assignments.csv", "validate/silhouette.csv",
                               "validate/selection.csv", "archetypes/summary.csv",
                               "stats/kruskal_wallis.csv", "archetypes/timeline.svg"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir.path / "out1" / expected), expected);
  }

  const auto manifest = nlohmann::json::parse(slurp(dir.path / "out1" / "manifest.json"));
  CHECK(manifest["version"] == pipeline::kVersion);
  CHECK(manifest["outputs"].size() == first.outputs.size());
  CHECK(manifest["timings"].size() == 6);

  // Delete downstream stages and replay them one at a time.
  const auto cfg = small_config(dir.path / "in", dir.path / "out1");
  for (const char* stage : {"clusters", "validate", "archetypes", "stats"}) {
    std::filesystem::remove_all(dir.path / "out1" / stage);
  }
  pipeline::run_cluster(cfg);
  pipeline::run_validate(cfg);
  pipeline::run_archetype(cfg);
  pipeline::run_stats(cfg);
  std::vector<std::pair<std::string, std::string>> replay;
  for (const auto& f : pipeline::output_digests(dir.path / "out1")) replay.emplace_back(f.path, f.sha256);
  CHECK(replay == a);

  // A later stage refuses to run without the earlier one's outputs.
  std::filesystem::remove_all(dir.path / "out1" / "embeddings");
  CHECK_THROWS_AS(pipeline::run_cluster(cfg), Error);
}

TEST_CASE("a single timestep gives one-entry signatures") {
  testing::TempDir dir("pipe_t1");
  synth::generate(small_spec(1), dir.path / "in");
  auto cfg = small_config(dir.path / "in", dir.path / "out");
  cfg.stability = false;
  pipeline::run_pipeline(cfg);
  const auto summary = csv::read(dir.path / "out" / "archetypes" / "summary.csv");
  REQUIRE(!summary.rows.empty());
  for (const auto& row : summary.rows) CHECK(row[1].find('-') == std::string::npos);
}

TEST_CASE("a missing week directory is reported by path") {
  testing::TempDir dir("pipe_missing");
  synth::generate(small_spec(3), dir.path / "in");
  std::filesystem::remove_all(dir.path / "in" / "week_1");
  auto cfg = small_config(dir.path / "in", dir.path / "out");
  cfg.timesteps = 3;
  std::string message;
  CHECK(error_kind([&] { pipeline::input_timesteps(cfg); }, &message) == ErrorKind::InputError);
  CHECK(message.find((dir.path / "in" / "week_1").string()) != std::string::npos);

  // Without a fixed count the consecutive prefix is used.
  cfg.timesteps = 0;
  CHECK(pipeline::input_timesteps(cfg) == 1);
}

TEST_CASE("edges naming unknown nodes are rejected") {
  testing::TempDir dir("pipe_unknown");
  synth::generate(small_spec(2), dir.path / "in");
  {
    std::ofstream out(dir.path / "in" / "week_1" / "edges.csv", std::ios::app);
    out << "n0000,ghost,3\n";
  }
  const auto cfg = small_config(dir.path / "in", dir.path / "out");
  CHECK(error_kind([&] { pipeline::run_features(cfg); }) == ErrorKind::UnknownNode);
}

TEST_CASE("mismatched node sets across weeks are rejected") {
  testing::TempDir dir("pipe_nodes");
  synth::generate(small_spec(2), dir.path / "in");
  const auto path = dir.path / "in" / "week_1" / "attributes.csv";
  auto table = csv::read(path);
  table.rows.pop_back();
  csv::Writer w(table.header);
  for (auto& r : table.rows) w.add_row(r);
  w.save(path);
  const auto cfg = small_config(dir.path / "in", dir.path / "out");
  CHECK(error_kind([&] { pipeline::run_features(cfg); }) == ErrorKind::MismatchedNodes);
}

TEST_CASE("the command line reports errors as JSON with a nonzero exit") {
  const char* cli = std::getenv("AANE_CLI");
  REQUIRE(cli != nullptr);
  testing::TempDir dir("cli");
  const auto err = dir.path / "stderr.txt";
  const std::string cmd = fmt::format("\"{}\" synth --output-dir \"{}\" --blocks 1 2> \"{}\"", cli,
                                      (dir.path / "data").string(), err.string());
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
  const auto text = slurp(err);
  const auto line = text.substr(text.rfind('{'));
  const auto doc = nlohmann::json::parse(line);
  CHECK(doc["error"] == "ConfigError");
  CHECK(doc.contains("message"));

  const std::string ok = fmt::format("\"{}\" --version > \"{}\"", cli, (dir.path / "v.txt").string());
  CHECK(std::system(ok.c_str()) == 0);
  CHECK(slurp(dir.path / "v.txt").find(pipeline::kVersion) != std::string::npos);
}
