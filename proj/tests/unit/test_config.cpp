#include "aane/config.hpp"
#include "aane/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace aane;
using cluster::Method;

namespace {

ErrorKind parse_error(const std::string& text) {
  try {
    config::parse(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("a full config parses") {
  const auto c = config::parse(R"({
    "input_dir": "/data/in", "output_dir": "/data/out", "timesteps": 5, "seed": 9,
    "embedding": {"dimension": 8, "lambda": 0.1, "rho": 2, "max_iterations": 20, "primal_tolerance": 1e-3},
    "clustering": {"k_range": [2, 3], "methods": ["gmm"], "k_override": 3, "kmeans_restarts": 4},
    "validation": {"stability": false},
    "archetype": {"min_size": 10, "fuse_threshold": 1},
    "stats": {"alpha": 0.01, "correction": "bh", "start_date": "2020-03-02"}
  })");
  CHECK(c.input_dir == "/data/in");
  CHECK(c.timesteps == 5);
  CHECK(c.seed == 9);
  CHECK(c.solver.dimension == 8);
  CHECK(c.solver.lambda == 0.1);
  CHECK(c.solver.max_iterations == 20);
  CHECK(c.k_range == std::vector<int>{2, 3});
  CHECK(c.methods == std::vector<Method>{Method::Gmm});
  CHECK(c.k_override == 3);
  CHECK(c.fit.kmeans.n_init == 4);
  CHECK_FALSE(c.stability);
  CHECK(c.min_archetype_size == 10);
  CHECK(c.fuse_threshold == 1);
  CHECK(c.alpha == 0.01);
  CHECK(c.correction == stats::Correction::BenjaminiHochberg);
  CHECK(c.start_date == "2020-03-02");
}

TEST_CASE("defaults apply to an empty object") {
  const auto c = config::parse("{}");
  CHECK(c.solver.lambda == 0.05);
  CHECK(c.solver.rho == 5.0);
  CHECK(c.k_range == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(c.min_archetype_size == 20);
  CHECK(c.correction == stats::Correction::Holm);
}

TEST_CASE("bad configs are rejected as configuration errors") {
  CHECK(parse_error(R"({"colour": 1})") == ErrorKind::ConfigError);
  CHECK(parse_error(R"({"embedding": {"dim": 3}})") == ErrorKind::ConfigError);
  CHECK(parse_error(R"({"clustering": {"k_range": [1, 2]}})") == ErrorKind::ConfigError);
  CHECK(parse_error(R"({"stats": {"alpha": 2}})") == ErrorKind::ConfigError);
  CHECK(parse_error(R"({"clustering": {"methods": ["spectral"]}})") == ErrorKind::ConfigError);
  CHECK(parse_error("{not json") == ErrorKind::ConfigError);
  CHECK(parse_error(R"({"seed": "nine"})") == ErrorKind::ConfigError);
}

TEST_CASE("relative paths resolve against the config file") {
  testing::TempDir dir("config");
  {
    std::ofstream out(dir.path / "run.json");
    out << R"({"input_dir": "data", "output_dir": "out"})";
  }
  const auto c = config::load(dir.path / "run.json");
  CHECK(c.input_dir == dir.path / "data");
  CHECK(c.output_dir == dir.path / "out");
  CHECK_THROWS_AS(config::load(dir.path / "missing.json"), Error);
}

TEST_CASE("K ranges and method lists") {
  CHECK(config::parse_k_range("2-6") == std::vector<int>{2, 3, 4, 5, 6});
  CHECK(config::parse_k_range("3..4") == std::vector<int>{3, 4});
  CHECK(config::parse_k_range("2,5") == std::vector<int>{2, 5});
  CHECK_THROWS_AS(config::parse_k_range("6-2"), Error);
  CHECK_THROWS_AS(config::parse_k_range("x"), Error);
  CHECK(config::parse_methods("both") == std::vector<Method>{Method::KMeans, Method::Gmm});
  CHECK(config::parse_methods("gmm") == std::vector<Method>{Method::Gmm});
}

TEST_CASE("canonical JSON is stable and round trips") {
  const auto c = config::parse(R"({"seed": 3, "clustering": {"k_range": [4, 5]}, "threads": 2})");
  const auto text = config::to_json(c);
  CHECK(text == config::to_json(config::parse(text)));
  // Thread count does not change results and stays out of the canonical form.
  auto d = c;
  d.threads = 8;
  CHECK(config::to_json(d) == text);
  d.seed = 4;
  CHECK(config::to_json(d) != text);
}
