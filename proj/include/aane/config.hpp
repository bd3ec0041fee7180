#pragma once

#include "aane/cluster.hpp"
#include "aane/embed.hpp"
#include "aane/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aane::config {

struct PipelineConfig {
  std::filesystem::path input_dir;
  std::filesystem::path output_dir = "aane_out";
  int timesteps = 0;  // 0: count the consecutive week_<k> directories
  std::uint64_t seed = 0;
  int threads = 0;  // 0: OpenMP default

  embed::SolverConfig solver;

  std::vector<int> k_range{2, 3, 4, 5, 6};
  std::vector<cluster::Method> methods{cluster::Method::KMeans, cluster::Method::Gmm};
  std::optional<int> k_override;  // pins K regardless of the silhouette optimum
  cluster::FitOptions fit;
  bool stability = true;

  std::size_t min_archetype_size = 20;
  int fuse_threshold = 0;

  double alpha = 0.05;
  stats::Correction correction = stats::Correction::Holm;
  std::string start_date;  // YYYY-MM-DD of timestep 0; empty labels weeks week_<t>

  void validate() const;
};

/// Reads a JSON config. Relative paths are resolved against the file's
/// directory. Unknown keys are rejected with ConfigError.
PipelineConfig load(const std::filesystem::path& path);

/// Parses a JSON document; relative paths resolve against `base`.
PipelineConfig parse(const std::string& text, const std::filesystem::path& base = {});

/// Canonical JSON (sorted keys, fixed formatting) used for hashing.
std::string to_json(const PipelineConfig& config);

/// "2-6", "2..6" or "2,3,5".
std::vector<int> parse_k_range(const std::string& text);

/// "kmeans", "gmm" or "both".
std::vector<cluster::Method> parse_methods(const std::string& text);

}  // namespace aane::config
