#pragma once

#include "aane/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace aane::pipeline {

inline constexpr const char* kVersion = "1.0.0";

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct FileDigest {
  std::string path;  // relative to the input or output directory
  std::string sha256;
};

struct RunManifest {
  std::string version = kVersion;
  std::string config_json;
  std::string config_hash;
  std::vector<FileDigest> inputs;
  std::vector<StageTiming> timings;
  std::vector<FileDigest> outputs;  // every file under the output directory except the manifest
  int selected_k = 0;
  std::string selected_method;
};

/// Number of timesteps in the input directory (week_0, week_1, ...). When the
/// config fixes T, every week_<k> for k < T must exist; the InputError names
/// the first missing directory.
int input_timesteps(const config::PipelineConfig& config);

// Each stage reads only what earlier stages persisted under output_dir, so a
// stage can be re-run alone and reproduces its outputs byte for byte.

/// Loads, validates (node universe, edge endpoints) and standardizes every
/// timestep before writing features/week_<t>/{attributes,edges}.csv.
void run_features(const config::PipelineConfig& config);
void run_embed(const config::PipelineConfig& config);
void run_cluster(const config::PipelineConfig& config);
/// Silhouette sweep, Dunn table, stability at the selected K and the
/// (K, method) choice in validate/selection.csv.
void run_validate(const config::PipelineConfig& config);
void run_archetype(const config::PipelineConfig& config);
void run_stats(const config::PipelineConfig& config);

RunManifest run_pipeline(const config::PipelineConfig& config);

/// Digests of every file under the output directory except manifest.json.
std::vector<FileDigest> output_digests(const std::filesystem::path& output_dir);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// K values fitted by the cluster stage: k_range plus any override.
std::vector<int> fitted_ks(const config::PipelineConfig& config);

}  // namespace aane::pipeline
