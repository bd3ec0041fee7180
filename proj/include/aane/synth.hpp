#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace aane::synth {

/// Planted-partition generator. Each block owns one attribute direction
/// (block b is shifted by `shift` standard deviations in feature b mod M);
/// the remaining features are pure noise. Noise has unit variance, split into
/// a per-node part fixed over time (share `persistence`) and a fresh weekly
/// part. From timestep T/2 on, a fraction of every block's nodes moves to the
/// next block.
struct SyntheticSpec {
  int blocks = 4;
  int nodes_per_block = 50;
  int timesteps = 17;
  double p_in = 0.3;
  double p_out = 0.02;
  double shift = 3.0;
  int features = 6;
  double switch_fraction = 0.1;
  double persistence = 0.8;
  int max_count = 20;  // edge counts are uniform on [1, max_count]
  std::uint64_t seed = 0;

  void validate() const;
};

struct Dataset {
  std::vector<std::vector<int>> blocks;  // blocks[t][node]
};

/// Node ids are "n0000", "n0001", ... in block-major order.
std::vector<std::string> node_ids(const SyntheticSpec& spec);

/// Writes week_<t>/edges.csv, week_<t>/attributes.csv and ground_truth.csv
/// (node_id,timestep,block). Returns the planted memberships.
Dataset generate(const SyntheticSpec& spec, const std::filesystem::path& directory);

}  // namespace aane::synth
