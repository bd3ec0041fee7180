#include "aane/synth.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aane::synth {

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigError, what); };
  if (blocks < 2) fail("synthetic data needs at least two blocks");
  if (nodes_per_block < 1) fail("nodes_per_block must be positive");
  if (timesteps < 1) fail("timesteps must be positive");
  if (!(p_out >= 0.0 && p_in > p_out && p_in <= 1.0)) fail("need 0 <= p_out < p_in <= 1");
  if (features < 1) fail("features must be positive");
  if (!(switch_fraction >= 0.0 && switch_fraction <= 1.0)) fail("switch_fraction must lie in [0, 1]");
  if (!(persistence >= 0.0 && persistence <= 1.0)) fail("persistence must lie in [0, 1]");
  if (max_count < 1) fail("max_count must be positive");
  if (shift < 0.0) fail("shift must be nonnegative");
}

std::vector<std::string> node_ids(const SyntheticSpec& spec) {
  std::vector<std::string> ids;
  const int n = spec.blocks * spec.nodes_per_block;
  for (int i = 0; i < n; ++i) ids.push_back(fmt::format("n{:04d}", i));
  return ids;
}

Dataset generate(const SyntheticSpec& spec, const std::filesystem::path& directory) {
  spec.validate();
  const auto ids = node_ids(spec);
  const auto n = ids.size();
  Rng rng(spec.seed);

  std::vector<int> initial(n), switched(n);
  for (std::size_t i = 0; i < n; ++i) initial[i] = static_cast<int>(i) / spec.nodes_per_block;
  switched = initial;
  const auto movers = static_cast<std::size_t>(spec.switch_fraction * spec.nodes_per_block + 0.5);
  for (int b = 0; b < spec.blocks; ++b) {
    std::vector<std::size_t> members(static_cast<std::size_t>(spec.nodes_per_block));
    std::iota(members.begin(), members.end(), static_cast<std::size_t>(b * spec.nodes_per_block));
    // Partial Fisher-Yates picks the movers.
    for (std::size_t m = 0; m < movers; ++m) {
      const auto j = m + rng.below(members.size() - m);
      std::swap(members[m], members[j]);
      switched[members[m]] = (b + 1) % spec.blocks;
    }
  }

  std::vector<std::vector<double>> node_effect(n, std::vector<double>(static_cast<std::size_t>(spec.features)));
  for (auto& row : node_effect) {
    for (double& v : row) v = rng.normal();
  }
  const double fixed = std::sqrt(spec.persistence), fresh = std::sqrt(1.0 - spec.persistence);

  Dataset data;
  const int change_at = spec.timesteps / 2;
  csv::Writer truth({"node_id", "timestep", "block"});
  for (int t = 0; t < spec.timesteps; ++t) {
    const auto& block = (t >= change_at && spec.timesteps > 1) ? switched : initial;
    data.blocks.push_back(block);
    const auto week = directory / fmt::format("week_{}", t);

    std::vector<std::string> header{"node_id"};
    for (int f = 0; f < spec.features; ++f) header.push_back(fmt::format("f{}", f));
    csv::Writer attrs(header);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> row{ids[i]};
      for (int f = 0; f < spec.features; ++f) {
        const double mean = (block[i] % spec.features == f) ? spec.shift : 0.0;
        const double noise = fixed * node_effect[i][static_cast<std::size_t>(f)] + fresh * rng.normal();
        row.push_back(csv::format_number(mean + noise));
      }
      attrs.add_row(std::move(row));
    }
    attrs.save(week / "attributes.csv");

    csv::Writer edges({"src", "dst", "count"});
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double p = block[i] == block[j] ? spec.p_in : spec.p_out;
        if (rng.uniform() < p) {
          const auto count = 1 + rng.below(static_cast<std::uint64_t>(spec.max_count));
          edges.add_row({ids[i], ids[j], std::to_string(count)});
        }
      }
    }
    edges.save(week / "edges.csv");
    for (std::size_t i = 0; i < n; ++i) {
      truth.add_row({ids[i], std::to_string(t), std::to_string(block[i])});
    }
  }
  truth.save(directory / "ground_truth.csv");
  return data;
}

}  // namespace aane::synth
