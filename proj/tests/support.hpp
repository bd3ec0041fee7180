#pragma once

#include "aane/graph.hpp"
#include "aane/rng.hpp"
#include "aane/types.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

namespace testing {

inline aane::Matrix random_matrix(aane::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  aane::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

inline aane::NodeIds make_ids(std::size_t n) {
  aane::NodeIds ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(fmt::format("v{:03d}", i));
  return ids;
}

inline aane::AttributeTable make_table(const aane::Matrix& values, int timestep = 0) {
  aane::AttributeTable t;
  t.node_ids = make_ids(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index c = 0; c < values.cols(); ++c) t.columns.push_back(fmt::format("f{}", c));
  t.values = values;
  t.timestep = timestep;
  return t;
}

/// Erdos-Renyi graph with integer counts in [1, max_count] and Gaussian attributes.
inline aane::graph::AttributedNetwork random_network(aane::Rng& rng, std::size_t n, Eigen::Index m,
                                                     double p, int max_count = 10) {
  auto table = make_table(random_matrix(rng, static_cast<Eigen::Index>(n), m));
  std::vector<aane::graph::EdgeRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) {
        records.push_back({table.node_ids[i], table.node_ids[j],
                           1.0 + static_cast<double>(rng.below(static_cast<std::uint64_t>(max_count)))});
      }
    }
  }
  return aane::graph::build_network(records, std::move(table));
}

inline std::vector<int> random_labels(aane::Rng& rng, std::size_t n, int k) {
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return labels;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           fmt::format("aane_{}_{}_{}", tag, ::getpid(), counter++);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing
