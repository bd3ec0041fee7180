#pragma once

#include "aane/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aane::graph {

struct EdgeRecord {
  std::string src;
  std::string dst;
  double count = 0.0;
};

struct Edge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 0.0;
};

/// One timestep's movement network. Node order is the attribute table's row
/// order, which fixes the row order of every downstream matrix.
struct AttributedNetwork {
  NodeIds node_ids;
  std::vector<Edge> edges;  // sorted by (u, v), one per unordered pair
  AttributeTable attributes;
  int timestep = 0;

  std::size_t size() const { return node_ids.size(); }
  double total_weight() const;
};

/// Sums parallel and reversed records, drops self-loops and zero counts.
/// Throws UnknownNode for endpoints absent from the attribute table.
AttributedNetwork build_network(std::span<const EdgeRecord> records, AttributeTable attributes);

/// Cosine similarity of attribute rows (zero rows: 0 off-diagonal, 1 on it).
Matrix cosine_similarity(const AttributeTable& attributes);

/// Symmetric CSR adjacency with weights divided by the largest edge weight.
Adjacency normalized_adjacency(const AttributedNetwork& network);

std::vector<EdgeRecord> read_edges(const std::filesystem::path& path);

}  // namespace aane::graph
