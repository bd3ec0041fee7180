#include "aane/graph.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"
#include "aane/kernels.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace aane::graph {

double AttributedNetwork::total_weight() const {
  double total = 0.0;
  for (const auto& e : edges) total += e.weight;
  return total;
}

AttributedNetwork build_network(std::span<const EdgeRecord> records, AttributeTable attributes) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < attributes.node_ids.size(); ++i) {
    index.emplace(attributes.node_ids[i], i);
  }
  auto lookup = [&](const std::string& id) {
    const auto it = index.find(id);
    if (it == index.end()) {
      throw Error(ErrorKind::UnknownNode,
                  fmt::format("edge endpoint '{}' is not in the attribute table", id));
    }
    return it->second;
  };

  std::map<std::pair<std::size_t, std::size_t>, double> weights;
  for (const auto& r : records) {
    if (!std::isfinite(r.count) || r.count < 0.0) {
      throw Error(ErrorKind::InputError,
                  fmt::format("edge {}-{} has invalid count {}", r.src, r.dst, r.count));
    }
    const std::size_t a = lookup(r.src), b = lookup(r.dst);
    if (a == b || r.count == 0.0) continue;
    weights[{std::min(a, b), std::max(a, b)}] += r.count;
  }

  AttributedNetwork net;
  net.node_ids = attributes.node_ids;
  net.timestep = attributes.timestep;
  net.attributes = std::move(attributes);
  net.edges.reserve(weights.size());
  for (const auto& [key, w] : weights) net.edges.push_back({key.first, key.second, w});
  return net;
}

Matrix cosine_similarity(const AttributeTable& attributes) {
  return kernels::cosine_similarity(attributes.values);
}

Adjacency normalized_adjacency(const AttributedNetwork& network) {
  const std::size_t n = network.size();
  double max_weight = 0.0;
  for (const auto& e : network.edges) max_weight = std::max(max_weight, e.weight);

  std::vector<std::size_t> degree(n, 0);
  for (const auto& e : network.edges) {
    ++degree[e.u];
    ++degree[e.v];
  }
  Adjacency adj;
  adj.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] = adj.offsets[i] + degree[i];
  adj.neighbors.resize(adj.offsets[n]);
  adj.weights.resize(adj.offsets[n]);
  std::vector<std::size_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  // Edges are sorted by (u, v), so each neighbor list comes out in a fixed order.
  for (const auto& e : network.edges) {
    const double w = e.weight / max_weight;
    adj.neighbors[fill[e.u]] = e.v;
    adj.weights[fill[e.u]++] = w;
    adj.neighbors[fill[e.v]] = e.u;
    adj.weights[fill[e.v]++] = w;
  }
  return adj;
}

std::vector<EdgeRecord> read_edges(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto cs = table.column("src"), cd = table.column("dst"), cc = table.column("count");
  std::vector<EdgeRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    records.push_back({row[cs], row[cd], csv::parse_number(row[cc], path)});
  }
  return records;
}

}  // namespace aane::graph
