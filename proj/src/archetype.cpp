#include "aane/archetype.hpp"

#include "aane/csv.hpp"
#include "aane/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

namespace aane::archetype {
namespace {

// Hungarian algorithm (shortest augmenting paths with potentials) for a
// square cost matrix. Returns assignment[row] = column.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = static_cast<int>(j - 1);
  return assignment;
}

Archetype make_archetype(int id, const std::vector<int>& signature, NodeIds members) {
  std::sort(members.begin(), members.end());
  return Archetype{id, signature, std::move(members)};
}

}  // namespace

std::vector<int> best_label_permutation(std::span<const int> previous,
                                        std::span<const int> current, int k) {
  if (previous.size() != current.size()) {
    throw Error(ErrorKind::MismatchedNodes, "label vectors cover different node counts");
  }
  const auto kk = static_cast<std::size_t>(k);
  std::vector<std::vector<double>> cost(kk, std::vector<double>(kk, 0.0));
  for (std::size_t i = 0; i < current.size(); ++i) {
    const int c = current[i], p = previous[i];
    if (c < 0 || c >= k || p < 0 || p >= k) {
      throw Error(ErrorKind::InvalidArgument, fmt::format("label outside [0, {})", k));
    }
    // Rows: current labels, columns: previous labels; maximize overlap.
    cost[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] -= 1.0;
  }
  return solve_assignment(cost);
}

std::vector<cluster::ClusterAssignment> align_labels(
    std::span<const cluster::ClusterAssignment> assignments) {
  std::vector<cluster::ClusterAssignment> out(assignments.begin(), assignments.end());
  for (std::size_t t = 1; t < out.size(); ++t) {
    if (out[t].labels.size() != out[0].labels.size()) {
      throw Error(ErrorKind::MismatchedNodes,
                  fmt::format("timestep {} has {} nodes, timestep 0 has {}", t,
                              out[t].labels.size(), out[0].labels.size()));
    }
    if (out[t].k != out[0].k) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("timestep {} uses K={}, timestep 0 uses K={}", t, out[t].k, out[0].k));
    }
    const auto map = best_label_permutation(out[t - 1].labels, out[t].labels, out[t].k);
    for (int& l : out[t].labels) l = map[static_cast<std::size_t>(l)];
  }
  return out;
}

std::vector<LabelTrajectory> trajectories(const NodeIds& node_ids,
                                          std::span<const cluster::ClusterAssignment> aligned) {
  std::vector<LabelTrajectory> out(node_ids.size());
  for (std::size_t i = 0; i < node_ids.size(); ++i) out[i].node_id = node_ids[i];
  for (const auto& a : aligned) {
    if (a.labels.size() != node_ids.size()) {
      throw Error(ErrorKind::MismatchedNodes,
                  fmt::format("assignment for timestep {} has {} labels for {} nodes", a.timestep,
                              a.labels.size(), node_ids.size()));
    }
    for (std::size_t i = 0; i < node_ids.size(); ++i) out[i].labels.push_back(a.labels[i]);
  }
  return out;
}

ArchetypeTable merge_archetypes(std::span<const LabelTrajectory> trajectories,
                                std::size_t min_size) {
  std::map<std::vector<int>, NodeIds> groups;
  for (const auto& tr : trajectories) groups[tr.labels].push_back(tr.node_id);

  std::vector<std::pair<std::vector<int>, NodeIds>> ordered(groups.begin(), groups.end());
  // std::map already orders by signature, so a stable sort on size breaks ties by signature.
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });

  ArchetypeTable table;
  table.min_size = min_size;
  for (auto& [signature, members] : ordered) {
    if (members.size() >= min_size) {
      table.archetypes.push_back(
          make_archetype(static_cast<int>(table.archetypes.size()), signature, std::move(members)));
    }
  }
  int next_id = static_cast<int>(table.archetypes.size());
  for (auto& [signature, members] : ordered) {
    if (!members.empty() && members.size() < min_size) {
      table.dropped.push_back(make_archetype(next_id++, signature, std::move(members)));
    }
  }
  return table;
}

ArchetypeTable fuse_similar(const ArchetypeTable& table, int hamming_threshold) {
  if (hamming_threshold < 0) {
    throw Error(ErrorKind::InvalidArgument, "hamming threshold must be >= 0");
  }
  if (hamming_threshold == 0) return table;

  auto distance = [](const std::vector<int>& a, const std::vector<int>& b) {
    int d = 0;
    for (std::size_t t = 0; t < a.size(); ++t) d += a[t] != b[t] ? 1 : 0;
    return d;
  };
  std::vector<std::size_t> order(table.archetypes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.archetypes[a].members.size() > table.archetypes[b].members.size();
  });

  std::vector<bool> absorbed(order.size(), false);
  ArchetypeTable out;
  out.min_size = table.min_size;
  out.dropped = table.dropped;
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (absorbed[a]) continue;
    Archetype survivor = table.archetypes[order[a]];
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (absorbed[b]) continue;
      const auto& other = table.archetypes[order[b]];
      if (distance(survivor.signature, other.signature) <= hamming_threshold) {
        survivor.members.insert(survivor.members.end(), other.members.begin(), other.members.end());
        absorbed[b] = true;
      }
    }
    std::sort(survivor.members.begin(), survivor.members.end());
    out.archetypes.push_back(std::move(survivor));
  }
  std::sort(out.archetypes.begin(), out.archetypes.end(),
            [](const Archetype& a, const Archetype& b) { return a.id < b.id; });
  return out;
}

std::string signature_string(std::span<const int> signature) {
  std::string out;
  for (std::size_t t = 0; t < signature.size(); ++t) {
    if (t) out += '-';
    out += std::to_string(signature[t]);
  }
  return out;
}

std::vector<int> parse_signature(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, '-')) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InputError, fmt::format("malformed signature '{}'", text));
    }
  }
  return out;
}

void write_table(const ArchetypeTable& table, const std::filesystem::path& members_path,
                 const std::filesystem::path& summary_path) {
  csv::Writer members({"archetype_id", "signature", "node_id"});
  csv::Writer summary({"archetype_id", "signature", "size", "status"});
  auto emit = [&](const Archetype& a, const char* status) {
    const auto sig = signature_string(a.signature);
    for (const auto& node : a.members) members.add_row({std::to_string(a.id), sig, node});
    summary.add_row({std::to_string(a.id), sig, std::to_string(a.members.size()), status});
  };
  for (const auto& a : table.archetypes) emit(a, "retained");
  for (const auto& a : table.dropped) emit(a, "dropped");
  members.save(members_path);
  summary.save(summary_path);
}

ArchetypeTable read_table(const std::filesystem::path& members_path,
                          const std::filesystem::path& summary_path) {
  const auto summary = csv::read(summary_path);
  const auto id_col = summary.column("archetype_id"), sig_col = summary.column("signature"),
             status_col = summary.column("status");
  ArchetypeTable table;
  table.min_size = 0;
  std::map<int, std::pair<bool, std::size_t>> where;  // id -> (retained, index)
  for (const auto& row : summary.rows) {
    Archetype a;
    a.id = std::stoi(row[id_col]);
    a.signature = parse_signature(row[sig_col]);
    const bool retained = row[status_col] == "retained";
    auto& list = retained ? table.archetypes : table.dropped;
    where[a.id] = {retained, list.size()};
    list.push_back(std::move(a));
  }
  const auto members = csv::read(members_path);
  const auto mid = members.column("archetype_id"), node = members.column("node_id");
  for (const auto& row : members.rows) {
    const auto it = where.find(std::stoi(row[mid]));
    if (it == where.end()) {
      throw Error(ErrorKind::InputError,
                  fmt::format("{}: archetype {} missing from summary", members_path.string(), row[mid]));
    }
    auto& list = it->second.first ? table.archetypes : table.dropped;
    list[it->second.second].members.push_back(row[node]);
  }
  std::size_t smallest = std::numeric_limits<std::size_t>::max();
  for (auto& a : table.archetypes) {
    std::sort(a.members.begin(), a.members.end());
    smallest = std::min(smallest, a.members.size());
  }
  for (auto& a : table.dropped) std::sort(a.members.begin(), a.members.end());
  table.min_size = table.archetypes.empty() ? 0 : smallest;
  return table;
}

}  // namespace aane::archetype
