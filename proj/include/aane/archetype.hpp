#pragma once

#include "aane/cluster.hpp"
#include "aane/types.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aane::archetype {

inline constexpr std::size_t kDefaultMinSize = 20;

/// Relabeling of `current` that maximizes agreement with `previous`:
/// result[c] is the new name for label c. Solved as a linear assignment
/// problem on the K x K contingency table.
std::vector<int> best_label_permutation(std::span<const int> previous,
                                        std::span<const int> current, int k);

/// Chains the relabeling forward from timestep 0, which is left untouched.
/// Only label names change; co-membership at every timestep is preserved.
/// Throws MismatchedNodes when label vectors differ in length and
/// InvalidArgument when K differs between timesteps.
std::vector<cluster::ClusterAssignment> align_labels(
    std::span<const cluster::ClusterAssignment> assignments);

struct LabelTrajectory {
  std::string node_id;
  std::vector<int> labels;  // one per timestep
};

/// Per-node label sequences read across the (aligned) assignments.
std::vector<LabelTrajectory> trajectories(const NodeIds& node_ids,
                                          std::span<const cluster::ClusterAssignment> aligned);

struct Archetype {
  int id = 0;
  std::vector<int> signature;
  NodeIds members;  // sorted
};

struct ArchetypeTable {
  std::vector<Archetype> archetypes;  // retained, ids 0..R-1 by descending size
  std::vector<Archetype> dropped;     // below min_size, ids continue from R
  std::size_t min_size = kDefaultMinSize;
};

/// Groups nodes by identical trajectory. Groups are ordered by descending
/// size, ties by lexicographic signature, so the result does not depend on
/// the input order.
ArchetypeTable merge_archetypes(std::span<const LabelTrajectory> trajectories,
                                std::size_t min_size = kDefaultMinSize);

/// Absorbs retained archetypes into larger ones whose signature differs in at
/// most `hamming_threshold` timesteps. Archetypes are visited largest first;
/// each survivor keeps its id and signature. Threshold 0 is the identity.
ArchetypeTable fuse_similar(const ArchetypeTable& table, int hamming_threshold);

/// "0-1-1" style rendering of a trajectory.
std::string signature_string(std::span<const int> signature);
std::vector<int> parse_signature(const std::string& text);

/// Members CSV: archetype_id,signature,node_id (retained then dropped).
/// Summary CSV: archetype_id,signature,size,status.
void write_table(const ArchetypeTable& table, const std::filesystem::path& members_path,
                 const std::filesystem::path& summary_path);
ArchetypeTable read_table(const std::filesystem::path& members_path,
                          const std::filesystem::path& summary_path);

}  // namespace aane::archetype
