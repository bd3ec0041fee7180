#include "aane/archetype.hpp"
#include "aane/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

using namespace aane;
using archetype::LabelTrajectory;

namespace {

cluster::ClusterAssignment assignment(int t, std::vector<int> labels, int k) {
  cluster::ClusterAssignment a;
  a.timestep = t;
  a.labels = std::move(labels);
  a.k = k;
  return a;
}

int agreement(std::span<const int> a, std::span<const int> b) {
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return same;
}

// Maximum agreement over every relabelling of `current`.
int best_agreement(std::span<const int> previous, std::span<const int> current, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  int best = -1;
  do {
    std::vector<int> relabelled(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) relabelled[i] = perm[static_cast<std::size_t>(current[i])];
    best = std::max(best, agreement(previous, relabelled));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool co_membership_equal(std::span<const int> a, std::span<const int> b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

std::vector<LabelTrajectory> repeat(const std::string& prefix, std::vector<int> labels, int count) {
  std::vector<LabelTrajectory> out;
  for (int i = 0; i < count; ++i) out.push_back({fmt::format("{}{:03d}", prefix, i), labels});
  return out;
}

std::vector<LabelTrajectory> concat(std::initializer_list<std::vector<LabelTrajectory>> parts) {
  std::vector<LabelTrajectory> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST_CASE("a swapped labelling is undone") {
  const std::vector<int> prev{0, 0, 0, 1, 1, 1};
  const std::vector<int> cur{1, 1, 1, 0, 0, 0};
  const auto perm = archetype::best_label_permutation(prev, cur, 2);
  CHECK(perm == std::vector<int>{1, 0});

  const std::vector<cluster::ClusterAssignment> seq{assignment(0, prev, 2), assignment(1, cur, 2)};
  const auto aligned = archetype::align_labels(seq);
  CHECK(aligned[0].labels == prev);
  CHECK(aligned[1].labels == prev);
}

TEST_CASE("alignment reaches the best agreement found by exhaustive search") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(4));
    const auto prev = testing::random_labels(rng, 25, k);
    auto cur = prev;
    for (auto& l : cur) {
      if (rng.uniform() < 0.3) l = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    }
    // Scramble the names.
    std::vector<int> names(static_cast<std::size_t>(k));
    std::iota(names.begin(), names.end(), 0);
    for (std::size_t i = names.size() - 1; i > 0; --i) std::swap(names[i], names[rng.below(i + 1)]);
    for (auto& l : cur) l = names[static_cast<std::size_t>(l)];

    const auto perm = archetype::best_label_permutation(prev, cur, k);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> identity(static_cast<std::size_t>(k));
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(sorted == identity);

    std::vector<int> relabelled(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) relabelled[i] = perm[static_cast<std::size_t>(cur[i])];
    CHECK(agreement(prev, relabelled) == best_agreement(prev, cur, k));
  }
}

TEST_CASE("alignment preserves every partition and leaves the first timestep alone") {
  Rng rng(2);
  std::vector<cluster::ClusterAssignment> seq;
  for (int t = 0; t < 6; ++t) seq.push_back(assignment(t, testing::random_labels(rng, 30, 4), 4));
  const auto aligned = archetype::align_labels(seq);
  REQUIRE(aligned.size() == seq.size());
  CHECK(aligned[0].labels == seq[0].labels);
  for (std::size_t t = 0; t < seq.size(); ++t) {
    CHECK(co_membership_equal(seq[t].labels, aligned[t].labels));
    CHECK(aligned[t].timestep == seq[t].timestep);
  }
  for (std::size_t t = 1; t < seq.size(); ++t) {
    CHECK(agreement(aligned[t - 1].labels, aligned[t].labels) ==
          best_agreement(aligned[t - 1].labels, seq[t].labels, 4));
  }
}

TEST_CASE("alignment rejects inconsistent inputs") {
  try {
    const std::vector<cluster::ClusterAssignment> seq{assignment(0, {0, 1, 0}, 2), assignment(1, {0, 1}, 2)};
    archetype::align_labels(seq);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MismatchedNodes);
  }
  const std::vector<cluster::ClusterAssignment> seq{assignment(0, {0, 1, 0}, 2), assignment(1, {0, 1, 2}, 3)};
  CHECK_THROWS_AS(archetype::align_labels(seq), Error);
}

TEST_CASE("trajectories read labels across timesteps") {
  const auto ids = testing::make_ids(3);
  const std::vector<cluster::ClusterAssignment> seq{assignment(0, {0, 1, 1}, 2), assignment(1, {1, 1, 0}, 2)};
  const auto tr = archetype::trajectories(ids, seq);
  REQUIRE(tr.size() == 3);
  CHECK(tr[0].node_id == ids[0]);
  CHECK(tr[0].labels == std::vector<int>{0, 1});
  CHECK(tr[2].labels == std::vector<int>{1, 0});
}

TEST_CASE("merging groups identical trajectories and applies the size floor") {
  const auto input = concat({repeat("a", {0, 0, 1}, 30), repeat("b", {1, 1, 1}, 20), repeat("c", {0, 1, 1}, 19)});
  const auto table = archetype::merge_archetypes(input, 20);
  REQUIRE(table.archetypes.size() == 2);
  REQUIRE(table.dropped.size() == 1);
  CHECK(table.archetypes[0].id == 0);
  CHECK(table.archetypes[0].signature == std::vector<int>{0, 0, 1});
  CHECK(table.archetypes[0].members.size() == 30);
  CHECK(table.archetypes[1].members.size() == 20);
  CHECK(table.dropped[0].id == 2);
  CHECK(table.dropped[0].members.size() == 19);
  CHECK(std::is_sorted(table.archetypes[0].members.begin(), table.archetypes[0].members.end()));
}

TEST_CASE("merging does not depend on input order and partitions the nodes") {
  Rng rng(3);
  std::vector<LabelTrajectory> input;
  for (int i = 0; i < 300; ++i) {
    std::vector<int> sig(4);
    for (auto& s : sig) s = rng.uniform() < 0.85 ? (i % 3) : static_cast<int>(rng.below(3));
    input.push_back({fmt::format("n{:04d}", i), sig});
  }
  const auto a = archetype::merge_archetypes(input, 5);
  auto shuffled = input;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
  const auto b = archetype::merge_archetypes(shuffled, 5);

  auto flatten = [](const archetype::ArchetypeTable& t) {
    std::vector<std::tuple<int, std::vector<int>, NodeIds>> out;
    for (const auto* list : {&t.archetypes, &t.dropped}) {
      for (const auto& x : *list) out.emplace_back(x.id, x.signature, x.members);
    }
    return out;
  };
  CHECK(flatten(a) == flatten(b));

  // Every node appears exactly once and shares its group's signature.
  std::map<std::string, std::vector<int>> sig_of;
  for (const auto& tr : input) sig_of[tr.node_id] = tr.labels;
  std::set<std::string> seen;
  std::size_t total = 0;
  std::size_t previous_size = std::numeric_limits<std::size_t>::max();
  for (const auto& x : a.archetypes) {
    CHECK(x.members.size() >= 5);
    CHECK(x.members.size() <= previous_size);
    previous_size = x.members.size();
  }
  for (const auto* list : {&a.archetypes, &a.dropped}) {
    for (const auto& x : *list) {
      for (const auto& m : x.members) {
        CHECK(sig_of[m] == x.signature);
        seen.insert(m);
        ++total;
      }
    }
  }
  CHECK(total == input.size());
  CHECK(seen.size() == input.size());
  for (const auto& x : a.dropped) CHECK(x.members.size() < 5);
}

TEST_CASE("a single timestep gives one-entry signatures") {
  const auto input = concat({repeat("a", {0}, 25), repeat("b", {1}, 22)});
  const auto table = archetype::merge_archetypes(input);
  REQUIRE(table.archetypes.size() == 2);
  CHECK(table.archetypes[0].signature.size() == 1);
  CHECK(archetype::signature_string(table.archetypes[0].signature) == "0");
}

TEST_CASE("fusing absorbs close signatures into the larger archetype") {
  const auto input = concat({repeat("a", {0, 0, 0}, 30), repeat("b", {0, 0, 1}, 25), repeat("c", {0, 1, 1}, 20)});
  const auto table = archetype::merge_archetypes(input, 1);

  CHECK(archetype::fuse_similar(table, 0).archetypes.size() == 3);
  CHECK_THROWS_AS(archetype::fuse_similar(table, -1), Error);

  // Chain of three: c is within 1 of b but 2 of a; b joins a first, c stays.
  const auto fused = archetype::fuse_similar(table, 1);
  REQUIRE(fused.archetypes.size() == 2);
  CHECK(fused.archetypes[0].signature == std::vector<int>{0, 0, 0});
  CHECK(fused.archetypes[0].members.size() == 55);
  CHECK(fused.archetypes[1].signature == std::vector<int>{0, 1, 1});
  CHECK(fused.archetypes[1].members.size() == 20);

  const auto all = archetype::fuse_similar(table, 2);
  REQUIRE(all.archetypes.size() == 1);
  CHECK(all.archetypes[0].members.size() == 75);
  CHECK(std::is_sorted(all.archetypes[0].members.begin(), all.archetypes[0].members.end()));
}

TEST_CASE("fusing matches a direct simulation of the greedy rule") {
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<LabelTrajectory> input;
    for (int i = 0; i < 200; ++i) {
      std::vector<int> sig(4);
      for (auto& s : sig) s = static_cast<int>(rng.below(2));
      input.push_back({fmt::format("n{:04d}", i), sig});
    }
    const auto table = archetype::merge_archetypes(input, 1);
    const int threshold = 1 + trial % 2;
    const auto fused = archetype::fuse_similar(table, threshold);

    // Oracle: every original archetype ends up in the first larger-or-equal
    // survivor within the threshold, scanning by descending size.
    std::vector<archetype::Archetype> order = table.archetypes;
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.members.size() > b.members.size(); });
    std::vector<const archetype::Archetype*> survivors;
    std::map<int, std::size_t> expected_size;
    for (const auto& x : order) {
      const archetype::Archetype* home = nullptr;
      for (const auto* s : survivors) {
        int d = 0;
        for (std::size_t t = 0; t < 4; ++t) d += s->signature[t] != x.signature[t];
        if (d <= threshold) {
          home = s;
          break;
        }
      }
      if (home) {
        expected_size[home->id] += x.members.size();
      } else {
        survivors.push_back(&x);
        expected_size[x.id] = x.members.size();
      }
    }
    REQUIRE(fused.archetypes.size() == survivors.size());
    std::size_t total = 0;
    for (const auto& x : fused.archetypes) {
      CHECK(x.members.size() == expected_size[x.id]);
      total += x.members.size();
    }
    CHECK(total == 200);
  }
}

TEST_CASE("signature strings round trip") {
  const std::vector<int> sig{0, 3, 11, 2};
  CHECK(archetype::signature_string(sig) == "0-3-11-2");
  CHECK(archetype::parse_signature("0-3-11-2") == sig);
}

TEST_CASE("archetype tables round trip through CSV") {
  testing::TempDir dir("arch");
  const auto input = concat({repeat("a", {0, 1}, 25), repeat("b", {1, 0}, 21), repeat("c", {1, 1}, 3)});
  const auto table = archetype::merge_archetypes(input, 20);
  archetype::write_table(table, dir.path / "members.csv", dir.path / "summary.csv");
  const auto back = archetype::read_table(dir.path / "members.csv", dir.path / "summary.csv");
  REQUIRE(back.archetypes.size() == table.archetypes.size());
  REQUIRE(back.dropped.size() == table.dropped.size());
  for (std::size_t i = 0; i < table.archetypes.size(); ++i) {
    CHECK(back.archetypes[i].id == table.archetypes[i].id);
    CHECK(back.archetypes[i].signature == table.archetypes[i].signature);
    CHECK(back.archetypes[i].members == table.archetypes[i].members);
  }
  CHECK(back.dropped[0].members == table.dropped[0].members);
}
