// Slow reference implementations for tests. Everything here works from the
// literal definitions (edge sets along root paths) and avoids the library's
// Euler-tour and linear-time shortcuts.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qtomo/topology.hpp"
#include "qtomo/topology_io.hpp"

namespace qtomo::testing {

#ifndef QTOMO_TEST_DATA
#define QTOMO_TEST_DATA "tests/data"
#endif

inline std::string data_path(const std::string& name) {
  return std::string(QTOMO_TEST_DATA) + "/" + name;
}

inline Topology load_fixture(const std::string& name) {
  return load_topology(data_path(name));
}

inline std::vector<EdgeId> path_by_parents(const LogicalTree& tree, Receiver r) {
  std::vector<EdgeId> path;
  for (NodeId v = tree.receiver_node(r); v != tree.root(); v = tree.parent(v)) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

inline std::set<EdgeId> shared_prefix(const LogicalTree& tree, Receiver i, Receiver j) {
  const auto pi = path_by_parents(tree, i);
  const auto pj = path_by_parents(tree, j);
  std::set<EdgeId> a(pi.begin(), pi.end());
  std::set<EdgeId> out;
  for (EdgeId e : pj) {
    if (a.count(e)) out.insert(e);
  }
  return out;
}

// The pairwise validity predicate, pair by pair.
inline bool pairwise_valid(const LogicalTree& tree, std::span<const EdgeId> joins) {
  for (Receiver i = 0; i < joins.size(); ++i) {
    for (Receiver j = i + 1; j < joins.size(); ++j) {
      const auto c = shared_prefix(tree, i, j);
      if (c.count(joins[i]) && c.count(joins[j]) && joins[i] != joins[j]) return false;
    }
  }
  return true;
}

inline bool pairwise_valid(const LogicalTree& tree, const JoiningConfig& config) {
  return pairwise_valid(tree, config.joins());
}

// Quartet type straight from the common-prefix sets.
inline int brute_type(const LogicalTree& tree, std::span<const EdgeId> joins, Receiver i,
                      Receiver j) {
  const auto c = shared_prefix(tree, i, j);
  const bool up_i = c.count(joins[i]) != 0;
  const bool up_j = c.count(joins[j]) != 0;
  if (up_i && up_j) return 1;
  if (up_i) return 2;
  if (up_j) return 3;
  return 4;
}

// Edges of r's root path that keep the first `placed` receivers plus r
// pairwise valid.
inline std::vector<EdgeId> naive_allowed(const LogicalTree& tree, std::span<const EdgeId> joins,
                                         Receiver r) {
  std::vector<EdgeId> out;
  for (EdgeId e : path_by_parents(tree, r)) {
    bool ok = true;
    for (Receiver k = 0; k < r && ok; ++k) {
      const auto c = shared_prefix(tree, k, r);
      if (c.count(joins[k]) && c.count(e) && joins[k] != e) ok = false;
    }
    if (ok) out.push_back(e);
  }
  return out;
}

// Every assignment of a root-path edge to each receiver (valid or not).
inline std::vector<std::vector<EdgeId>> all_raw_configs(const LogicalTree& tree) {
  std::vector<std::vector<EdgeId>> out{{}};
  for (Receiver r = 0; r < tree.receiver_count(); ++r) {
    std::vector<std::vector<EdgeId>> next;
    for (const auto& prefix : out) {
      for (EdgeId e : path_by_parents(tree, r)) {
        auto c = prefix;
        c.push_back(e);
        next.push_back(std::move(c));
      }
    }
    out = std::move(next);
  }
  return out;
}

// Random logical tree: receivers are split recursively into two to four
// groups, so every internal node below the root branches. With
// `single_root_edge` the root has exactly one child.
inline LogicalTree random_tree(std::uint64_t seed, std::size_t receivers,
                               bool single_root_edge = true) {
  std::mt19937_64 rng(seed);
  std::vector<TreeEdge> edges;
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= receivers; ++k) names.push_back("R" + std::to_string(k));
  std::size_t internal = 0;
  auto label = [&] { return EdgeLabel{"x" + std::to_string(edges.size() + 1)}; };
  struct Job {
    std::string node;
    std::vector<std::string> leaves;
  };
  std::vector<std::string> shuffled = names;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::vector<Job> stack;
  if (single_root_edge || receivers == 1) {
    const std::string top = receivers == 1 ? shuffled.front() : "N" + std::to_string(++internal);
    edges.push_back({"S", top, label()});
    if (receivers > 1) stack.push_back({top, shuffled});
  } else {
    stack.push_back({"S", shuffled});
  }
  while (!stack.empty()) {
    Job job = std::move(stack.back());
    stack.pop_back();
    const std::size_t m = job.leaves.size();
    const std::size_t max_groups = std::min<std::size_t>(4, m);
    const std::size_t groups = 2 + rng() % (max_groups - 1);
    // Cut points: groups - 1 distinct positions in [1, m).
    std::vector<std::size_t> cuts;
    std::vector<std::size_t> positions;
    for (std::size_t p = 1; p < m; ++p) positions.push_back(p);
    std::shuffle(positions.begin(), positions.end(), rng);
    cuts.assign(positions.begin(), positions.begin() + (groups - 1));
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(m);
    std::size_t from = 0;
    for (std::size_t cut : cuts) {
      std::vector<std::string> part(job.leaves.begin() + from, job.leaves.begin() + cut);
      from = cut;
      if (part.size() == 1) {
        edges.push_back({job.node, part.front(), label()});
      } else {
        const std::string child = "N" + std::to_string(++internal);
        edges.push_back({job.node, child, label()});
        stack.push_back({child, std::move(part)});
      }
    }
  }
  return LogicalTree::from_edges("S", edges, names);
}

// Uniform over raw assignments, retried until valid; only for small trees.
inline JoiningConfig random_valid_by_rejection(const LogicalTree& tree, std::mt19937_64& rng) {
  while (true) {
    std::vector<EdgeId> joins;
    for (Receiver r = 0; r < tree.receiver_count(); ++r) {
      const auto path = path_by_parents(tree, r);
      joins.push_back(path[rng() % path.size()]);
    }
    if (pairwise_valid(tree, joins)) return JoiningConfig(std::move(joins));
  }
}

}  // namespace qtomo::testing
