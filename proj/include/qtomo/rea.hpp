#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "qtomo/inference.hpp"
#include "qtomo/oracle.hpp"
#include "qtomo/topology.hpp"

namespace qtomo {

struct Siblings {
  Receiver i = 0;  // i < j
  Receiver j = 0;
  NodeId parent = kNoNode;
};

// Mutable copy of a logical tree that receiver elimination shrinks one
// receiver at a time. Nodes keep their ids from the source tree, and each
// node carries the id of the original edge whose label sits on its incoming
// edge; labels are removed by deletion or contraction, never renamed.
class WorkingTree {
 public:
  explicit WorkingTree(const LogicalTree& tree);

  const LogicalTree& source() const { return tree_; }
  std::size_t receiver_count() const { return live_receivers_; }
  bool alive(Receiver r) const { return alive_[r] != 0; }
  NodeId parent_of(Receiver r) const { return parent_[tree_.receiver_node(r)]; }
  // Original edge whose label is on r's current incoming edge.
  EdgeId leaf_edge(Receiver r) const { return edge_[tree_.receiver_node(r)]; }
  std::uint32_t depth_of(Receiver r) const { return depth_[tree_.receiver_node(r)]; }
  bool edge_present(EdgeId e) const { return edge_alive_[e] != 0; }
  std::vector<EdgeId> live_edges() const;
  // Labels from the root down to r in the current tree.
  std::vector<EdgeId> root_path(Receiver r) const;

  // Lowest-index receiver among the deepest ones, paired with its
  // lowest-index sibling leaf. Throws InsufficientReceivers below 2.
  Siblings pick_siblings() const;

  // Applies the surgery for `answer` on the sibling pair and returns what
  // happened. Throws StructuralViolation if the pair is not a sibling pair
  // or the result would stop being a logical tree.
  ReaStep apply_answer(const Siblings& pair, QuartetType answer);

  // Full O(N) re-check of the logical-tree invariants.
  bool check_invariants() const;

  Receiver any_receiver() const { return by_depth_.begin()->second; }

 private:
  struct DeepestFirst {
    bool operator()(const std::pair<std::uint32_t, Receiver>& a,
                    const std::pair<std::uint32_t, Receiver>& b) const {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    }
  };

  void remove_receiver(Receiver r);

  const LogicalTree& tree_;
  std::vector<NodeId> parent_;
  std::vector<EdgeId> edge_;
  std::vector<std::uint32_t> depth_;
  std::vector<std::uint32_t> out_degree_;
  std::vector<char> node_alive_;
  std::vector<char> edge_alive_;
  std::vector<std::set<Receiver>> leaf_children_;
  std::set<std::pair<std::uint32_t, Receiver>, DeepestFirst> by_depth_;
  std::vector<char> alive_;
  std::size_t live_receivers_ = 0;
};

// Receiver elimination: one sibling quartet per step, N-1 queries in total.
// Throws InsufficientReceivers if N < 2.
InferenceResult run_rea(const LogicalTree& tree, QuartetOracle& oracle);

}  // namespace qtomo
