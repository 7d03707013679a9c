#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qtomo {

using NodeId = std::uint32_t;
// An edge (parent(v), v) is identified by its lower endpoint v.
using EdgeId = NodeId;
// Receivers are addressed by their 0-based position in the receiver order.
using Receiver = std::size_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct EdgeLabel {
  std::string id;

  auto operator<=>(const EdgeLabel&) const = default;
};

// Quartet types, oriented on the ordered receiver pair (first, second):
// 1 = both joins above the branching point (and coincident), 2 = first above
// and second below, 3 = first below and second above, 4 = both below.
enum class QuartetType : std::uint8_t { k1 = 1, k2 = 2, k3 = 3, k4 = 4 };

constexpr int to_int(QuartetType t) { return static_cast<int>(t); }
QuartetType quartet_type_from_int(int value);

// Orientation flip: swapping the receivers exchanges types 2 and 3.
constexpr QuartetType mirror(QuartetType t) {
  switch (t) {
    case QuartetType::k2:
      return QuartetType::k3;
    case QuartetType::k3:
      return QuartetType::k2;
    default:
      return t;
  }
}

struct ReceiverPair {
  Receiver first;
  Receiver second;

  auto operator<=>(const ReceiverPair&) const = default;
};

struct TreeEdge {
  std::string parent;
  std::string child;
  EdgeLabel label;
};

// Immutable logical routing tree of the first source. Nodes are renumbered
// breadth-first from the root on construction, so parent ids always precede
// child ids. Construction validates every logical-tree invariant.
class LogicalTree {
 public:
  static LogicalTree from_edges(const std::string& root,
                                std::span<const TreeEdge> edges,
                                std::span<const std::string> receivers);

  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return names_.size() - 1; }
  std::size_t receiver_count() const { return receivers_.size(); }

  NodeId root() const { return 0; }
  NodeId parent(NodeId v) const { return parent_[v]; }
  std::span<const NodeId> children(NodeId v) const {
    return {child_list_.data() + child_offset_[v],
            child_list_.data() + child_offset_[v + 1]};
  }
  std::size_t out_degree(NodeId v) const {
    return child_offset_[v + 1] - child_offset_[v];
  }
  std::uint32_t depth(NodeId v) const { return depth_[v]; }
  const std::string& node_name(NodeId v) const { return names_[v]; }
  const EdgeLabel& edge_label(EdgeId e) const { return labels_[e]; }

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<EdgeId> find_edge(std::string_view label) const;

  NodeId receiver_node(Receiver r) const;
  const std::string& receiver_name(Receiver r) const {
    return names_[receiver_node(r)];
  }
  std::optional<Receiver> receiver_of(NodeId v) const;
  std::optional<Receiver> find_receiver(std::string_view name) const;

  // Euler-tour entry/exit times in [0, 2 * node_count()).
  std::uint32_t euler_in(NodeId v) const { return tin_[v]; }
  std::uint32_t euler_out(NodeId v) const { return tout_[v]; }
  bool is_ancestor_or_self(NodeId a, NodeId b) const {
    return tin_[a] <= tin_[b] && tout_[b] <= tout_[a];
  }
  // True iff edge e lies on the root path of receiver r.
  bool on_root_path(EdgeId e, Receiver r) const {
    return e != root() && is_ancestor_or_self(e, receiver_node(r));
  }
  std::uint32_t path_length(Receiver r) const {
    return depth_[receiver_node(r)];
  }

  // Edges from the root down to r.
  std::vector<EdgeId> root_path(Receiver r) const;
  // Deepest common ancestor of two distinct receivers.
  NodeId lca(Receiver i, Receiver j) const;
  // Edges from the root down to lca(i, j).
  std::vector<EdgeId> common_prefix(Receiver i, Receiver j) const;

  // Recomputes the logical-tree invariants from the stored arrays.
  bool check_invariants() const;

  // Structural equality by node names, edge labels and receiver order.
  bool operator==(const LogicalTree& other) const;

 private:
  LogicalTree() = default;
  void check_receiver(Receiver r) const;

  std::vector<std::string> names_;
  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> child_offset_;
  std::vector<NodeId> child_list_;
  std::vector<std::uint32_t> depth_;
  std::vector<EdgeLabel> labels_;  // labels_[root] is empty
  std::vector<std::uint32_t> tin_;
  std::vector<std::uint32_t> tout_;
  std::vector<NodeId> receivers_;
  std::vector<Receiver> receiver_index_;  // per node, npos if not a leaf
  std::unordered_map<std::string, NodeId> node_index_;
  std::unordered_map<std::string, EdgeId> edge_index_;
};

// Joining edge per receiver, in receiver order.
class JoiningConfig {
 public:
  JoiningConfig() = default;
  explicit JoiningConfig(std::vector<EdgeId> joins) : joins_(std::move(joins)) {}

  std::size_t size() const { return joins_.size(); }
  EdgeId join(Receiver r) const { return joins_.at(r); }
  std::span<const EdgeId> joins() const { return joins_; }

  std::vector<EdgeLabel> labels(const LogicalTree& tree) const;

  bool operator==(const JoiningConfig&) const = default;

 private:
  std::vector<EdgeId> joins_;
};

// Resolves labels against the tree; throws MisplacedJoin for unknown labels
// or labels off the receiver's root path.
JoiningConfig config_from_labels(const LogicalTree& tree,
                                 std::span<const EdgeLabel> labels);

// A tree with a configuration that satisfies the routing assumptions.
class GroundTruth {
 public:
  // Throws MisplacedJoin or InvalidConfiguration.
  GroundTruth(LogicalTree tree, JoiningConfig config);

  const LogicalTree& tree() const { return tree_; }
  const JoiningConfig& config() const { return config_; }

 private:
  LogicalTree tree_;
  JoiningConfig config_;
};

// Throws MisplacedJoin if a join is missing or off its receiver's root path.
void check_joins_on_paths(const LogicalTree& tree, const JoiningConfig& config);

// Pairwise validity: no two receivers hold distinct joins that both lie on
// their shared prefix. Evaluated in linear time through the equivalent
// statement that every receiver's join is the deepest join edge used by any
// receiver on its root path.
bool is_valid_config(const LogicalTree& tree, const JoiningConfig& config);

// Quartet type of (i, j), oriented by argument order. Throws
// InvalidConfiguration if both joins sit above the branching point but differ.
QuartetType quartet_type(const LogicalTree& tree, const JoiningConfig& config,
                         Receiver i, Receiver j);
inline QuartetType quartet_type(const GroundTruth& gt, Receiver i, Receiver j) {
  return quartet_type(gt.tree(), gt.config(), i, j);
}

}  // namespace qtomo
