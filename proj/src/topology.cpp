#include "qtomo/topology.hpp"

#include <algorithm>
#include <string>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

constexpr Receiver kNotReceiver = std::numeric_limits<Receiver>::max();

[[noreturn]] void invalid_tree(const std::string& message) {
  throw Error(ErrorCode::kInvalidTree, message);
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownReceiver:
      return "UnknownReceiver";
    case ErrorCode::kSameReceiver:
      return "SameReceiver";
    case ErrorCode::kInvalidTree:
      return "InvalidTree";
    case ErrorCode::kInvalidConfiguration:
      return "InvalidConfiguration";
    case ErrorCode::kMisplacedJoin:
      return "MisplacedJoin";
    case ErrorCode::kStructuralViolation:
      return "StructuralViolation";
    case ErrorCode::kInsufficientReceivers:
      return "InsufficientReceivers";
    case ErrorCode::kInconsistentAnswer:
      return "InconsistentAnswer";
    case ErrorCode::kStalled:
      return "Stalled";
    case ErrorCode::kTooLarge:
      return "TooLarge";
    case ErrorCode::kBadSpec:
      return "BadSpec";
    case ErrorCode::kParseError:
      return "ParseError";
    case ErrorCode::kMissingGroundTruth:
      return "MissingGroundTruth";
  }
  return "Unknown";
}

QuartetType quartet_type_from_int(int value) {
  if (value < 1 || value > 4) {
    throw std::invalid_argument("quartet type must be in 1..4, got " +
                                std::to_string(value));
  }
  return static_cast<QuartetType>(value);
}

LogicalTree LogicalTree::from_edges(const std::string& root,
                                    std::span<const TreeEdge> edges,
                                    std::span<const std::string> receivers) {
  if (root.empty()) invalid_tree("root name is empty");

  // Provisional ids in order of first appearance.
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> names;
  auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.try_emplace(name, static_cast<NodeId>(names.size()));
    if (inserted) names.push_back(name);
    return it->second;
  };
  intern(root);

  std::vector<NodeId> parent_of;
  std::vector<std::size_t> edge_of;  // index into edges, per provisional child
  std::unordered_map<std::string, std::size_t> seen_labels;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const TreeEdge& e = edges[k];
    if (e.parent.empty() || e.child.empty()) invalid_tree("edge with empty node name");
    if (e.label.id.empty()) invalid_tree("edge " + e.parent + "->" + e.child + " has empty label");
    if (e.parent == e.child) invalid_tree("self loop at " + e.parent);
    NodeId p = intern(e.parent);
    NodeId c = intern(e.child);
    if (c == 0) invalid_tree("root " + root + " has an incoming edge");
    parent_of.resize(names.size(), kNoNode);
    edge_of.resize(names.size(), 0);
    if (parent_of[c] != kNoNode) invalid_tree("node " + e.child + " has two parents");
    if (!seen_labels.try_emplace(e.label.id, k).second) {
      invalid_tree("duplicate edge label " + e.label.id);
    }
    parent_of[c] = p;
    edge_of[c] = k;
  }
  parent_of.resize(names.size(), kNoNode);

  std::vector<std::vector<NodeId>> kids(names.size());
  for (const TreeEdge& e : edges) kids[ids[e.parent]].push_back(ids[e.child]);

  LogicalTree t;
  const std::size_t n = names.size();
  std::vector<NodeId> order;  // provisional ids in BFS order
  order.reserve(n);
  std::vector<NodeId> new_id(n, kNoNode);
  order.push_back(0);
  new_id[0] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (NodeId c : kids[order[head]]) {
      if (new_id[c] != kNoNode) invalid_tree("cycle through " + names[c]);
      new_id[c] = static_cast<NodeId>(order.size());
      order.push_back(c);
    }
  }
  if (order.size() != n) {
    for (NodeId v = 0; v < n; ++v) {
      if (new_id[v] == kNoNode) invalid_tree("node " + names[v] + " is not reachable from the root");
    }
  }

  t.names_.resize(n);
  t.parent_.assign(n, kNoNode);
  t.depth_.assign(n, 0);
  t.labels_.resize(n);
  t.child_offset_.assign(n + 1, 0);
  t.child_list_.reserve(n - 1);
  for (NodeId v = 0; v < n; ++v) {
    const NodeId old = order[v];
    t.names_[v] = names[old];
    if (v != 0) {
      t.parent_[v] = new_id[parent_of[old]];
      t.depth_[v] = t.depth_[t.parent_[v]] + 1;
      t.labels_[v] = edges[edge_of[old]].label;
    }
    t.child_offset_[v] = static_cast<std::uint32_t>(t.child_list_.size());
    for (NodeId c : kids[old]) t.child_list_.push_back(new_id[c]);
  }
  t.child_offset_[n] = static_cast<std::uint32_t>(t.child_list_.size());

  if (t.out_degree(0) == 0) invalid_tree("root has no children");
  std::size_t leaves = 0;
  for (NodeId v = 1; v < n; ++v) {
    const std::size_t d = t.out_degree(v);
    if (d == 0) ++leaves;
    if (d == 1) invalid_tree("relay node " + t.names_[v] + " has out-degree 1");
  }

  for (NodeId v = 0; v < n; ++v) t.node_index_.emplace(t.names_[v], v);
  for (NodeId v = 1; v < n; ++v) t.edge_index_.emplace(t.labels_[v].id, v);

  t.receiver_index_.assign(n, kNotReceiver);
  for (const std::string& name : receivers) {
    auto it = t.node_index_.find(name);
    if (it == t.node_index_.end()) invalid_tree("unknown receiver " + name);
    const NodeId v = it->second;
    if (v == 0 || t.out_degree(v) != 0) invalid_tree("receiver " + name + " is not a leaf");
    if (t.receiver_index_[v] != kNotReceiver) invalid_tree("duplicate receiver " + name);
    t.receiver_index_[v] = t.receivers_.size();
    t.receivers_.push_back(v);
  }
  if (t.receivers_.size() != leaves) {
    for (NodeId v = 1; v < n; ++v) {
      if (t.out_degree(v) == 0 && t.receiver_index_[v] == kNotReceiver) {
        invalid_tree("leaf " + t.names_[v] + " is not listed as a receiver");
      }
    }
  }

  // Euler intervals; iterative so caterpillars of any depth are fine.
  t.tin_.assign(n, 0);
  t.tout_.assign(n, 0);
  std::uint32_t clock = 0;
  std::vector<std::pair<NodeId, std::uint32_t>> stack{{0, 0}};
  t.tin_[0] = clock++;
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    auto kids_v = t.children(v);
    if (next < kids_v.size()) {
      NodeId c = kids_v[next++];
      t.tin_[c] = clock++;
      stack.emplace_back(c, 0);
    } else {
      t.tout_[v] = clock++;
      stack.pop_back();
    }
  }
  return t;
}

std::optional<NodeId> LogicalTree::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> LogicalTree::find_edge(std::string_view label) const {
  auto it = edge_index_.find(std::string(label));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

void LogicalTree::check_receiver(Receiver r) const {
  if (r >= receivers_.size()) {
    throw Error(ErrorCode::kUnknownReceiver,
                "receiver index " + std::to_string(r) + " out of range (N=" +
                    std::to_string(receivers_.size()) + ")");
  }
}

NodeId LogicalTree::receiver_node(Receiver r) const {
  check_receiver(r);
  return receivers_[r];
}

std::optional<Receiver> LogicalTree::receiver_of(NodeId v) const {
  if (v >= receiver_index_.size() || receiver_index_[v] == kNotReceiver) return std::nullopt;
  return receiver_index_[v];
}

std::optional<Receiver> LogicalTree::find_receiver(std::string_view name) const {
  auto v = find_node(name);
  if (!v) return std::nullopt;
  return receiver_of(*v);
}

std::vector<EdgeId> LogicalTree::root_path(Receiver r) const {
  NodeId v = receiver_node(r);
  std::vector<EdgeId> path(depth_[v]);
  for (auto k = path.size(); k > 0; --k) {
    path[k - 1] = v;
    v = parent_[v];
  }
  return path;
}

NodeId LogicalTree::lca(Receiver i, Receiver j) const {
  NodeId a = receiver_node(i);
  NodeId b = receiver_node(j);
  if (i == j) {
    throw Error(ErrorCode::kSameReceiver,
                "branching point needs two distinct receivers, got " + names_[a] + " twice");
  }
  while (depth_[a] > depth_[b]) a = parent_[a];
  while (depth_[b] > depth_[a]) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return a;
}

std::vector<EdgeId> LogicalTree::common_prefix(Receiver i, Receiver j) const {
  NodeId b = lca(i, j);
  std::vector<EdgeId> prefix(depth_[b]);
  for (auto k = prefix.size(); k > 0; --k) {
    prefix[k - 1] = b;
    b = parent_[b];
  }
  return prefix;
}

bool LogicalTree::check_invariants() const {
  const std::size_t n = names_.size();
  if (n < 2 || parent_[0] != kNoNode || out_degree(0) == 0) return false;
  std::size_t leaves = 0;
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId c : children(v)) {
      if (c <= v || parent_[c] != v || depth_[c] != depth_[v] + 1) return false;
    }
    if (v == 0) continue;
    if (parent_[v] >= v) return false;
    const std::size_t d = out_degree(v);
    if (d == 1) return false;
    if (d == 0) {
      ++leaves;
      if (receiver_index_[v] == kNotReceiver) return false;
    }
  }
  return leaves == receivers_.size() && leaves >= 1;
}

bool LogicalTree::operator==(const LogicalTree& other) const {
  if (node_count() != other.node_count() || receivers_.size() != other.receivers_.size()) {
    return false;
  }
  if (names_[0] != other.names_[0]) return false;
  for (Receiver r = 0; r < receivers_.size(); ++r) {
    if (names_[receivers_[r]] != other.names_[other.receivers_[r]]) return false;
  }
  for (NodeId v = 1; v < names_.size(); ++v) {
    auto w = other.find_node(names_[v]);
    if (!w || *w == 0) return false;
    if (other.names_[other.parent_[*w]] != names_[parent_[v]]) return false;
    if (other.labels_[*w] != labels_[v]) return false;
  }
  return true;
}

std::vector<EdgeLabel> JoiningConfig::labels(const LogicalTree& tree) const {
  std::vector<EdgeLabel> out;
  out.reserve(joins_.size());
  for (EdgeId e : joins_) out.push_back(tree.edge_label(e));
  return out;
}

JoiningConfig config_from_labels(const LogicalTree& tree,
                                 std::span<const EdgeLabel> labels) {
  if (labels.size() != tree.receiver_count()) {
    throw Error(ErrorCode::kMisplacedJoin,
                "expected " + std::to_string(tree.receiver_count()) + " joins, got " +
                    std::to_string(labels.size()));
  }
  std::vector<EdgeId> joins;
  joins.reserve(labels.size());
  for (Receiver r = 0; r < labels.size(); ++r) {
    auto e = tree.find_edge(labels[r].id);
    if (!e) {
      throw Error(ErrorCode::kMisplacedJoin,
                  "unknown edge label " + labels[r].id + " for " + tree.receiver_name(r));
    }
    joins.push_back(*e);
  }
  JoiningConfig config(std::move(joins));
  check_joins_on_paths(tree, config);
  return config;
}

void check_joins_on_paths(const LogicalTree& tree, const JoiningConfig& config) {
  if (config.size() != tree.receiver_count()) {
    throw Error(ErrorCode::kMisplacedJoin,
                "configuration covers " + std::to_string(config.size()) + " of " +
                    std::to_string(tree.receiver_count()) + " receivers");
  }
  for (Receiver r = 0; r < config.size(); ++r) {
    const EdgeId e = config.join(r);
    if (e >= tree.node_count() || !tree.on_root_path(e, r)) {
      throw Error(ErrorCode::kMisplacedJoin,
                  "join of " + tree.receiver_name(r) + " is not on its root path");
    }
  }
}

bool is_valid_config(const LogicalTree& tree, const JoiningConfig& config) {
  check_joins_on_paths(tree, config);
  const std::size_t n = tree.node_count();
  std::vector<char> used(n, 0);
  for (EdgeId e : config.joins()) used[e] = 1;
  // deepest[v]: deepest used edge on the root path of v (inclusive).
  std::vector<NodeId> deepest(n, kNoNode);
  for (NodeId v = 1; v < n; ++v) {
    deepest[v] = used[v] ? v : deepest[tree.parent(v)];
  }
  for (Receiver r = 0; r < config.size(); ++r) {
    if (deepest[tree.receiver_node(r)] != config.join(r)) return false;
  }
  return true;
}

GroundTruth::GroundTruth(LogicalTree tree, JoiningConfig config)
    : tree_(std::move(tree)), config_(std::move(config)) {
  if (!is_valid_config(tree_, config_)) {
    throw Error(ErrorCode::kInvalidConfiguration,
                "joining configuration violates the routing assumptions");
  }
}

QuartetType quartet_type(const LogicalTree& tree, const JoiningConfig& config,
                         Receiver i, Receiver j) {
  const NodeId ni = tree.receiver_node(i);
  const NodeId nj = tree.receiver_node(j);
  if (i == j) {
    throw Error(ErrorCode::kSameReceiver, "quartet needs two distinct receivers");
  }
  if (config.size() != tree.receiver_count()) {
    throw Error(ErrorCode::kMisplacedJoin, "configuration does not cover every receiver");
  }
  const EdgeId ji = config.join(i);
  const EdgeId jj = config.join(j);
  if (!tree.on_root_path(ji, i) || !tree.on_root_path(jj, j)) {
    throw Error(ErrorCode::kMisplacedJoin, "join is not on its receiver's root path");
  }
  // A join on i's path lies above lca(i, j) iff it is also an ancestor of j.
  const bool above_i = tree.is_ancestor_or_self(ji, nj);
  const bool above_j = tree.is_ancestor_or_self(jj, ni);
  if (above_i && above_j) {
    if (ji != jj) {
      throw Error(ErrorCode::kInvalidConfiguration,
                  "distinct joins of " + tree.receiver_name(i) + " and " +
                      tree.receiver_name(j) + " share the common prefix");
    }
    return QuartetType::k1;
  }
  if (above_i) return QuartetType::k2;
  if (above_j) return QuartetType::k3;
  return QuartetType::k4;
}

}  // namespace qtomo
