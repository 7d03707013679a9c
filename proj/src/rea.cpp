#include "qtomo/rea.hpp"

#include <string>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

[[noreturn]] void structural(const std::string& message) {
  throw Error(ErrorCode::kStructuralViolation, message);
}

}  // namespace

std::vector<ReceiverPair> InferenceResult::queried_pairs() const {
  std::vector<ReceiverPair> out;
  if (const auto* rea = std::get_if<ReaTrace>(&trace)) {
    for (const ReaStep& s : rea->steps) out.push_back(s.pair);
  } else {
    for (const GbsStep& s : std::get<GbsTrace>(trace).steps) {
      if (!s.cached) out.push_back(s.pair);
    }
  }
  return out;
}

WorkingTree::WorkingTree(const LogicalTree& tree)
    : tree_(tree),
      parent_(tree.node_count()),
      edge_(tree.node_count()),
      depth_(tree.node_count()),
      out_degree_(tree.node_count()),
      node_alive_(tree.node_count(), 1),
      edge_alive_(tree.node_count(), 1),
      leaf_children_(tree.node_count()),
      alive_(tree.receiver_count(), 1),
      live_receivers_(tree.receiver_count()) {
  for (NodeId v = 0; v < tree.node_count(); ++v) {
    parent_[v] = tree.parent(v);
    edge_[v] = v;
    depth_[v] = tree.depth(v);
    out_degree_[v] = static_cast<std::uint32_t>(tree.out_degree(v));
  }
  edge_alive_[tree.root()] = 0;
  for (Receiver r = 0; r < tree.receiver_count(); ++r) {
    const NodeId v = tree.receiver_node(r);
    leaf_children_[parent_[v]].insert(r);
    by_depth_.emplace(depth_[v], r);
  }
}

std::vector<EdgeId> WorkingTree::live_edges() const {
  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < edge_alive_.size(); ++e) {
    if (edge_alive_[e]) out.push_back(e);
  }
  return out;
}

std::vector<EdgeId> WorkingTree::root_path(Receiver r) const {
  if (!alive(r)) structural("receiver " + tree_.receiver_name(r) + " was eliminated");
  std::vector<EdgeId> path;
  for (NodeId v = tree_.receiver_node(r); v != tree_.root(); v = parent_[v]) {
    path.push_back(edge_[v]);
  }
  return {path.rbegin(), path.rend()};
}

Siblings WorkingTree::pick_siblings() const {
  if (live_receivers_ < 2) {
    throw Error(ErrorCode::kInsufficientReceivers, "sibling pair needs two live receivers");
  }
  const Receiver a = by_depth_.begin()->second;
  const NodeId p = parent_[tree_.receiver_node(a)];
  const auto& leaves = leaf_children_[p];
  // A deepest leaf cannot have an internal sibling: that sibling's subtree
  // would hold a deeper leaf.
  auto it = leaves.begin();
  if (it != leaves.end() && *it == a) ++it;
  if (it == leaves.end()) structural("deepest receiver has no sibling leaf");
  const Receiver b = *it;
  return a < b ? Siblings{a, b, p} : Siblings{b, a, p};
}

void WorkingTree::remove_receiver(Receiver r) {
  const NodeId v = tree_.receiver_node(r);
  const NodeId p = parent_[v];
  by_depth_.erase({depth_[v], r});
  leaf_children_[p].erase(r);
  --out_degree_[p];
  edge_alive_[edge_[v]] = 0;
  node_alive_[v] = 0;
  alive_[r] = 0;
  --live_receivers_;
}

ReaStep WorkingTree::apply_answer(const Siblings& pair, QuartetType answer) {
  const std::size_t n = tree_.receiver_count();
  if (pair.i >= n || pair.j >= n || pair.i >= pair.j || !alive(pair.i) || !alive(pair.j)) {
    structural("apply_answer needs two live receivers in ascending order");
  }
  const NodeId p = pair.parent;
  const NodeId ni = tree_.receiver_node(pair.i);
  const NodeId nj = tree_.receiver_node(pair.j);
  if (parent_[ni] != p || parent_[nj] != p) {
    structural(tree_.receiver_name(pair.i) + " and " + tree_.receiver_name(pair.j) +
               " are not siblings under " + tree_.node_name(p));
  }

  ReaStep step;
  step.pair = {pair.i, pair.j};
  step.parent = p;
  step.answer = answer;
  // The surviving receiver keeps the upper label when the lower edge is
  // contracted (types 1-3); for type 4 the edge above P disappears instead.
  bool keep_upper = true;
  switch (answer) {
    case QuartetType::k1:
      step.deleted = pair.i;
      step.survivor = pair.j;
      break;
    case QuartetType::k2:
      step.deleted = pair.j;
      step.survivor = pair.i;
      step.identified = edge_[nj];
      break;
    case QuartetType::k3:
      step.deleted = pair.i;
      step.survivor = pair.j;
      step.identified = edge_[ni];
      break;
    case QuartetType::k4:
      step.deleted = pair.j;
      step.survivor = pair.i;
      step.identified = edge_[nj];
      keep_upper = false;
      break;
  }
  step.deleted_edge = edge_[tree_.receiver_node(step.deleted)];
  remove_receiver(step.deleted);

  if (out_degree_[p] == 1 && p != tree_.root()) {
    const NodeId s = tree_.receiver_node(step.survivor);
    const NodeId g = parent_[p];
    EdgeId removed;
    if (keep_upper) {
      removed = edge_[s];
      edge_[s] = edge_[p];
    } else {
      removed = edge_[p];
    }
    edge_alive_[removed] = 0;
    step.contracted_edge = removed;
    by_depth_.erase({depth_[s], step.survivor});
    --depth_[s];
    by_depth_.emplace(depth_[s], step.survivor);
    leaf_children_[p].erase(step.survivor);
    leaf_children_[g].insert(step.survivor);
    parent_[s] = g;
    out_degree_[p] = 0;
    node_alive_[p] = 0;
  } else if (p != tree_.root() && out_degree_[p] < 2) {
    structural("node " + tree_.node_name(p) + " left with out-degree " +
               std::to_string(out_degree_[p]));
  }
  return step;
}

bool WorkingTree::check_invariants() const {
  const std::size_t n = tree_.node_count();
  std::vector<std::uint32_t> degree(n, 0);
  std::vector<char> seen_label(n, 0);
  for (NodeId v = 0; v < n; ++v) {
    if (!node_alive_[v] || v == tree_.root()) continue;
    const NodeId p = parent_[v];
    if (p >= n || !node_alive_[p]) return false;
    if (depth_[v] != depth_[p] + 1) return false;
    const EdgeId e = edge_[v];
    if (!edge_alive_[e] || seen_label[e]) return false;
    seen_label[e] = 1;
    ++degree[p];
  }
  std::size_t live_edges = 0;
  for (EdgeId e = 0; e < n; ++e) live_edges += edge_alive_[e] ? 1 : 0;
  std::size_t live_nodes = 0;
  std::size_t leaves = 0;
  for (NodeId v = 0; v < n; ++v) {
    if (!node_alive_[v]) continue;
    ++live_nodes;
    if (degree[v] != out_degree_[v]) return false;
    if (v == tree_.root()) {
      if (degree[v] == 0) return false;
      continue;
    }
    if (degree[v] == 1) return false;
    if (degree[v] == 0) {
      auto r = tree_.receiver_of(v);
      if (!r || !alive(*r)) return false;
      ++leaves;
    }
  }
  return leaves == live_receivers_ && live_edges + 1 == live_nodes;
}

InferenceResult run_rea(const LogicalTree& tree, QuartetOracle& oracle) {
  const std::size_t n = tree.receiver_count();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientReceivers,
                "receiver elimination needs at least 2 receivers, got " + std::to_string(n));
  }
  if (oracle.receiver_count() != n) {
    throw Error(ErrorCode::kUnknownReceiver, "oracle and tree disagree on the receiver count");
  }
  const std::uint64_t before = oracle.stats().quartet_queries;

  WorkingTree work(tree);
  ReaTrace trace;
  trace.aliases.assign(n, std::nullopt);
  trace.steps.reserve(n - 1);
  std::vector<EdgeId> joins(n, kNoNode);

  while (work.receiver_count() > 1) {
    const Siblings pair = work.pick_siblings();
    const QuartetType answer = oracle.query(pair.i, pair.j);
    ReaStep step = work.apply_answer(pair, answer);
    if (step.identified) {
      joins[step.deleted] = *step.identified;
    } else {
      trace.aliases[step.deleted] = step.survivor;
    }
    trace.steps.push_back(step);
  }
  trace.last_receiver = work.any_receiver();
  trace.last_edge = work.leaf_edge(trace.last_receiver);
  joins[trace.last_receiver] = trace.last_edge;

  // A type-1 survivor is resolved at a later step or last, so walking the
  // steps backwards resolves every alias chain in one pass.
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    if (!it->identified) joins[it->deleted] = joins[it->survivor];
  }

  InferenceResult result;
  result.joins = JoiningConfig(std::move(joins));
  result.queries_used = oracle.stats().quartet_queries - before;
  if (result.queries_used != n - 1) {
    structural("receiver elimination used " + std::to_string(result.queries_used) +
               " queries for N=" + std::to_string(n));
  }
  result.trace = std::move(trace);
  return result;
}

}  // namespace qtomo
