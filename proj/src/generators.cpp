#include "qtomo/generators.hpp"

#include <string>

#include "qtomo/error.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

namespace {

[[noreturn]] void bad_spec(const std::string& message) {
  throw Error(ErrorCode::kBadSpec, message);
}

constexpr std::size_t kMaxReceivers = std::size_t{1} << 22;

// Collects edges breadth-first so that e<k> labels follow BFS order.
class TreeBuilder {
 public:
  std::string add_internal() { return "B" + std::to_string(++internal_); }
  std::string add_receiver() {
    std::string name = "R" + std::to_string(++receiver_);
    receivers_.push_back(name);
    return name;
  }
  void edge(const std::string& parent, const std::string& child) {
    edges_.push_back({parent, child, EdgeLabel{"e" + std::to_string(edges_.size() + 1)}});
  }
  LogicalTree build() { return LogicalTree::from_edges("S1", edges_, receivers_); }

 private:
  std::size_t internal_ = 0;
  std::size_t receiver_ = 0;
  std::vector<TreeEdge> edges_;
  std::vector<std::string> receivers_;
};

LogicalTree make_perfect(std::uint32_t arity, std::uint32_t depth) {
  TreeBuilder b;
  std::vector<std::string> level{b.add_internal()};
  b.edge("S1", level.front());
  for (std::uint32_t d = 1; d <= depth; ++d) {
    std::vector<std::string> next;
    next.reserve(level.size() * arity);
    for (const std::string& parent : level) {
      for (std::uint32_t k = 0; k < arity; ++k) {
        next.push_back(d == depth ? b.add_receiver() : b.add_internal());
        b.edge(parent, next.back());
      }
    }
    level = std::move(next);
  }
  return b.build();
}

LogicalTree make_tall(std::uint32_t n) {
  // Receivers are numbered bottom-up but edges are emitted top-down.
  std::vector<TreeEdge> edges;
  std::vector<std::string> receivers;
  receivers.reserve(n);
  for (std::uint32_t k = 1; k <= n; ++k) receivers.push_back("R" + std::to_string(k));
  std::size_t label = 0;
  auto edge = [&](std::string parent, std::string child) {
    edges.push_back({std::move(parent), std::move(child), EdgeLabel{"e" + std::to_string(++label)}});
  };
  edge("S1", "B1");
  for (std::uint32_t k = 1; k + 1 < n; ++k) {
    const std::string node = "B" + std::to_string(k);
    edge(node, "B" + std::to_string(k + 1));
    edge(node, receivers[n - k]);
  }
  const std::string bottom = "B" + std::to_string(n - 1);
  edge(bottom, receivers[0]);
  edge(bottom, receivers[1]);
  return LogicalTree::from_edges("S1", edges, receivers);
}

}  // namespace

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::kStar:
      return "star";
    case Shape::kPerfectBinary:
      return "perfect_binary";
    case Shape::kTallBinary:
      return "tall_binary";
    case Shape::kPerfectTernary:
      return "perfect_ternary";
  }
  return "unknown";
}

Shape parse_shape(std::string_view name) {
  for (Shape s : {Shape::kStar, Shape::kPerfectBinary, Shape::kTallBinary,
                  Shape::kPerfectTernary}) {
    if (to_string(s) == name) return s;
  }
  bad_spec("unknown shape '" + std::string(name) +
           "' (expected star, perfect_binary, tall_binary or perfect_ternary)");
}

std::size_t receiver_count(const GeneratorSpec& spec) {
  switch (spec.shape) {
    case Shape::kStar:
    case Shape::kTallBinary:
      return spec.size;
    case Shape::kPerfectBinary:
    case Shape::kPerfectTernary: {
      const std::size_t arity = spec.shape == Shape::kPerfectBinary ? 2 : 3;
      std::size_t n = 1;
      for (std::uint32_t d = 0; d < spec.size; ++d) {
        n *= arity;
        if (n > kMaxReceivers) return n;
      }
      return n;
    }
  }
  return 0;
}

GeneratorSpec spec_for_receivers(Shape shape, std::size_t n) {
  if (shape == Shape::kStar || shape == Shape::kTallBinary) {
    if (n > kMaxReceivers) bad_spec("too many receivers: " + std::to_string(n));
    return {shape, static_cast<std::uint32_t>(n)};
  }
  const std::size_t arity = shape == Shape::kPerfectBinary ? 2 : 3;
  std::size_t m = arity;
  for (std::uint32_t d = 1; m <= kMaxReceivers; ++d, m *= arity) {
    if (m == n) return {shape, d};
  }
  bad_spec(std::string(to_string(shape)) + " cannot have " + std::to_string(n) +
           " receivers (need a power of " + std::to_string(arity) + ")");
}

LogicalTree make_tree(const GeneratorSpec& spec) {
  const std::size_t n = receiver_count(spec);
  if (n < 2) bad_spec(std::string(to_string(spec.shape)) + " needs at least 2 receivers");
  if (n > kMaxReceivers) bad_spec("too many receivers for " + std::string(to_string(spec.shape)));
  switch (spec.shape) {
    case Shape::kStar: {
      TreeBuilder b;
      const std::string hub = b.add_internal();
      b.edge("S1", hub);
      for (std::size_t k = 0; k < n; ++k) b.edge(hub, b.add_receiver());
      return b.build();
    }
    case Shape::kPerfectBinary:
      return make_perfect(2, spec.size);
    case Shape::kPerfectTernary:
      return make_perfect(3, spec.size);
    case Shape::kTallBinary:
      return make_tall(spec.size);
  }
  bad_spec("unknown shape");
}

void ConfigSampler::Fenwick::add(std::size_t pos, std::int64_t delta) {
  for (std::size_t i = pos + 1; i < sum.size(); i += i & (~i + 1)) sum[i] += delta;
}

std::int64_t ConfigSampler::Fenwick::prefix(std::size_t pos) const {
  std::int64_t s = 0;
  for (std::size_t i = pos + 1; i > 0; i -= i & (~i + 1)) s += sum[i];
  return s;
}

ConfigSampler::ConfigSampler(const LogicalTree& tree)
    : tree_(tree),
      placed_receivers_(2 * tree.node_count()),
      joins_at_(2 * tree.node_count()),
      used_marks_(2 * tree.node_count() + 1),
      used_(tree.node_count(), 0),
      placed_(tree.receiver_count(), 0) {
  const std::size_t n = tree.node_count();
  std::uint32_t max_depth = 0;
  for (NodeId v = 0; v < n; ++v) max_depth = std::max(max_depth, tree.depth(v));
  std::size_t levels = 1;
  while ((std::uint64_t{1} << levels) <= max_depth) ++levels;
  lift_.assign(levels, std::vector<NodeId>(n, 0));
  for (NodeId v = 1; v < n; ++v) lift_[0][v] = tree.parent(v);
  for (std::size_t k = 1; k < levels; ++k) {
    for (NodeId v = 0; v < n; ++v) lift_[k][v] = lift_[k - 1][lift_[k - 1][v]];
  }
}

NodeId ConfigSampler::ancestor_at_depth(NodeId v, std::uint32_t depth) const {
  std::uint32_t up = tree_.depth(v) - depth;
  for (std::size_t k = 0; up != 0; ++k, up >>= 1) {
    if (up & 1) v = lift_[k][v];
  }
  return v;
}

std::int64_t ConfigSampler::used_above(NodeId v) const {
  return used_marks_.prefix(tree_.euler_in(v));
}

// No placed receiver below v has its join strictly above v.
bool ConfigSampler::unblocked(NodeId v) const {
  const std::size_t lo = tree_.euler_in(v);
  const std::size_t hi = tree_.euler_out(v);
  return placed_receivers_.range(lo, hi) == joins_at_.range(lo, hi);
}

ConfigSampler::Range ConfigSampler::allowed_range(Receiver r) const {
  const NodeId leaf = tree_.receiver_node(r);
  const std::uint32_t depth = tree_.depth(leaf);
  Range out;
  std::uint32_t lo = 1;
  const std::int64_t marks = used_above(leaf);
  if (marks > 0) {
    // Shallowest ancestor that already sees every used edge on the path.
    std::uint32_t a = 1;
    std::uint32_t b = depth;
    while (a < b) {
      const std::uint32_t mid = a + (b - a) / 2;
      if (used_above(ancestor_at_depth(leaf, mid)) == marks) {
        b = mid;
      } else {
        a = mid + 1;
      }
    }
    out.deepest_join = ancestor_at_depth(leaf, a);
    lo = a + 1;
  }
  // Unblocked edges below the deepest join form a suffix ending at the leaf.
  std::uint32_t a = lo;
  std::uint32_t b = depth;
  while (a < b) {
    const std::uint32_t mid = a + (b - a) / 2;
    if (unblocked(ancestor_at_depth(leaf, mid))) {
      b = mid;
    } else {
      a = mid + 1;
    }
  }
  out.first_depth = a;
  out.last_depth = depth;
  return out;
}

std::size_t ConfigSampler::allowed_count(Receiver r) const {
  const Range range = allowed_range(r);
  return (range.deepest_join != kNoNode ? 1 : 0) + (range.last_depth - range.first_depth + 1);
}

EdgeId ConfigSampler::allowed_at(Receiver r, std::size_t k) const {
  const Range range = allowed_range(r);
  if (range.deepest_join != kNoNode) {
    if (k == 0) return range.deepest_join;
    --k;
  }
  const std::uint32_t d = range.first_depth + static_cast<std::uint32_t>(k);
  if (d > range.last_depth) throw std::out_of_range("allowed edge index out of range");
  return ancestor_at_depth(tree_.receiver_node(r), d);
}

std::vector<EdgeId> ConfigSampler::allowed(Receiver r) const {
  const Range range = allowed_range(r);
  const NodeId leaf = tree_.receiver_node(r);
  std::vector<EdgeId> out;
  if (range.deepest_join != kNoNode) out.push_back(range.deepest_join);
  for (std::uint32_t d = range.first_depth; d <= range.last_depth; ++d) {
    out.push_back(ancestor_at_depth(leaf, d));
  }
  return out;
}

void ConfigSampler::place(Receiver r, EdgeId e) {
  const NodeId leaf = tree_.receiver_node(r);
  if (placed_[r]) throw std::logic_error("receiver placed twice");
  if (!tree_.on_root_path(e, r)) {
    throw Error(ErrorCode::kMisplacedJoin, "join of " + tree_.receiver_name(r) + " is not on its root path");
  }
  placed_[r] = 1;
  placed_receivers_.add(tree_.euler_in(leaf), 1);
  joins_at_.add(tree_.euler_in(e), 1);
  if (!used_[e]) {
    used_[e] = 1;
    used_marks_.add(tree_.euler_in(e), 1);
    used_marks_.add(tree_.euler_out(e) + 1, -1);
  }
}

JoiningConfig random_config(const LogicalTree& tree, std::uint64_t seed) {
  ConfigSampler sampler(tree);
  Rng rng(seed);
  std::vector<EdgeId> joins(tree.receiver_count());
  for (Receiver r = 0; r < joins.size(); ++r) {
    const std::size_t count = sampler.allowed_count(r);
    joins[r] = sampler.allowed_at(r, rng.uniform_index(count));
    sampler.place(r, joins[r]);
  }
  return JoiningConfig(std::move(joins));
}

}  // namespace qtomo
