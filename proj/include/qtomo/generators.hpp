#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qtomo/topology.hpp"

namespace qtomo {

enum class Shape { kStar, kPerfectBinary, kTallBinary, kPerfectTernary };

std::string_view to_string(Shape shape);
// Throws BadSpec for unknown names.
Shape parse_shape(std::string_view name);

// `size` is the receiver count for star and tall_binary and the depth for
// the perfect trees.
struct GeneratorSpec {
  Shape shape = Shape::kStar;
  std::uint32_t size = 2;
};

// Spec producing exactly n receivers; throws BadSpec when the shape cannot
// (perfect trees need a power of 2 or 3).
GeneratorSpec spec_for_receivers(Shape shape, std::size_t n);
std::size_t receiver_count(const GeneratorSpec& spec);

// Node names are S1 for the root, B<k> for branching points and R<k> for
// receivers; edges are labelled e1, e2, ... breadth-first, e1 being the
// root edge. star(N): S1 -> hub -> N leaves. perfect_binary(d) and
// perfect_ternary(d): a root edge above a complete tree of depth d.
// tall_binary(N): a caterpillar of N-1 branching points with R1 and R2 at
// the bottom and R_N hanging from the top.
LogicalTree make_tree(const GeneratorSpec& spec);

// Sequential constrained sampler for joining configurations. Receivers are
// placed one at a time; allowed() lists the root-path edges of a receiver
// that keep the partial placement valid. For a receiver r these are the
// deepest join already used on r's path (if any) plus a contiguous run of
// edges ending at r's leaf edge, so each query costs O(log^2 N).
class ConfigSampler {
 public:
  explicit ConfigSampler(const LogicalTree& tree);

  std::size_t allowed_count(Receiver r) const;
  EdgeId allowed_at(Receiver r, std::size_t k) const;
  std::vector<EdgeId> allowed(Receiver r) const;
  void place(Receiver r, EdgeId e);

  bool placed(Receiver r) const { return placed_[r] != 0; }

 private:
  struct Fenwick {
    std::vector<std::int64_t> sum;
    explicit Fenwick(std::size_t n) : sum(n + 1, 0) {}
    void add(std::size_t pos, std::int64_t delta);
    std::int64_t prefix(std::size_t pos) const;  // sum over [0, pos]
    std::int64_t range(std::size_t lo, std::size_t hi) const {
      return prefix(hi) - (lo == 0 ? 0 : prefix(lo - 1));
    }
  };
  struct Range {
    NodeId deepest_join = kNoNode;
    std::uint32_t first_depth = 0;  // run of allowed edges [first, path end]
    std::uint32_t last_depth = 0;
  };

  Range allowed_range(Receiver r) const;
  NodeId ancestor_at_depth(NodeId v, std::uint32_t depth) const;
  std::int64_t used_above(NodeId v) const;
  bool unblocked(NodeId v) const;

  const LogicalTree& tree_;
  std::vector<std::vector<NodeId>> lift_;
  Fenwick placed_receivers_;
  Fenwick joins_at_;
  Fenwick used_marks_;  // range add over subtree, point query
  std::vector<char> used_;
  std::vector<char> placed_;
};

// Joins drawn receiver by receiver, uniformly among the edges that keep the
// placement valid. Deterministic in the seed; always valid.
JoiningConfig random_config(const LogicalTree& tree, std::uint64_t seed);

}  // namespace qtomo
