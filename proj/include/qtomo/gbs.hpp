#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qtomo/inference.hpp"
#include "qtomo/oracle.hpp"
#include "qtomo/topology.hpp"

namespace qtomo {

// Contiguous run of root-path edges, given by edge depth (1 = root edge).
struct Interval {
  std::uint32_t lo = 1;
  std::uint32_t hi = 0;

  std::uint32_t size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool empty() const { return hi < lo; }
  bool operator==(const Interval&) const = default;
};

// Candidate join edges per receiver.
class CandidateState {
 public:
  explicit CandidateState(const LogicalTree& tree);

  std::size_t receiver_count() const { return intervals_.size(); }
  const Interval& interval(Receiver r) const { return intervals_.at(r); }
  bool resolved(Receiver r) const { return intervals_.at(r).size() == 1; }
  std::size_t unresolved_count() const;

  // Shrinks r's interval; throws InconsistentAnswer if `next` is empty and
  // std::logic_error if it would grow.
  void narrow(Receiver r, Interval next);

 private:
  std::vector<Interval> intervals_;
};

// Four surviving-candidate ratios sharing the denominator |P_i||P_j|.
// The type-1 numerator is |up_i| alone.
struct BenefitQuad {
  std::uint64_t t1 = 0;
  std::uint64_t t2 = 0;
  std::uint64_t t3 = 0;
  std::uint64_t t4 = 0;
  std::uint64_t denominator = 1;

  Rational ratio(QuartetType t) const;
  Rational worst_case() const;
};

// `branch_depth` is the depth of lca(i, j) in the original tree.
BenefitQuad compute_benefits(const CandidateState& state, std::uint32_t branch_depth,
                             Receiver i, Receiver j);
BenefitQuad compute_benefits(const CandidateState& state, const LogicalTree& tree,
                             Receiver i, Receiver j);

struct GbsOptions {
  // Intersect the candidates of receivers known to share a join (type-1
  // answers). Off by default.
  bool propagate_equalities = false;
};

struct Selection {
  ReceiverPair pair;
  Rational worst_case;
};

// Greedy search state: candidate intervals, answered pairs and the
// pairwise branching depths of the original tree.
class GbsSearch {
 public:
  explicit GbsSearch(const LogicalTree& tree, GbsOptions options = {});

  const CandidateState& state() const { return state_; }
  std::uint32_t branch_depth(Receiver i, Receiver j) const;
  BenefitQuad benefits(Receiver i, Receiver j) const;

  // Pair with the smallest worst-case ratio, first in (i, j > i) order on
  // ties. Skips pairs whose receivers are both resolved and answered pairs
  // whose answer would shrink nothing. Empty when no pair qualifies.
  std::optional<Selection> select() const;

  // Narrows both intervals to the sides implied by `answer`.
  void apply_update(ReceiverPair pair, QuartetType answer);

  void record_answer(ReceiverPair pair, QuartetType answer);
  std::optional<QuartetType> cached(ReceiverPair pair) const;

  bool done() const { return state_.unresolved_count() == 0; }
  // Join edge per receiver; requires done().
  JoiningConfig joins() const;

 private:
  std::size_t index(Receiver i, Receiver j) const { return i * n_ + j; }
  bool would_shrink(ReceiverPair pair, QuartetType answer) const;
  void synchronise_class(Receiver r);
  Receiver find(Receiver r) const;

  const LogicalTree& tree_;
  GbsOptions options_;
  std::size_t n_;
  CandidateState state_;
  std::vector<std::uint32_t> branch_depth_;  // n x n, upper triangle used
  std::vector<std::uint8_t> answers_;        // 0 = not asked
  std::vector<Receiver> class_parent_;       // equal-join classes
  std::vector<std::vector<Receiver>> class_members_;
};

// Throws InsufficientReceivers (N < 2), Stalled (no eligible pair left with
// receivers unresolved) or InconsistentAnswer (noisy answers contradicting
// the candidates).
InferenceResult run_gbs(const LogicalTree& tree, QuartetOracle& oracle,
                        GbsOptions options = {});

}  // namespace qtomo
