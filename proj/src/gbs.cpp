#include "qtomo/gbs.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

constexpr std::size_t kMaxGbsReceivers = 4096;

struct Sides {
  Interval up;
  Interval dn;
};

Sides split(const Interval& p, std::uint32_t branch_depth) {
  return {Interval{p.lo, std::min(p.hi, branch_depth)},
          Interval{std::max(p.lo, branch_depth + 1), p.hi}};
}

}  // namespace

CandidateState::CandidateState(const LogicalTree& tree) {
  intervals_.reserve(tree.receiver_count());
  for (Receiver r = 0; r < tree.receiver_count(); ++r) {
    intervals_.push_back(Interval{1, tree.path_length(r)});
  }
}

std::size_t CandidateState::unresolved_count() const {
  return static_cast<std::size_t>(std::count_if(
      intervals_.begin(), intervals_.end(), [](const Interval& p) { return p.size() != 1; }));
}

void CandidateState::narrow(Receiver r, Interval next) {
  Interval& current = intervals_.at(r);
  if (next.empty()) {
    throw Error(ErrorCode::kInconsistentAnswer,
                "answer leaves receiver " + std::to_string(r + 1) + " without candidates");
  }
  if (next.lo < current.lo || next.hi > current.hi) {
    throw std::logic_error("candidate intervals never grow");
  }
  current = next;
}

Rational BenefitQuad::ratio(QuartetType t) const {
  switch (t) {
    case QuartetType::k1:
      return {t1, denominator};
    case QuartetType::k2:
      return {t2, denominator};
    case QuartetType::k3:
      return {t3, denominator};
    case QuartetType::k4:
      return {t4, denominator};
  }
  return {0, denominator};
}

Rational BenefitQuad::worst_case() const {
  return {std::max({t1, t2, t3, t4}), denominator};
}

BenefitQuad compute_benefits(const CandidateState& state, std::uint32_t branch_depth,
                             Receiver i, Receiver j) {
  const Interval& pi = state.interval(i);
  const Interval& pj = state.interval(j);
  const Sides si = split(pi, branch_depth);
  const Sides sj = split(pj, branch_depth);
  const std::uint64_t up_i = si.up.size();
  const std::uint64_t dn_i = si.dn.size();
  const std::uint64_t up_j = sj.up.size();
  const std::uint64_t dn_j = sj.dn.size();
  BenefitQuad q;
  q.denominator = std::uint64_t{pi.size()} * pj.size();
  q.t1 = up_i;
  q.t2 = up_i * dn_j;
  q.t3 = dn_i * up_j;
  q.t4 = dn_i * dn_j;
  return q;
}

BenefitQuad compute_benefits(const CandidateState& state, const LogicalTree& tree,
                             Receiver i, Receiver j) {
  return compute_benefits(state, tree.depth(tree.lca(i, j)), i, j);
}

GbsSearch::GbsSearch(const LogicalTree& tree, GbsOptions options)
    : tree_(tree),
      options_(options),
      n_(tree.receiver_count()),
      state_(tree) {
  if (n_ < 2) {
    throw Error(ErrorCode::kInsufficientReceivers,
                "binary search needs at least 2 receivers, got " + std::to_string(n_));
  }
  if (n_ > kMaxGbsReceivers) {
    throw Error(ErrorCode::kTooLarge, "binary search keeps an N x N table; N=" +
                                          std::to_string(n_) + " exceeds " +
                                          std::to_string(kMaxGbsReceivers));
  }
  branch_depth_.assign(n_ * n_, 0);
  answers_.assign(n_ * n_, 0);
  for (Receiver i = 0; i < n_; ++i) {
    for (Receiver j = i + 1; j < n_; ++j) {
      branch_depth_[index(i, j)] = tree.depth(tree.lca(i, j));
    }
  }
  class_parent_.resize(n_);
  class_members_.resize(n_);
  for (Receiver r = 0; r < n_; ++r) {
    class_parent_[r] = r;
    class_members_[r] = {r};
  }
}

std::uint32_t GbsSearch::branch_depth(Receiver i, Receiver j) const {
  if (i > j) std::swap(i, j);
  return branch_depth_[index(i, j)];
}

BenefitQuad GbsSearch::benefits(Receiver i, Receiver j) const {
  return compute_benefits(state_, branch_depth(i, j), i, j);
}

void GbsSearch::record_answer(ReceiverPair pair, QuartetType answer) {
  answers_[index(pair.first, pair.second)] = static_cast<std::uint8_t>(to_int(answer));
}

std::optional<QuartetType> GbsSearch::cached(ReceiverPair pair) const {
  const std::uint8_t a = answers_[index(pair.first, pair.second)];
  if (a == 0) return std::nullopt;
  return static_cast<QuartetType>(a);
}

bool GbsSearch::would_shrink(ReceiverPair pair, QuartetType answer) const {
  const std::uint32_t b = branch_depth(pair.first, pair.second);
  const Sides si = split(state_.interval(pair.first), b);
  const Sides sj = split(state_.interval(pair.second), b);
  const bool i_up = answer == QuartetType::k1 || answer == QuartetType::k2;
  const bool j_up = answer == QuartetType::k1 || answer == QuartetType::k3;
  const Interval& ni = i_up ? si.up : si.dn;
  const Interval& nj = j_up ? sj.up : sj.dn;
  return ni.size() != state_.interval(pair.first).size() ||
         nj.size() != state_.interval(pair.second).size();
}

std::optional<Selection> GbsSearch::select() const {
  std::optional<Selection> best;
  for (Receiver i = 0; i < n_; ++i) {
    const bool ri = state_.resolved(i);
    for (Receiver j = i + 1; j < n_; ++j) {
      if (ri && state_.resolved(j)) continue;
      if (auto a = cached({i, j}); a && !would_shrink({i, j}, *a)) continue;
      const Rational wc = benefits(i, j).worst_case();
      if (!best || wc < best->worst_case) best = Selection{{i, j}, wc};
    }
  }
  return best;
}

Receiver GbsSearch::find(Receiver r) const {
  while (class_parent_[r] != r) r = class_parent_[r];
  return r;
}

void GbsSearch::synchronise_class(Receiver r) {
  const Receiver root = find(r);
  const auto& members = class_members_[root];
  if (members.size() < 2) return;
  Interval common = state_.interval(members.front());
  for (Receiver m : members) {
    const Interval& p = state_.interval(m);
    common.lo = std::max(common.lo, p.lo);
    common.hi = std::min(common.hi, p.hi);
  }
  for (Receiver m : members) state_.narrow(m, common);
}

void GbsSearch::apply_update(ReceiverPair pair, QuartetType answer) {
  const auto [i, j] = pair;
  if (i >= j || j >= n_) throw std::invalid_argument("update needs an ascending receiver pair");
  const std::uint32_t b = branch_depth(i, j);
  const Sides si = split(state_.interval(i), b);
  const Sides sj = split(state_.interval(j), b);
  switch (answer) {
    case QuartetType::k1:
      state_.narrow(i, si.up);
      state_.narrow(j, sj.up);
      break;
    case QuartetType::k2:
      state_.narrow(i, si.up);
      state_.narrow(j, sj.dn);
      break;
    case QuartetType::k3:
      state_.narrow(i, si.dn);
      state_.narrow(j, sj.up);
      break;
    case QuartetType::k4:
      state_.narrow(i, si.dn);
      state_.narrow(j, sj.dn);
      break;
  }
  if (!options_.propagate_equalities) return;
  if (answer == QuartetType::k1) {
    Receiver a = find(i);
    Receiver c = find(j);
    if (a != c) {
      if (class_members_[a].size() < class_members_[c].size()) std::swap(a, c);
      class_parent_[c] = a;
      auto& into = class_members_[a];
      into.insert(into.end(), class_members_[c].begin(), class_members_[c].end());
      class_members_[c].clear();
    }
  }
  synchronise_class(i);
  synchronise_class(j);
}

JoiningConfig GbsSearch::joins() const {
  std::vector<EdgeId> out(n_);
  for (Receiver r = 0; r < n_; ++r) {
    if (!state_.resolved(r)) throw std::logic_error("joins() before every receiver is resolved");
    NodeId v = tree_.receiver_node(r);
    while (tree_.depth(v) > state_.interval(r).lo) v = tree_.parent(v);
    out[r] = v;
  }
  return JoiningConfig(std::move(out));
}

InferenceResult run_gbs(const LogicalTree& tree, QuartetOracle& oracle, GbsOptions options) {
  if (oracle.receiver_count() != tree.receiver_count()) {
    throw Error(ErrorCode::kUnknownReceiver, "oracle and tree disagree on the receiver count");
  }
  GbsSearch search(tree, options);
  const std::uint64_t before = oracle.stats().quartet_queries;
  GbsTrace trace;
  while (!search.done()) {
    const auto selection = search.select();
    if (!selection) {
      throw Error(ErrorCode::kStalled,
                  std::to_string(search.state().unresolved_count()) +
                      " receivers unresolved and no informative quartet left");
    }
    const ReceiverPair pair = selection->pair;
    auto answer = search.cached(pair);
    const bool was_cached = answer.has_value();
    if (!answer) {
      answer = oracle.query(pair.first, pair.second);
      search.record_answer(pair, *answer);
    }
    trace.steps.push_back({pair, *answer, selection->worst_case, was_cached});
    search.apply_update(pair, *answer);
  }
  InferenceResult result;
  result.joins = search.joins();
  result.queries_used = oracle.stats().quartet_queries - before;
  result.trace = std::move(trace);
  return result;
}

}  // namespace qtomo
