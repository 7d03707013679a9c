#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qtomo/topology.hpp"

namespace qtomo {

// Non-negative exact ratio; compared by cross multiplication so ties are
// decided exactly.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<unsigned __int128>(a.num) * b.den ==
           static_cast<unsigned __int128>(b.num) * a.den;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return static_cast<unsigned __int128>(a.num) * b.den <=>
           static_cast<unsigned __int128>(b.num) * a.den;
  }
};

struct ReaStep {
  ReceiverPair pair;
  NodeId parent = kNoNode;
  QuartetType answer = QuartetType::k4;
  Receiver deleted = 0;
  Receiver survivor = 0;
  EdgeId deleted_edge = kNoNode;
  // Label that disappeared through contraction, if one happened.
  std::optional<EdgeId> contracted_edge;
  // Join fixed for `deleted`; empty for a type-1 answer, where `deleted`
  // is aliased to `survivor` instead.
  std::optional<EdgeId> identified;
};

struct ReaTrace {
  std::vector<ReaStep> steps;
  // aliases[r] = receiver whose join r was equated to (type-1 coincidence).
  std::vector<std::optional<Receiver>> aliases;
  Receiver last_receiver = 0;
  EdgeId last_edge = kNoNode;
};

struct GbsStep {
  ReceiverPair pair;
  QuartetType answer = QuartetType::k4;
  Rational worst_case;
  bool cached = false;
};

struct GbsTrace {
  std::vector<GbsStep> steps;
};

struct InferenceResult {
  JoiningConfig joins;
  // Distinct quartet queries sent to the oracle.
  std::uint64_t queries_used = 0;
  std::variant<ReaTrace, GbsTrace> trace;

  // Pairs in the order they were sent to the oracle.
  std::vector<ReceiverPair> queried_pairs() const;
};

}  // namespace qtomo
