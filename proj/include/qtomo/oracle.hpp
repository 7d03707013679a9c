#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "qtomo/topology.hpp"

namespace qtomo {

struct OracleStats {
  // Quartets asked for by the caller; the query-count metric.
  std::uint64_t quartet_queries = 0;
  // Probe-level answers drawn; equals the sum of per_pair_counts.
  std::uint64_t total_queries = 0;
  std::map<ReceiverPair, std::uint64_t> per_pair_counts;

  std::size_t distinct_pairs() const { return per_pair_counts.size(); }
};

struct NoiseSpec {
  double p = 0.0;
  std::uint32_t repeats = 1;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument unless 0 <= p <= 1 and repeats is odd.
void validate(const NoiseSpec& noise);

// Answers quartet queries about a fixed ground truth. Each algorithm run owns
// its oracle; stats accumulate over the oracle's lifetime.
class QuartetOracle {
 public:
  explicit QuartetOracle(const GroundTruth& truth) : truth_(truth) {}
  virtual ~QuartetOracle() = default;
  QuartetOracle(const QuartetOracle&) = delete;
  QuartetOracle& operator=(const QuartetOracle&) = delete;

  // Answer oriented by argument order; stats are keyed by the ascending pair.
  QuartetType query(Receiver i, Receiver j);

  const OracleStats& stats() const { return stats_; }
  std::size_t receiver_count() const { return truth_.tree().receiver_count(); }

 protected:
  // Answer for i < j. Implementations report how many probe-level answers
  // they consumed through `probes`.
  virtual QuartetType answer(Receiver i, Receiver j, std::uint64_t& probes) = 0;

  const GroundTruth& truth() const { return truth_; }

 private:
  const GroundTruth& truth_;
  OracleStats stats_;
};

class ExactOracle final : public QuartetOracle {
 public:
  using QuartetOracle::QuartetOracle;

 protected:
  QuartetType answer(Receiver i, Receiver j, std::uint64_t& probes) override;
};

// With probability p the true type is replaced by one of the other three,
// uniformly. The k-th answer drawn depends only on (seed, k), so replaying
// the same query sequence with the same seed reproduces every answer.
class NoisyOracle : public QuartetOracle {
 public:
  NoisyOracle(const GroundTruth& truth, double p, std::uint64_t seed);

  std::uint64_t draws() const { return sequence_; }

 protected:
  QuartetType answer(Receiver i, Receiver j, std::uint64_t& probes) override;
  QuartetType draw(QuartetType truth_type);

 private:
  double p_;
  std::uint64_t seed_;
  std::uint64_t sequence_ = 0;
};

// Repeats each query `repeats` times through a noisy channel and returns the
// most frequent answer; ties go to the lowest type number.
class MajorityOracle final : public NoisyOracle {
 public:
  MajorityOracle(const GroundTruth& truth, const NoiseSpec& noise);

 protected:
  QuartetType answer(Receiver i, Receiver j, std::uint64_t& probes) override;

 private:
  std::uint32_t repeats_;
};

// Pure channel model used by NoisyOracle: the answer for draw number
// `sequence` under `seed`.
QuartetType corrupt(QuartetType truth_type, double p, std::uint64_t seed,
                    std::uint64_t sequence);

QuartetType majority_vote(std::span<const QuartetType> votes);

}  // namespace qtomo
