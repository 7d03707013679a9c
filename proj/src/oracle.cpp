#include "qtomo/oracle.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtomo/error.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

void validate(const NoiseSpec& noise) {
  if (!(noise.p >= 0.0 && noise.p <= 1.0)) {
    throw std::invalid_argument("noise probability must be in [0, 1]");
  }
  if (noise.repeats == 0 || noise.repeats % 2 == 0) {
    throw std::invalid_argument("repeat count must be odd, got " + std::to_string(noise.repeats));
  }
}

QuartetType QuartetOracle::query(Receiver i, Receiver j) {
  const std::size_t n = receiver_count();
  if (i >= n || j >= n) {
    throw Error(ErrorCode::kUnknownReceiver, "query on unknown receiver index");
  }
  if (i == j) throw Error(ErrorCode::kSameReceiver, "quartet needs two distinct receivers");
  const bool swapped = i > j;
  if (swapped) std::swap(i, j);
  std::uint64_t probes = 0;
  const QuartetType t = answer(i, j, probes);
  ++stats_.quartet_queries;
  stats_.total_queries += probes;
  stats_.per_pair_counts[{i, j}] += probes;
  return swapped ? mirror(t) : t;
}

QuartetType ExactOracle::answer(Receiver i, Receiver j, std::uint64_t& probes) {
  probes = 1;
  return quartet_type(truth(), i, j);
}

QuartetType corrupt(QuartetType truth_type, double p, std::uint64_t seed,
                    std::uint64_t sequence) {
  const std::uint64_t base = splitmix64(seed);
  const double u = unit_interval(splitmix64(base ^ (2 * sequence)));
  if (!(u < p)) return truth_type;
  const auto pick = static_cast<int>(splitmix64(base ^ (2 * sequence + 1)) % 3);
  // pick-th of the three wrong types in ascending order
  int value = pick + 1;
  if (value >= to_int(truth_type)) ++value;
  return static_cast<QuartetType>(value);
}

QuartetType majority_vote(std::span<const QuartetType> votes) {
  if (votes.empty()) throw std::invalid_argument("majority vote over no answers");
  std::array<std::size_t, 5> count{};
  for (QuartetType v : votes) ++count[to_int(v)];
  int best = 1;
  for (int t = 2; t <= 4; ++t) {
    if (count[t] > count[best]) best = t;
  }
  return static_cast<QuartetType>(best);
}

NoisyOracle::NoisyOracle(const GroundTruth& truth, double p, std::uint64_t seed)
    : QuartetOracle(truth), p_(p), seed_(seed) {
  validate(NoiseSpec{p, 1, seed});
}

QuartetType NoisyOracle::draw(QuartetType truth_type) {
  return corrupt(truth_type, p_, seed_, sequence_++);
}

QuartetType NoisyOracle::answer(Receiver i, Receiver j, std::uint64_t& probes) {
  probes = 1;
  return draw(quartet_type(truth(), i, j));
}

MajorityOracle::MajorityOracle(const GroundTruth& truth, const NoiseSpec& noise)
    : NoisyOracle(truth, noise.p, noise.seed), repeats_(noise.repeats) {
  validate(noise);
}

QuartetType MajorityOracle::answer(Receiver i, Receiver j, std::uint64_t& probes) {
  const QuartetType truth_type = quartet_type(truth(), i, j);
  std::vector<QuartetType> votes(repeats_);
  for (auto& v : votes) v = draw(truth_type);
  probes = repeats_;
  return majority_vote(votes);
}

}  // namespace qtomo
