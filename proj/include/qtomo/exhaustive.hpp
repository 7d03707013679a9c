#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qtomo/topology.hpp"

namespace qtomo {

struct EnumerationLimits {
  std::size_t max_receivers = 8;
  std::uint64_t max_raw_configs = 1'000'000;
  // Pair subsets examined by the minimum-set search.
  std::uint64_t max_subsets = 20'000'000;
};

// ceil(n / 2); throws InsufficientReceivers for n < 2.
std::size_t lower_bound(std::size_t n);

// All receiver pairs (i < j) in lexicographic order.
std::vector<ReceiverPair> all_pairs(std::size_t n);

// Every valid configuration, ordered lexicographically by receiver index
// and, within a receiver, by edge depth (root edge first). Throws TooLarge
// beyond the limits.
std::vector<JoiningConfig> enumerate_valid_configs(const LogicalTree& tree,
                                                   const EnumerationLimits& limits = {});

using QuartetAnswerSet = std::map<ReceiverPair, QuartetType>;

QuartetAnswerSet answers_on(const LogicalTree& tree, const JoiningConfig& config,
                            std::span<const ReceiverPair> pairs);

// Valid configurations of one tree with their answers to every pair packed
// two bits per pair, so a subset of pairs is a bit mask.
class ConfigUniverse {
 public:
  explicit ConfigUniverse(const LogicalTree& tree, const EnumerationLimits& limits = {});

  const LogicalTree& tree() const { return tree_; }
  const std::vector<JoiningConfig>& configs() const { return configs_; }
  const std::vector<ReceiverPair>& pairs() const { return pairs_; }
  std::uint64_t signature(std::size_t config) const { return signatures_[config]; }
  // Index of `config` in configs(); throws InvalidConfiguration if absent.
  std::size_t index_of(const JoiningConfig& config) const;

  std::uint64_t mask_of(std::span<const ReceiverPair> pairs) const;
  std::uint64_t mask_of_indices(std::span<const std::size_t> pair_indices) const;
  // True iff no other valid configuration agrees with `config` on the mask.
  bool identifies(std::uint64_t mask, std::size_t config) const;

 private:
  const LogicalTree& tree_;
  std::vector<JoiningConfig> configs_;
  std::vector<ReceiverPair> pairs_;
  std::vector<std::uint64_t> signatures_;
};

// True iff the answers on `pairs` single out `config` among all valid
// configurations of the tree.
bool identifies(const LogicalTree& tree, std::span<const ReceiverPair> pairs,
                const JoiningConfig& config, const EnumerationLimits& limits = {});

struct MinQuartets {
  std::size_t count = 0;
  // First identifying subset of that size in lexicographic pair order.
  std::vector<ReceiverPair> witness;
};

// Smallest identifying set of pairs, searched by increasing size.
MinQuartets min_quartets(const LogicalTree& tree, const JoiningConfig& config,
                         const EnumerationLimits& limits = {});
MinQuartets min_quartets(const ConfigUniverse& universe, std::size_t config,
                         const EnumerationLimits& limits = {});

// min_quartets for every configuration of the universe at once, in the
// universe's order.
std::vector<MinQuartets> min_quartets_all(const ConfigUniverse& universe,
                                          const EnumerationLimits& limits = {});

}  // namespace qtomo
