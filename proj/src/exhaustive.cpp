#include "qtomo/exhaustive.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "qtomo/error.hpp"

namespace qtomo {

namespace {

[[noreturn]] void too_large(const std::string& message) {
  throw Error(ErrorCode::kTooLarge, message);
}

// Advances idx (strictly increasing, values < n) to the next k-combination
// in lexicographic order; false after the last one.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t pos = k; pos > 0; --pos) {
    const std::size_t p = pos - 1;
    if (idx[p] < n - k + p) {
      ++idx[p];
      for (std::size_t q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::size_t> first_combination(std::size_t k) {
  std::vector<std::size_t> idx(k);
  for (std::size_t q = 0; q < k; ++q) idx[q] = q;
  return idx;
}

void count_subset(std::uint64_t& examined, const EnumerationLimits& limits) {
  if (++examined > limits.max_subsets) {
    too_large("minimum quartet search exceeded " + std::to_string(limits.max_subsets) +
              " subsets; raise the limit or use a smaller tree");
  }
}

}  // namespace

std::size_t lower_bound(std::size_t n) {
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientReceivers,
                "a quartet needs two receivers, got N=" + std::to_string(n));
  }
  return (n + 1) / 2;
}

std::vector<ReceiverPair> all_pairs(std::size_t n) {
  std::vector<ReceiverPair> out;
  if (n >= 2) out.reserve(n * (n - 1) / 2);
  for (Receiver i = 0; i < n; ++i) {
    for (Receiver j = i + 1; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

std::vector<JoiningConfig> enumerate_valid_configs(const LogicalTree& tree,
                                                   const EnumerationLimits& limits) {
  const std::size_t n = tree.receiver_count();
  if (n > limits.max_receivers) {
    too_large("enumeration is capped at " + std::to_string(limits.max_receivers) +
              " receivers, tree has " + std::to_string(n));
  }
  std::vector<std::vector<EdgeId>> paths;
  std::uint64_t raw = 1;
  for (Receiver r = 0; r < n; ++r) {
    paths.push_back(tree.root_path(r));
    raw *= paths.back().size();
    if (raw > limits.max_raw_configs) {
      too_large("more than " + std::to_string(limits.max_raw_configs) +
                " raw joining configurations");
    }
  }

  std::vector<JoiningConfig> out;
  std::vector<EdgeId> joins(n, kNoNode);
  std::vector<std::size_t> choice(n, 0);
  // Compatible with every earlier receiver under the pairwise rule.
  auto compatible = [&](Receiver r, EdgeId e) {
    const NodeId node_r = tree.receiver_node(r);
    for (Receiver k = 0; k < r; ++k) {
      const EdgeId f = joins[k];
      if (f == e) continue;
      if (tree.is_ancestor_or_self(e, tree.receiver_node(k)) &&
          tree.is_ancestor_or_self(f, node_r)) {
        return false;
      }
    }
    return true;
  };
  // Iterative depth-first search; choice[r] is the next path index to try.
  Receiver r = 0;
  while (true) {
    if (r == n) {
      out.emplace_back(joins);
      --r;
      continue;
    }
    bool advanced = false;
    while (choice[r] < paths[r].size()) {
      const EdgeId e = paths[r][choice[r]++];
      if (compatible(r, e)) {
        joins[r] = e;
        advanced = true;
        break;
      }
    }
    if (advanced) {
      ++r;
      continue;
    }
    choice[r] = 0;
    if (r == 0) break;
    --r;
  }
  return out;
}

QuartetAnswerSet answers_on(const LogicalTree& tree, const JoiningConfig& config,
                            std::span<const ReceiverPair> pairs) {
  QuartetAnswerSet out;
  for (const ReceiverPair& p : pairs) {
    out[p] = quartet_type(tree, config, p.first, p.second);
  }
  return out;
}

ConfigUniverse::ConfigUniverse(const LogicalTree& tree, const EnumerationLimits& limits)
    : tree_(tree),
      configs_(enumerate_valid_configs(tree, limits)),
      pairs_(all_pairs(tree.receiver_count())) {
  if (pairs_.size() > 32) too_large("answer signatures hold at most 32 pairs");
  signatures_.reserve(configs_.size());
  for (const JoiningConfig& c : configs_) {
    std::uint64_t sig = 0;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto t = static_cast<std::uint64_t>(
          to_int(quartet_type(tree, c, pairs_[k].first, pairs_[k].second)) - 1);
      sig |= t << (2 * k);
    }
    signatures_.push_back(sig);
  }
}

std::size_t ConfigUniverse::index_of(const JoiningConfig& config) const {
  auto it = std::find(configs_.begin(), configs_.end(), config);
  if (it == configs_.end()) {
    throw Error(ErrorCode::kInvalidConfiguration, "configuration is not a valid one for this tree");
  }
  return static_cast<std::size_t>(it - configs_.begin());
}

std::uint64_t ConfigUniverse::mask_of(std::span<const ReceiverPair> pairs) const {
  std::uint64_t mask = 0;
  for (const ReceiverPair& p : pairs) {
    ReceiverPair q = p.first < p.second ? p : ReceiverPair{p.second, p.first};
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), q);
    if (it == pairs_.end() || *it != q) {
      throw Error(ErrorCode::kUnknownReceiver, "pair outside the receiver set");
    }
    mask |= std::uint64_t{3} << (2 * static_cast<std::size_t>(it - pairs_.begin()));
  }
  return mask;
}

std::uint64_t ConfigUniverse::mask_of_indices(std::span<const std::size_t> pair_indices) const {
  std::uint64_t mask = 0;
  for (std::size_t k : pair_indices) mask |= std::uint64_t{3} << (2 * k);
  return mask;
}

bool ConfigUniverse::identifies(std::uint64_t mask, std::size_t config) const {
  const std::uint64_t target = signatures_[config] & mask;
  for (std::size_t c = 0; c < signatures_.size(); ++c) {
    if (c != config && (signatures_[c] & mask) == target) return false;
  }
  return true;
}

bool identifies(const LogicalTree& tree, std::span<const ReceiverPair> pairs,
                const JoiningConfig& config, const EnumerationLimits& limits) {
  ConfigUniverse universe(tree, limits);
  return universe.identifies(universe.mask_of(pairs), universe.index_of(config));
}

MinQuartets min_quartets(const ConfigUniverse& universe, std::size_t config,
                         const EnumerationLimits& limits) {
  const std::size_t p = universe.pairs().size();
  std::uint64_t examined = 0;
  for (std::size_t k = 0; k <= p; ++k) {
    std::vector<std::size_t> idx = first_combination(k);
    do {
      count_subset(examined, limits);
      if (universe.identifies(universe.mask_of_indices(idx), config)) {
        MinQuartets out{k, {}};
        for (std::size_t q : idx) out.witness.push_back(universe.pairs()[q]);
        return out;
      }
    } while (next_combination(idx, p));
  }
  // All pairs always identify; only reachable for inconsistent universes.
  throw Error(ErrorCode::kInvalidConfiguration, "configuration is not identifiable");
}

MinQuartets min_quartets(const LogicalTree& tree, const JoiningConfig& config,
                         const EnumerationLimits& limits) {
  ConfigUniverse universe(tree, limits);
  return min_quartets(universe, universe.index_of(config), limits);
}

std::vector<MinQuartets> min_quartets_all(const ConfigUniverse& universe,
                                          const EnumerationLimits& limits) {
  const std::size_t count = universe.configs().size();
  const std::size_t p = universe.pairs().size();
  std::vector<MinQuartets> out(count);
  std::vector<char> done(count, 0);
  std::size_t remaining = count;
  std::uint64_t examined = 0;
  std::unordered_map<std::uint64_t, std::uint32_t> multiplicity;
  for (std::size_t k = 0; k <= p && remaining > 0; ++k) {
    std::vector<std::size_t> idx = first_combination(k);
    do {
      count_subset(examined, limits);
      const std::uint64_t mask = universe.mask_of_indices(idx);
      multiplicity.clear();
      for (std::size_t c = 0; c < count; ++c) ++multiplicity[universe.signature(c) & mask];
      for (std::size_t c = 0; c < count; ++c) {
        if (done[c] || multiplicity[universe.signature(c) & mask] != 1) continue;
        done[c] = 1;
        --remaining;
        out[c].count = k;
        for (std::size_t q : idx) out[c].witness.push_back(universe.pairs()[q]);
      }
    } while (remaining > 0 && next_combination(idx, p));
  }
  return out;
}

}  // namespace qtomo
