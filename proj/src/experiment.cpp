#include "qtomo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include "qtomo/error.hpp"
#include "qtomo/exhaustive.hpp"
#include "qtomo/rea.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

namespace {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kRea ? "rea" : "gbs";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "rea") return Algorithm::kRea;
  if (name == "gbs") return Algorithm::kGbs;
  throw Error(ErrorCode::kBadSpec, "unknown algorithm '" + std::string(name) + "' (rea|gbs)");
}

std::unique_ptr<QuartetOracle> make_oracle(const GroundTruth& truth, const NoiseSpec& noise) {
  validate(noise);
  if (noise.repeats == 1) {
    if (noise.p == 0.0) return std::make_unique<ExactOracle>(truth);
    return std::make_unique<NoisyOracle>(truth, noise.p, noise.seed);
  }
  return std::make_unique<MajorityOracle>(truth, noise);
}

RunReport run_inference(const GroundTruth& truth, const RunOptions& options) {
  auto oracle = make_oracle(truth, options.noise);
  RunReport report;
  report.result = options.algorithm == Algorithm::kRea
                      ? run_rea(truth.tree(), *oracle)
                      : run_gbs(truth.tree(), *oracle, options.gbs);
  report.stats = oracle->stats();
  report.correct = report.result.joins == truth.config();
  return report;
}

std::uint64_t row_seed(std::uint64_t base_seed, Shape shape, std::size_t n,
                       std::size_t realization) {
  const std::string key = std::string(to_string(shape)) + ":" + std::to_string(n) + ":" +
                          std::to_string(realization);
  return base_seed ^ fnv1a64(key);
}

SweepRow run_row(const LogicalTree& tree, Shape shape, std::uint64_t seed, Algorithm algorithm,
                 const SweepConfig& config) {
  SweepRow row;
  row.shape = shape;
  row.n = tree.receiver_count();
  row.algorithm = algorithm;
  row.seed = seed;
  row.lower_bound = lower_bound(row.n);
  const auto start = std::chrono::steady_clock::now();
  std::unique_ptr<QuartetOracle> oracle;
  try {
    const GroundTruth truth(tree, random_config(tree, seed));
    NoiseSpec noise = config.noise;
    noise.seed = splitmix64(seed);
    oracle = make_oracle(truth, noise);
    const InferenceResult result = algorithm == Algorithm::kRea
                                       ? run_rea(truth.tree(), *oracle)
                                       : run_gbs(truth.tree(), *oracle, config.gbs);
    row.correct = result.joins == truth.config();
  } catch (const std::exception& e) {
    row.error = e.what();
    row.correct = false;
  }
  if (oracle) {
    row.queries_used = oracle->stats().quartet_queries;
    row.probe_queries = oracle->stats().total_queries;
  }
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  if (config.sizes.empty()) throw Error(ErrorCode::kBadSpec, "sweep needs at least one size");
  if (config.algorithms.empty()) throw Error(ErrorCode::kBadSpec, "sweep needs an algorithm");
  if (config.seeds.empty() && config.realizations == 0) {
    throw Error(ErrorCode::kBadSpec, "realizations must be at least 1");
  }
  validate(config.noise);
  const std::size_t per_size = config.seeds.empty() ? config.realizations : config.seeds.size();

  std::vector<LogicalTree> trees;
  trees.reserve(config.sizes.size());
  for (std::size_t n : config.sizes) {
    if (n < 2) throw Error(ErrorCode::kBadSpec, "sweep sizes need N >= 2");
    trees.push_back(make_tree(spec_for_receivers(config.shape, n)));
  }

  struct Task {
    std::size_t tree;
    std::uint64_t seed;
    Algorithm algorithm;
  };
  std::vector<Task> tasks;
  tasks.reserve(trees.size() * per_size * config.algorithms.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (std::size_t k = 0; k < per_size; ++k) {
      const std::uint64_t seed = config.seeds.empty()
                                     ? row_seed(config.base_seed, config.shape, config.sizes[t], k)
                                     : config.seeds[k];
      for (Algorithm a : config.algorithms) tasks.push_back({t, seed, a});
    }
  }

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& task = tasks[k];
      rows[k] = run_row(trees[task.tree], config.shape, task.seed, task.algorithm, config);
    }
  };
  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return rows;
}

std::string_view csv_header() {
  return "shape,N,algorithm,seed,queries_used,lower_bound,correct,runtime_ms,probe_queries,error";
}

std::string csv_line(const SweepRow& row) {
  char runtime[32];
  std::snprintf(runtime, sizeof runtime, "%.3f", row.runtime_ms);
  std::ostringstream out;
  out << to_string(row.shape) << ',' << row.n << ',' << to_string(row.algorithm) << ','
      << row.seed << ',' << row.queries_used << ',' << row.lower_bound << ','
      << (row.correct ? "true" : "false") << ',' << runtime << ',' << row.probe_queries << ','
      << csv_field(row.error);
  return out.str();
}

void write_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << csv_header() << '\n';
  for (const SweepRow& row : rows) out << csv_line(row) << '\n';
}

std::vector<CellSummary> summarize(std::span<const SweepRow> rows) {
  // Cells keep the order in which they first appear.
  std::vector<CellSummary> cells;
  std::map<std::tuple<int, std::size_t, int>, std::size_t> index;
  std::vector<double> sum_sq;
  for (const SweepRow& row : rows) {
    const auto key = std::make_tuple(static_cast<int>(row.shape), row.n,
                                     static_cast<int>(row.algorithm));
    auto [it, fresh] = index.try_emplace(key, cells.size());
    if (fresh) {
      CellSummary c;
      c.shape = row.shape;
      c.n = row.n;
      c.algorithm = row.algorithm;
      c.min = row.queries_used;
      c.max = row.queries_used;
      cells.push_back(c);
      sum_sq.push_back(0.0);
    }
    CellSummary& c = cells[it->second];
    // Welford update of mean and squared deviations.
    ++c.runs;
    const double q = static_cast<double>(row.queries_used);
    const double delta = q - c.mean;
    c.mean += delta / static_cast<double>(c.runs);
    sum_sq[it->second] += delta * (q - c.mean);
    c.min = std::min(c.min, row.queries_used);
    c.max = std::max(c.max, row.queries_used);
    if (!row.correct) ++c.failures;
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    cells[k].stddev = cells[k].runs > 1
                          ? std::sqrt(sum_sq[k] / static_cast<double>(cells[k].runs - 1))
                          : 0.0;
  }
  return cells;
}

void write_summary(std::ostream& out, std::span<const CellSummary> cells) {
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %7s %4s %6s %10s %9s %6s %6s %8s\n", "shape", "N",
                "alg", "runs", "mean", "stddev", "min", "max", "failures");
  out << line;
  for (const CellSummary& c : cells) {
    std::snprintf(line, sizeof line, "%-16s %7zu %4s %6zu %10.3f %9.3f %6llu %6llu %8zu\n",
                  std::string(to_string(c.shape)).c_str(), c.n,
                  std::string(to_string(c.algorithm)).c_str(), c.runs, c.mean, c.stddev,
                  static_cast<unsigned long long>(c.min), static_cast<unsigned long long>(c.max),
                  c.failures);
    out << line;
  }
}

std::vector<SourceRun> run_multi_source(const LogicalTree& tree,
                                        std::span<const std::string> names,
                                        std::span<const JoiningConfig> configs,
                                        const RunOptions& options) {
  if (names.size() != configs.size()) {
    throw std::invalid_argument("one name per source configuration");
  }
  std::vector<SourceRun> out;
  out.reserve(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    SourceRun run;
    run.name = names[k];
    try {
      const GroundTruth truth(tree, configs[k]);
      run.report = run_inference(truth, options);
    } catch (const std::exception& e) {
      run.error = e.what();
    }
    out.push_back(std::move(run));
  }
  return out;
}

}  // namespace qtomo
