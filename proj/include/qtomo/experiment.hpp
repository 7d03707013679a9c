#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtomo/gbs.hpp"
#include "qtomo/generators.hpp"
#include "qtomo/inference.hpp"
#include "qtomo/oracle.hpp"
#include "qtomo/topology.hpp"

namespace qtomo {

enum class Algorithm { kRea, kGbs };

std::string_view to_string(Algorithm algorithm);
// Throws BadSpec for names other than "rea" and "gbs".
Algorithm parse_algorithm(std::string_view name);

struct RunOptions {
  Algorithm algorithm = Algorithm::kRea;
  NoiseSpec noise;
  GbsOptions gbs;
};

// Exact oracle for p = 0 and one repeat, a single noisy channel for one
// repeat, majority voting otherwise.
std::unique_ptr<QuartetOracle> make_oracle(const GroundTruth& truth, const NoiseSpec& noise);

struct RunReport {
  InferenceResult result;
  OracleStats stats;
  bool correct = false;
};

RunReport run_inference(const GroundTruth& truth, const RunOptions& options);

struct SweepConfig {
  Shape shape = Shape::kStar;
  std::vector<std::size_t> sizes;  // receiver counts
  std::size_t realizations = 100;
  std::vector<Algorithm> algorithms{Algorithm::kRea, Algorithm::kGbs};
  // Only p and repeats are used; the channel seed comes from the row seed.
  NoiseSpec noise;
  GbsOptions gbs;
  std::uint64_t base_seed = 1;
  // When non-empty, replaces the derived per-realization seeds.
  std::vector<std::uint64_t> seeds;
  // Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 1;
};

struct SweepRow {
  Shape shape = Shape::kStar;
  std::size_t n = 0;
  Algorithm algorithm = Algorithm::kRea;
  std::uint64_t seed = 0;
  std::uint64_t queries_used = 0;
  std::size_t lower_bound = 0;
  bool correct = false;
  double runtime_ms = 0.0;
  std::uint64_t probe_queries = 0;
  std::string error;
};

// base_seed XOR fnv1a64("<shape>:<N>:<realization>").
std::uint64_t row_seed(std::uint64_t base_seed, Shape shape, std::size_t n,
                       std::size_t realization);

// Throws BadSpec for an unusable config. Rows come out ordered by size,
// realization and algorithm whatever the thread count; a failing run is
// recorded in its row and the sweep goes on.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

// One sweep row for a given tree, seed and algorithm.
SweepRow run_row(const LogicalTree& tree, Shape shape, std::uint64_t seed, Algorithm algorithm,
                 const SweepConfig& config);

std::string_view csv_header();
std::string csv_line(const SweepRow& row);
void write_csv(std::ostream& out, std::span<const SweepRow> rows);

struct CellSummary {
  Shape shape = Shape::kStar;
  std::size_t n = 0;
  Algorithm algorithm = Algorithm::kRea;
  std::size_t runs = 0;
  std::size_t failures = 0;  // errors or wrong maps
  double mean = 0.0;         // queries_used over all runs
  double stddev = 0.0;       // sample standard deviation
  std::uint64_t min = 0;
  std::uint64_t max = 0;
};

std::vector<CellSummary> summarize(std::span<const SweepRow> rows);
void write_summary(std::ostream& out, std::span<const CellSummary> cells);

struct SourceRun {
  std::string name;
  std::optional<RunReport> report;
  std::string error;
};

// One inference per additional source against the first source's tree.
// Failures stay local to their source.
std::vector<SourceRun> run_multi_source(const LogicalTree& tree,
                                        std::span<const std::string> names,
                                        std::span<const JoiningConfig> configs,
                                        const RunOptions& options);

}  // namespace qtomo
