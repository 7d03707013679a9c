// qtomo: command-line front end for quartet-based 2-by-N topology inference.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qtomo/error.hpp"
#include "qtomo/exhaustive.hpp"
#include "qtomo/experiment.hpp"
#include "qtomo/generators.hpp"
#include "qtomo/topology_io.hpp"

namespace {

using namespace qtomo;

struct InputArgs {
  std::string file;
  std::string shape;
  std::size_t size = 0;
  std::uint64_t seed = 1;
};

struct NoiseArgs {
  double p = 0.0;
  std::uint32_t repeats = 1;
  bool propagate = false;
};

void add_input_options(CLI::App* cmd, InputArgs& in) {
  cmd->add_option("file", in.file, "Topology file");
  cmd->add_option("--shape", in.shape, "Generator shape instead of a file")
      ->check(CLI::IsMember({"star", "perfect_binary", "tall_binary", "perfect_ternary"}));
  cmd->add_option("--size", in.size, "Receiver count N for the generator");
  cmd->add_option("--seed", in.seed, "Seed for the random joining configuration");
}

void add_noise_options(CLI::App* cmd, NoiseArgs& noise) {
  cmd->add_option("--noise-p", noise.p, "Probability that a query answer is corrupted")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--repeats", noise.repeats, "Odd number of repeats for majority voting");
  cmd->add_flag("--propagate-equalities", noise.propagate,
                "GBS: share candidates between receivers with coincident joins");
}

Topology resolve_input(const InputArgs& in) {
  if (!in.file.empty()) {
    if (!in.shape.empty()) throw Error(ErrorCode::kBadSpec, "give a file or --shape, not both");
    return load_topology(in.file);
  }
  if (in.shape.empty() || in.size == 0) {
    throw Error(ErrorCode::kBadSpec, "need a topology file or --shape with --size");
  }
  LogicalTree tree = make_tree(spec_for_receivers(parse_shape(in.shape), in.size));
  JoiningConfig config = random_config(tree, in.seed);
  return Topology{std::move(tree), std::move(config)};
}

GroundTruth require_truth(Topology topo) {
  if (!topo.config) {
    throw Error(ErrorCode::kMissingGroundTruth,
                "missing ground truth: the input has no join lines, so no oracle can answer");
  }
  return GroundTruth(std::move(topo.tree), std::move(*topo.config));
}

RunOptions run_options(const std::string& alg, const NoiseArgs& noise, std::uint64_t seed) {
  RunOptions options;
  options.algorithm = parse_algorithm(alg);
  options.noise = NoiseSpec{noise.p, noise.repeats, seed};
  options.gbs.propagate_equalities = noise.propagate;
  return options;
}

std::string join_list(const LogicalTree& tree, const JoiningConfig& config) {
  std::string out = "[";
  for (Receiver r = 0; r < config.size(); ++r) {
    if (r) out += ", ";
    out += tree.edge_label(config.join(r)).id;
  }
  return out + "]";
}

std::string pair_name(const LogicalTree& tree, ReceiverPair p) {
  return "(" + tree.receiver_name(p.first) + "," + tree.receiver_name(p.second) + ")";
}

void print_trace(const LogicalTree& tree, const InferenceResult& result) {
  if (const auto* rea = std::get_if<ReaTrace>(&result.trace)) {
    std::size_t k = 0;
    for (const ReaStep& s : rea->steps) {
      std::cout << "  step " << ++k << ": " << pair_name(tree, s.pair) << " type "
                << to_int(s.answer) << ", delete " << tree.edge_label(s.deleted_edge).id << " ("
                << tree.receiver_name(s.deleted) << ")";
      if (s.identified) {
        std::cout << ", J(" << tree.receiver_name(s.deleted)
                  << ") = " << tree.edge_label(*s.identified).id;
      } else {
        std::cout << ", J(" << tree.receiver_name(s.deleted) << ") = J("
                  << tree.receiver_name(s.survivor) << ")";
      }
      if (s.contracted_edge) std::cout << ", contract " << tree.edge_label(*s.contracted_edge).id;
      std::cout << '\n';
    }
    std::cout << "  final: J(" << tree.receiver_name(rea->last_receiver)
              << ") = " << tree.edge_label(rea->last_edge).id << '\n';
    return;
  }
  std::size_t k = 0;
  for (const GbsStep& s : std::get<GbsTrace>(result.trace).steps) {
    std::cout << "  step " << ++k << ": " << pair_name(tree, s.pair) << " type "
              << to_int(s.answer) << ", worst case " << s.worst_case.num << "/"
              << s.worst_case.den << (s.cached ? " (cached)" : "") << '\n';
  }
}

void print_report(const GroundTruth& truth, const RunOptions& options, const RunReport& report,
                  bool trace) {
  const LogicalTree& tree = truth.tree();
  std::cout << "algorithm: " << to_string(options.algorithm) << '\n'
            << "receivers: " << tree.receiver_count() << '\n'
            << "queries: " << report.result.queries_used << '\n'
            << "probe queries: " << report.stats.total_queries << '\n'
            << "distinct pairs: " << report.stats.distinct_pairs() << '\n'
            << "J = " << join_list(tree, report.result.joins) << '\n'
            << "truth = " << join_list(tree, truth.config()) << '\n'
            << "correct: " << (report.correct ? "yes" : "no") << '\n';
  if (trace) print_trace(tree, report.result);
}

int cmd_gen(const std::string& shape, std::size_t size, std::uint64_t seed, bool no_joins,
            const std::string& out) {
  LogicalTree tree = make_tree(spec_for_receivers(parse_shape(shape), size));
  std::optional<JoiningConfig> config;
  if (!no_joins) config = random_config(tree, seed);
  std::ostringstream text;
  text << "# " << shape << " N=" << tree.receiver_count();
  if (config) text << " seed=" << seed;
  text << '\n' << serialize_topology(tree, config);
  if (out.empty() || out == "-") {
    std::cout << text.str();
  } else {
    write_text_file(out, text.str());
  }
  return 0;
}

int cmd_bruteforce(Topology topo) {
  const GroundTruth truth = require_truth(std::move(topo));
  const LogicalTree& tree = truth.tree();
  const ConfigUniverse universe(tree);
  const MinQuartets best = min_quartets(universe, universe.index_of(truth.config()));
  std::cout << "receivers: " << tree.receiver_count() << '\n'
            << "valid configurations: " << universe.configs().size() << '\n'
            << "min quartets: " << best.count << '\n'
            << "lower bound: " << lower_bound(tree.receiver_count()) << '\n'
            << "witness:";
  for (const ReceiverPair& p : best.witness) std::cout << ' ' << pair_name(tree, p);
  std::cout << '\n';
  return 0;
}

int cmd_multi(const std::string& tree_file, const std::vector<std::string>& joins_files,
              const RunOptions& options, bool trace) {
  Topology topo = load_topology(tree_file);
  std::vector<std::string> names;
  std::vector<std::optional<JoiningConfig>> parsed;
  std::vector<std::string> parse_errors;
  if (topo.config) {
    names.push_back(tree_file);
    parsed.push_back(topo.config);
    parse_errors.emplace_back();
  }
  for (const std::string& path : joins_files) {
    names.push_back(path);
    try {
      parsed.push_back(parse_joins(read_text_file(path), topo.tree));
      parse_errors.emplace_back();
    } catch (const std::exception& e) {
      parsed.push_back(std::nullopt);
      parse_errors.push_back(e.what());
    }
  }
  if (names.empty()) {
    throw Error(ErrorCode::kMissingGroundTruth, "no source configurations given");
  }

  int failures = 0;
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::cout << "source " << k + 2 << " (" << names[k] << "): ";
    if (!parsed[k]) {
      std::cout << "error: " << parse_errors[k] << '\n';
      ++failures;
      continue;
    }
    const std::string one_name = names[k];
    const JoiningConfig one_config = *parsed[k];
    auto runs = run_multi_source(topo.tree, std::span(&one_name, 1), std::span(&one_config, 1),
                                 options);
    const SourceRun& run = runs.front();
    if (!run.report) {
      std::cout << "error: " << run.error << '\n';
      ++failures;
      continue;
    }
    total += run.report->result.queries_used;
    std::cout << run.report->result.queries_used << " queries, J = "
              << join_list(topo.tree, run.report->result.joins)
              << (run.report->correct ? ", correct" : ", WRONG") << '\n';
    if (trace) print_trace(topo.tree, run.report->result);
    if (!run.report->correct) ++failures;
  }
  std::cout << "sources: " << names.size() + 1 << '\n'
            << "total queries: " << total << '\n'
            << "failed sources: " << failures << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quartet-based inference of 2-by-N logical topologies"};
  app.require_subcommand(1);

  // gen
  std::string gen_shape;
  std::size_t gen_size = 0;
  std::uint64_t gen_seed = 1;
  bool gen_no_joins = false;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Write a generated topology with random joins");
  gen->add_option("--shape", gen_shape, "Tree shape")
      ->required()
      ->check(CLI::IsMember({"star", "perfect_binary", "tall_binary", "perfect_ternary"}));
  gen->add_option("--size", gen_size, "Receiver count N")->required();
  gen->add_option("--seed", gen_seed, "Seed for the joining configuration");
  gen->add_flag("--no-joins", gen_no_joins, "Omit the join lines");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // infer
  InputArgs infer_in;
  NoiseArgs infer_noise;
  std::string infer_alg = "rea";
  bool infer_trace = false;
  auto* infer = app.add_subcommand("infer", "Run one inference against a simulated oracle");
  add_input_options(infer, infer_in);
  infer->add_option("--alg", infer_alg, "Algorithm")->check(CLI::IsMember({"rea", "gbs"}));
  add_noise_options(infer, infer_noise);
  infer->add_flag("--trace", infer_trace, "Print every query");

  // sweep
  std::string sweep_shape;
  std::vector<std::size_t> sweep_sizes;
  std::vector<std::string> sweep_algs{"rea", "gbs"};
  std::size_t sweep_realizations = 100;
  std::vector<std::uint64_t> sweep_seeds;
  std::uint64_t sweep_base = 1;
  NoiseArgs sweep_noise;
  unsigned sweep_threads = 0;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Repeated runs over sizes and seeds, as CSV");
  sweep->add_option("--shape", sweep_shape, "Tree shape")
      ->required()
      ->check(CLI::IsMember({"star", "perfect_binary", "tall_binary", "perfect_ternary"}));
  sweep->add_option("--size", sweep_sizes, "Receiver counts")->required()->delimiter(',');
  sweep->add_option("--alg", sweep_algs, "Algorithms")
      ->delimiter(',')
      ->check(CLI::IsMember({"rea", "gbs"}));
  sweep->add_option("--realizations", sweep_realizations, "Random placements per size");
  sweep->add_option("--seeds", sweep_seeds, "Explicit placement seeds (override --realizations)")
      ->delimiter(',');
  sweep->add_option("--seed", sweep_base, "Base seed for derived placement seeds");
  add_noise_options(sweep, sweep_noise);
  sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");
  sweep->add_option("--out", sweep_out, "CSV file (default stdout)");

  // bruteforce
  InputArgs brute_in;
  auto* brute = app.add_subcommand("bruteforce", "Exhaustive minimum quartet set for small trees");
  add_input_options(brute, brute_in);

  // multi
  std::string multi_tree;
  std::vector<std::string> multi_joins;
  std::string multi_alg = "rea";
  NoiseArgs multi_noise;
  std::uint64_t multi_seed = 1;
  bool multi_trace = false;
  auto* multi = app.add_subcommand(
      "multi", "Infer several additional sources against the first source's tree");
  multi->add_option("tree", multi_tree, "Topology file of the first source")->required();
  multi->add_option("joins", multi_joins, "Join files, one per further source");
  multi->add_option("--alg", multi_alg, "Algorithm")->check(CLI::IsMember({"rea", "gbs"}));
  multi->add_option("--seed", multi_seed, "Noise seed");
  add_noise_options(multi, multi_noise);
  multi->add_flag("--trace", multi_trace, "Print every query");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gen_shape, gen_size, gen_seed, gen_no_joins, gen_out);
    if (*infer) {
      const GroundTruth truth = require_truth(resolve_input(infer_in));
      const RunOptions options = run_options(infer_alg, infer_noise, infer_in.seed);
      const RunReport report = run_inference(truth, options);
      print_report(truth, options, report, infer_trace);
      return report.correct ? 0 : 2;
    }
    if (*sweep) {
      SweepConfig config;
      config.shape = parse_shape(sweep_shape);
      config.sizes = sweep_sizes;
      config.realizations = sweep_realizations;
      config.algorithms.clear();
      for (const std::string& a : sweep_algs) config.algorithms.push_back(parse_algorithm(a));
      config.noise = NoiseSpec{sweep_noise.p, sweep_noise.repeats, 0};
      config.gbs.propagate_equalities = sweep_noise.propagate;
      config.base_seed = sweep_base;
      config.seeds = sweep_seeds;
      config.threads = sweep_threads;
      const std::vector<SweepRow> rows = run_sweep(config);
      const std::vector<CellSummary> cells = summarize(rows);
      if (sweep_out.empty() || sweep_out == "-") {
        write_csv(std::cout, rows);
        write_summary(std::cerr, cells);
      } else {
        std::ofstream out(sweep_out);
        if (!out) throw std::runtime_error("cannot write " + sweep_out);
        write_csv(out, rows);
        write_summary(std::cout, cells);
      }
      return 0;
    }
    if (*brute) return cmd_bruteforce(resolve_input(brute_in));
    if (*multi) {
      return cmd_multi(multi_tree, multi_joins, run_options(multi_alg, multi_noise, multi_seed),
                       multi_trace);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
