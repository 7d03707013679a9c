// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Measured values are printed next to each verdict.

#include <malloc.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/error.hpp"
#include "qtomo/exhaustive.hpp"
#include "qtomo/experiment.hpp"
#include "qtomo/gbs.hpp"
#include "qtomo/generators.hpp"
#include "qtomo/rea.hpp"
#include "qtomo/rng.hpp"
#include "support/brute.hpp"

// Heap accounting for the memory check.
namespace {
std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};

void* counted_alloc(std::size_t size) {
  void* p = std::malloc(size == 0 ? 1 : size);
  if (!p) throw std::bad_alloc();
  const std::size_t now = g_live.fetch_add(malloc_usable_size(p)) + malloc_usable_size(p);
  std::size_t peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
  return p;
}

void counted_free(void* p) noexcept {
  if (!p) return;
  g_live.fetch_sub(malloc_usable_size(p));
  std::free(p);
}
}  // namespace

void* operator new(std::size_t size) { return counted_alloc(size); }
void* operator new[](std::size_t size) { return counted_alloc(size); }
void operator delete(void* p) noexcept { counted_free(p); }
void operator delete[](void* p) noexcept { counted_free(p); }
void operator delete(void* p, std::size_t) noexcept { counted_free(p); }
void operator delete[](void* p, std::size_t) noexcept { counted_free(p); }

namespace {

using namespace qtomo;
using namespace qtomo::testing;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string first_failure;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) first_failure = what;
    pass = pass && ok;
  }
};

int g_failed = 0;

void criterion(const char* id, const char* title, double limit_s,
               const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto start = Clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0 && secs > limit_s) {
    v.require(false, "runtime " + std::to_string(secs) + " s over " + std::to_string(limit_s));
  }
  if (!v.pass) ++g_failed;
  std::printf("%s %s  %s [%.2f s]\n    %s\n", id, v.pass ? "PASS" : "FAIL", title, secs,
              v.note.str().c_str());
  if (!v.pass) std::printf("    first failure: %s\n", v.first_failure.c_str());
  std::fflush(stdout);
}

InferenceResult infer(const GroundTruth& gt, Algorithm alg, GbsOptions gbs = {}) {
  ExactOracle oracle(gt);
  return alg == Algorithm::kRea ? run_rea(gt.tree(), oracle)
                                : run_gbs(gt.tree(), oracle, gbs);
}

std::vector<std::size_t> sizes_up_to(Shape shape, std::size_t max_n) {
  std::vector<std::size_t> out;
  if (shape == Shape::kPerfectBinary || shape == Shape::kPerfectTernary) {
    const std::size_t base = shape == Shape::kPerfectBinary ? 2 : 3;
    for (std::size_t n = base; n <= max_n; n *= base) out.push_back(n);
    return out;
  }
  for (std::size_t n : {2u, 3u, 4u, 5u, 8u, 16u, 31u, 32u, 64u, 100u, 127u, 128u}) {
    if (n <= max_n) out.push_back(n);
  }
  return out;
}

struct GbsCell {
  double mean = 0;
  double frac_at_most_n_minus_1 = 0;
};

GbsCell gbs_cell(Shape shape, std::size_t n, bool propagate, Verdict& v) {
  SweepConfig cfg;
  cfg.shape = shape;
  cfg.sizes = {n};
  cfg.realizations = 100;
  cfg.algorithms = {Algorithm::kGbs};
  cfg.gbs.propagate_equalities = propagate;
  cfg.threads = 0;
  const auto rows = run_sweep(cfg);
  GbsCell cell;
  std::size_t within = 0;
  for (const SweepRow& row : rows) {
    v.require(row.correct, "GBS wrong map at N=" + std::to_string(n));
    cell.mean += static_cast<double>(row.queries_used);
    within += row.queries_used <= n - 1 ? 1 : 0;
  }
  cell.mean /= static_cast<double>(rows.size());
  cell.frac_at_most_n_minus_1 = static_cast<double>(within) / static_cast<double>(rows.size());
  return cell;
}

// Peak heap bytes of one end-to-end REA run on tall_binary(n).
std::size_t rea_peak_bytes(std::size_t n, double& seconds, bool& correct) {
  g_peak.store(g_live.load());
  const std::size_t base = g_live.load();
  const auto start = Clock::now();
  {
    const LogicalTree tree = make_tree(spec_for_receivers(Shape::kTallBinary, n));
    const GroundTruth gt(tree, random_config(tree, 1));
    const InferenceResult r = infer(gt, Algorithm::kRea);
    correct = r.joins == gt.config() && r.queries_used == n - 1;
  }
  seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return g_peak.load() - base;
}

}  // namespace

int main() {
  criterion("AC1", "REA uses exactly N-1 queries", 10.0, [](Verdict& v) {
    std::size_t runs = 0;
    for (Shape s : {Shape::kStar, Shape::kPerfectBinary, Shape::kTallBinary,
                    Shape::kPerfectTernary}) {
      for (std::size_t n : sizes_up_to(s, 128)) {
        const LogicalTree tree = make_tree(spec_for_receivers(s, n));
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
          const GroundTruth gt(tree, random_config(tree, seed));
          const InferenceResult r = infer(gt, Algorithm::kRea);
          v.require(r.queries_used == n - 1 && r.joins == gt.config(),
                    std::string(to_string(s)) + " N=" + std::to_string(n));
          ++runs;
        }
      }
    }
    v.note << runs << " runs over 4 shapes, N <= 128";
  });

  criterion("AC2", "REA and GBS recover every valid configuration", 120.0, [](Verdict& v) {
    std::vector<std::pair<std::string, LogicalTree>> trees;
    trees.emplace_back("1-by-2", load_fixture("one_by_two.topo").tree);
    trees.emplace_back("star(3)", make_tree({Shape::kStar, 3}));
    trees.emplace_back("star(4)", make_tree({Shape::kStar, 4}));
    trees.emplace_back("perfect_binary(2)", make_tree({Shape::kPerfectBinary, 2}));
    trees.emplace_back("tall_binary(3)", make_tree({Shape::kTallBinary, 3}));
    trees.emplace_back("tall_binary(4)", make_tree({Shape::kTallBinary, 4}));
    trees.emplace_back("perfect_ternary(1)", make_tree({Shape::kPerfectTernary, 1}));
    std::size_t configs = 0;
    for (const auto& [name, tree] : trees) {
      for (const JoiningConfig& c : enumerate_valid_configs(tree)) {
        const GroundTruth gt(tree, c);
        v.require(infer(gt, Algorithm::kRea).joins == c, name + " REA");
        v.require(infer(gt, Algorithm::kGbs).joins == c, name + " GBS");
        v.require(infer(gt, Algorithm::kGbs, GbsOptions{true}).joins == c,
                  name + " GBS with propagation");
        ++configs;
      }
    }
    v.note << configs << " configurations on " << trees.size() << " trees";
  });

  criterion("AC3", "four-receiver REA trace replay", 0, [](Verdict& v) {
    const auto t = load_fixture("elimination.topo");
    const GroundTruth gt(t.tree, *t.config);
    const InferenceResult r = infer(gt, Algorithm::kRea);
    const LogicalTree& tree = gt.tree();
    auto label = [&](EdgeId e) { return tree.edge_label(e).id; };
    std::vector<std::string> joins;
    for (EdgeId e : r.joins.joins()) joins.push_back(label(e));
    v.require(joins == std::vector<std::string>{"e2", "e3", "e3", "e1"}, "J");
    v.require(r.queries_used == 3, "query count");
    const auto& trace = std::get<ReaTrace>(r.trace);
    v.require(trace.steps.size() == 3, "step count");
    if (trace.steps.size() == 3) {
      const auto& s = trace.steps;
      v.require(label(s[0].deleted_edge) == "e5" && s[0].contracted_edge &&
                    label(*s[0].contracted_edge) == "e6" && !s[0].identified,
                "step 1");
      v.require(s[1].identified && label(*s[1].identified) == "e3" && !s[1].contracted_edge,
                "step 2");
      v.require(s[2].identified && label(*s[2].identified) == "e2" && s[2].contracted_edge &&
                    label(*s[2].contracted_edge) == "e4",
                "step 3");
      v.require(label(trace.last_edge) == "e1", "final edge");
    }
    v.note << "J = [" << joins[0] << ", " << joins[1] << ", " << joins[2] << ", " << joins[3]
           << "], " << r.queries_used << " queries";
  });

  criterion("AC4", "GBS on stars uses ceil(N/2) queries", 0, [](Verdict& v) {
    for (std::size_t n : {4u, 8u, 16u, 31u, 32u}) {
      const LogicalTree tree = make_tree(spec_for_receivers(Shape::kStar, n));
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GroundTruth gt(tree, random_config(tree, seed));
        const InferenceResult r = infer(gt, Algorithm::kGbs);
        v.require(r.joins == gt.config() && r.queries_used == (n + 1) / 2,
                  "N=" + std::to_string(n) + " seed=" + std::to_string(seed));
      }
    }
    v.note << "N in {4, 8, 16, 31, 32}, 100 realizations each";
  });

  criterion("AC5", "perfect_binary sweep: GBS mean in [0.75N, 1.25N], REA mean N-1", 1800.0,
            [](Verdict& v) {
              v.note << "GBS as printed (mean/N):";
              std::ostringstream ext;
              for (std::size_t n : {4u, 8u, 16u, 32u, 64u, 128u}) {
                const GbsCell plain = gbs_cell(Shape::kPerfectBinary, n, false, v);
                const GbsCell prop = gbs_cell(Shape::kPerfectBinary, n, true, v);
                const double ratio = plain.mean / static_cast<double>(n);
                v.require(ratio >= 0.75 && ratio <= 1.25,
                          "GBS mean " + std::to_string(plain.mean) + " at N=" + std::to_string(n));
                v.note << " " << n << ":" << plain.mean / static_cast<double>(n);
                ext << " " << n << ":" << prop.mean / static_cast<double>(n);

                SweepConfig cfg;
                cfg.shape = Shape::kPerfectBinary;
                cfg.sizes = {n};
                cfg.algorithms = {Algorithm::kRea};
                double mean = 0;
                const auto rows = run_sweep(cfg);
                for (const SweepRow& row : rows) mean += static_cast<double>(row.queries_used);
                mean /= static_cast<double>(rows.size());
                v.require(mean == static_cast<double>(n - 1), "REA mean at N=" + std::to_string(n));
              }
              v.note << "\n    with --propagate-equalities (mean/N):" << ext.str();
            });

  criterion("AC6", "tall_binary: share of GBS runs with <= N-1 queries >= 0.8", 0,
            [](Verdict& v) {
              for (std::size_t n : {32u, 64u}) {
                const GbsCell plain = gbs_cell(Shape::kTallBinary, n, false, v);
                const GbsCell prop = gbs_cell(Shape::kTallBinary, n, true, v);
                v.require(plain.frac_at_most_n_minus_1 >= 0.8, "N=" + std::to_string(n));
                v.note << "N=" << n << ": " << plain.frac_at_most_n_minus_1 << " (mean "
                       << plain.mean << "), with propagation " << prop.frac_at_most_n_minus_1
                       << " (mean " << prop.mean << "); ";
              }
            });

  criterion("AC7", "minimum quartet anchors and bounds", 0, [](Verdict& v) {
    const auto a = load_fixture("two_pairs.topo");
    const MinQuartets ma = min_quartets(a.tree, *a.config);
    v.require(ma.count == 2 && ma.witness == std::vector<ReceiverPair>{{0, 1}, {2, 3}},
              "two-pair anchor");
    const auto b = load_fixture("caterpillar.topo");
    const MinQuartets mb = min_quartets(b.tree, *b.config);
    v.require(mb.count == 3, "caterpillar anchor expects 3, measured " +
                                 std::to_string(mb.count));
    v.note << "anchors: " << ma.count << " and " << mb.count << " (witness";
    for (const ReceiverPair& p : mb.witness) v.note << " (R" << p.first + 1 << ",R" << p.second + 1 << ")";
    v.note << "); ";

    std::vector<LogicalTree> trees;
    for (std::size_t n = 2; n <= 6; ++n) {
      trees.push_back(make_tree(spec_for_receivers(Shape::kStar, n)));
      trees.push_back(make_tree(spec_for_receivers(Shape::kTallBinary, n)));
    }
    trees.push_back(make_tree({Shape::kPerfectBinary, 1}));
    trees.push_back(make_tree({Shape::kPerfectBinary, 2}));
    trees.push_back(make_tree({Shape::kPerfectTernary, 1}));
    for (const char* f : {"four_receivers.topo", "two_pairs.topo", "elimination.topo", "one_by_two.topo"}) {
      trees.push_back(load_fixture(f).tree);
    }
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      trees.push_back(random_tree(seed + 4000, 2 + seed % 5, true));
    }
    std::size_t configs = 0;
    std::size_t skipped = 0;
    for (const LogicalTree& tree : trees) {
      bool long_paths = true;
      for (Receiver r = 0; r < tree.receiver_count(); ++r) {
        long_paths = long_paths && tree.path_length(r) >= 2;
      }
      if (!long_paths || tree.receiver_count() > 6) {
        ++skipped;
        continue;
      }
      const std::size_t n = tree.receiver_count();
      const ConfigUniverse universe(tree);
      for (const MinQuartets& m : min_quartets_all(universe)) {
        v.require(m.count >= lower_bound(n) && m.count <= n - 1,
                  "bounds at N=" + std::to_string(n));
        ++configs;
      }
    }
    v.note << "bounds hold on " << configs << " configurations of " << trees.size() - skipped
           << " trees";
  });

  criterion("AC8", "noise: p=0 matches exact, majority accuracy grows with r", 0,
            [](Verdict& v) {
              for (Shape s : {Shape::kPerfectBinary, Shape::kTallBinary, Shape::kStar}) {
                const LogicalTree tree = make_tree(spec_for_receivers(s, 16));
                for (std::uint64_t seed = 0; seed < 20; ++seed) {
                  const GroundTruth gt(tree, random_config(tree, seed));
                  for (Algorithm alg : {Algorithm::kRea, Algorithm::kGbs}) {
                    const InferenceResult exact = infer(gt, alg);
                    for (std::uint32_t r : {1u, 3u, 5u}) {
                      RunOptions options;
                      options.algorithm = alg;
                      options.noise = NoiseSpec{0.0, r, seed};
                      const RunReport rep = run_inference(gt, options);
                      v.require(rep.result.joins == exact.joins &&
                                    rep.result.queried_pairs() == exact.queried_pairs(),
                                "p=0 replay");
                    }
                  }
                }
              }
              const LogicalTree tree = make_tree({Shape::kPerfectBinary, 3});
              double prev = -1;
              v.note << "REA full-map accuracy at p=0.1 on perfect_binary(3):";
              for (std::uint32_t r : {1u, 3u, 5u}) {
                std::size_t ok = 0;
                for (std::uint64_t run = 0; run < 1000; ++run) {
                  const GroundTruth gt(tree, random_config(tree, run));
                  RunOptions options;
                  options.noise = NoiseSpec{0.1, r, splitmix64(run)};
                  try {
                    ok += run_inference(gt, options).correct ? 1 : 0;
                  } catch (const Error&) {
                  }
                }
                const double acc = static_cast<double>(ok) / 1000.0;
                v.note << " r=" << r << ":" << acc;
                v.require(acc > prev, "accuracy not increasing at r=" + std::to_string(r));
                prev = acc;
              }
            });

  criterion("AC9", "scale: REA tall_binary(100000) < 5 s, linear memory; GBS N=128 < 60 s", 0,
            [](Verdict& v) {
              double t25 = 0, t50 = 0, t100 = 0;
              bool c25 = false, c50 = false, c100 = false;
              const std::size_t m25 = rea_peak_bytes(25000, t25, c25);
              const std::size_t m50 = rea_peak_bytes(50000, t50, c50);
              const std::size_t m100 = rea_peak_bytes(100000, t100, c100);
              v.require(c25 && c50 && c100, "REA result");
              v.require(t100 < 5.0, "REA runtime");
              const double r1 = static_cast<double>(m50) / static_cast<double>(m25);
              const double r2 = static_cast<double>(m100) / static_cast<double>(m50);
              v.require(r1 <= 2.5 && r2 <= 2.5, "peak heap grows faster than linear");
              v.note << "REA N=100000: " << t100 << " s; peak heap MiB at 25k/50k/100k: "
                     << m25 / 1048576.0 << "/" << m50 / 1048576.0 << "/" << m100 / 1048576.0
                     << " (doubling ratios " << r1 << ", " << r2 << "); ";

              const LogicalTree tree = make_tree({Shape::kPerfectBinary, 7});
              const GroundTruth gt(tree, random_config(tree, 1));
              const auto start = Clock::now();
              const InferenceResult r = infer(gt, Algorithm::kGbs);
              const double secs = std::chrono::duration<double>(Clock::now() - start).count();
              v.require(r.joins == gt.config() && secs < 60.0, "GBS N=128");
              v.note << "GBS N=128: " << secs << " s";
            });

  criterion("AC10", "three sources on perfect_binary(3) cost 14 queries", 0, [](Verdict& v) {
    const LogicalTree tree = make_tree({Shape::kPerfectBinary, 3});
    const std::vector<std::string> names{"S2", "S3"};
    const std::vector<JoiningConfig> configs{random_config(tree, 11), random_config(tree, 12)};
    const auto runs = run_multi_source(tree, names, configs, RunOptions{});
    std::uint64_t total = 0;
    for (const SourceRun& run : runs) {
      v.require(run.report && run.report->correct, "source " + run.name);
      if (run.report) total += run.report->result.queries_used;
    }
    v.require(total == 14, "total");
    v.note << "total queries " << total;
  });

  std::printf("%d criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
