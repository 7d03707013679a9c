#include <doctest.h>

#include "qtomo/error.hpp"
#include "qtomo/exhaustive.hpp"
#include "qtomo/generators.hpp"
#include "qtomo/rea.hpp"
#include "support/brute.hpp"

using namespace qtomo;
using namespace qtomo::testing;

namespace {

std::string label(const LogicalTree& tree, EdgeId e) { return tree.edge_label(e).id; }

// True iff `sub` appears in `seq` in order.
bool is_subsequence(const std::vector<EdgeId>& sub, const std::vector<EdgeId>& seq) {
  std::size_t k = 0;
  for (EdgeId e : seq) {
    if (k < sub.size() && sub[k] == e) ++k;
  }
  return k == sub.size();
}

// Drives the elimination by hand and checks the working tree after every
// step.
void check_stepwise(const GroundTruth& gt) {
  const LogicalTree& tree = gt.tree();
  WorkingTree work(tree);
  REQUIRE(work.check_invariants());
  while (work.receiver_count() > 1) {
    const Siblings s = work.pick_siblings();
    REQUIRE(s.i < s.j);
    REQUIRE(work.parent_of(s.i) == s.parent);
    REQUIRE(work.parent_of(s.j) == s.parent);
    const ReaStep step = work.apply_answer(s, quartet_type(gt, s.i, s.j));
    REQUIRE(work.check_invariants());
    REQUIRE_FALSE(work.alive(step.deleted));
    REQUIRE(work.alive(step.survivor));
    REQUIRE_FALSE(work.edge_present(step.deleted_edge));
    if (step.identified) REQUIRE(*step.identified == gt.config().join(step.deleted));
    for (Receiver r = 0; r < tree.receiver_count(); ++r) {
      if (!work.alive(r)) continue;
      const auto path = work.root_path(r);
      REQUIRE(is_subsequence(path, tree.root_path(r)));
      REQUIRE(path.back() == work.leaf_edge(r));
    }
  }
}

}  // namespace

TEST_SUITE("rea") {
  TEST_CASE("worked four-receiver trace") {
    auto topo = load_fixture("elimination.topo");
    const GroundTruth gt(topo.tree, *topo.config);
    const LogicalTree& tree = gt.tree();

    WorkingTree work(tree);
    const Siblings first = work.pick_siblings();
    CHECK(first.i == 1);
    CHECK(first.j == 2);
    CHECK(tree.node_name(first.parent) == "B23");

    ExactOracle oracle(gt);
    const InferenceResult result = run_rea(tree, oracle);
    CHECK(result.queries_used == 3);
    CHECK(result.joins == gt.config());
    const auto& trace = std::get<ReaTrace>(result.trace);
    REQUIRE(trace.steps.size() == 3);

    const ReaStep& s1 = trace.steps[0];
    CHECK(s1.pair == ReceiverPair{1, 2});
    CHECK(s1.answer == QuartetType::k1);
    CHECK(label(tree, s1.deleted_edge) == "e5");
    REQUIRE(s1.contracted_edge);
    CHECK(label(tree, *s1.contracted_edge) == "e6");
    CHECK_FALSE(s1.identified);
    CHECK(trace.aliases[1] == std::optional<Receiver>{2});

    const ReaStep& s2 = trace.steps[1];
    CHECK(s2.pair == ReceiverPair{0, 2});
    CHECK(s2.answer == QuartetType::k4);
    REQUIRE(s2.identified);
    CHECK(label(tree, *s2.identified) == "e3");
    CHECK(s2.deleted == 2);
    CHECK_FALSE(s2.contracted_edge);

    const ReaStep& s3 = trace.steps[2];
    CHECK(s3.pair == ReceiverPair{0, 3});
    CHECK(s3.answer == QuartetType::k3);
    REQUIRE(s3.identified);
    CHECK(label(tree, *s3.identified) == "e2");
    REQUIRE(s3.contracted_edge);
    CHECK(label(tree, *s3.contracted_edge) == "e4");

    CHECK(trace.last_receiver == 3);
    CHECK(label(tree, trace.last_edge) == "e1");
    std::vector<std::string> joins;
    for (EdgeId e : result.joins.joins()) joins.push_back(label(tree, e));
    CHECK(joins == std::vector<std::string>{"e2", "e3", "e3", "e1"});
  }

  TEST_CASE("sibling policy on generated shapes") {
    const auto star = make_tree({Shape::kStar, 6});
    const Siblings s = WorkingTree(star).pick_siblings();
    CHECK(s.i == 0);
    CHECK(s.j == 1);
    CHECK(star.node_name(s.parent) == "B1");
    const auto tall = make_tree({Shape::kTallBinary, 4});
    const Siblings t = WorkingTree(tall).pick_siblings();
    CHECK(t.i == 0);
    CHECK(t.j == 1);
  }

  TEST_CASE("recovers every configuration of small random trees") {
    std::size_t runs = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto tree = random_tree(seed, 2 + seed % 5, seed % 3 != 0);
      const auto configs = enumerate_valid_configs(tree);
      const ConfigUniverse universe(tree);
      for (std::size_t c = 0; c < configs.size(); ++c) {
        const GroundTruth gt(tree, configs[c]);
        ExactOracle oracle(gt);
        const InferenceResult result = run_rea(tree, oracle);
        REQUIRE(result.joins == configs[c]);
        REQUIRE(result.queries_used == tree.receiver_count() - 1);
        // The queried pairs identify the configuration on their own.
        const auto pairs = result.queried_pairs();
        REQUIRE(universe.identifies(universe.mask_of(pairs), c));
        ++runs;
      }
    }
    CHECK(runs > 500);
  }

  TEST_CASE("working tree stays logical after every step") {
    for (std::uint64_t seed = 0; seed < 80; ++seed) {
      const auto tree = random_tree(seed + 500, 2 + seed % 30, seed % 2 == 0);
      const GroundTruth gt(tree, random_config(tree, seed));
      check_stepwise(gt);
    }
    for (Shape s : {Shape::kStar, Shape::kPerfectBinary, Shape::kTallBinary,
                    Shape::kPerfectTernary}) {
      const auto tree = make_tree(spec_for_receivers(s, s == Shape::kPerfectTernary ? 27 : 16));
      check_stepwise(GroundTruth(tree, random_config(tree, 3)));
    }
  }

  TEST_CASE("alias chains resolve to identified joins") {
    // All joins on the root edge: every answer is type 1 until the end.
    const auto tree = make_tree({Shape::kStar, 5});
    const GroundTruth gt(tree, JoiningConfig(std::vector<EdgeId>(5, 1)));
    ExactOracle oracle(gt);
    const InferenceResult result = run_rea(tree, oracle);
    CHECK(result.joins == gt.config());
    const auto& trace = std::get<ReaTrace>(result.trace);
    for (Receiver r = 0; r < 5; ++r) {
      // Walk the alias chain; it must end at the last receiver.
      Receiver at = r;
      for (int guard = 0; trace.aliases[at] && guard < 5; ++guard) at = *trace.aliases[at];
      CHECK(at == trace.last_receiver);
    }
  }

  TEST_CASE("errors") {
    const auto single = LogicalTree::from_edges("S", std::vector<TreeEdge>{{"S", "R1", {"a"}}},
                                                std::vector<std::string>{"R1"});
    const GroundTruth gt(single, JoiningConfig(std::vector<EdgeId>{1}));
    ExactOracle oracle(gt);
    try {
      run_rea(single, oracle);
      FAIL("expected InsufficientReceivers");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInsufficientReceivers);
    }
    const auto tall = make_tree({Shape::kTallBinary, 4});
    WorkingTree work(tall);
    try {
      work.apply_answer(Siblings{0, 3, work.parent_of(0)}, QuartetType::k4);
      FAIL("expected StructuralViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kStructuralViolation);
    }
  }
}
