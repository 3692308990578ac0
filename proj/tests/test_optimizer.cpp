#include <algorithm>
#include <functional>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "helpers.hpp"

using namespace reoptdb;

namespace {

std::vector<Value> mod_col(std::int64_t rows, Value domain) {
  std::vector<Value> col;
  for (std::int64_t i = 0; i < rows; ++i) {
    col.push_back(static_cast<Value>(i % domain));
  }
  return col;
}

// A/B/C with A.x = B.x and B.y = C.y, 100 rows each, domains of 10.
Catalog chain_catalog() {
  Catalog cat;
  cat.add_relation(testutil::make_relation(
      "A", {"x"}, {mod_col(100, 10)}));
  cat.add_relation(testutil::make_relation(
      "B", {"x", "y"}, {mod_col(100, 10), mod_col(100, 10)}));
  cat.add_relation(testutil::make_relation(
      "C", {"y"}, {mod_col(100, 10)}));
  cat.analyze_all();
  return cat;
}

QuerySpec chain_query() {
  QuerySpec q;
  q.relations = {"A", "B", "C"};
  q.joins = {{{"A", "x"}, {"B", "x"}}, {{"B", "y"}, {"C", "y"}}};
  q.canonicalize();
  return q;
}

}  // namespace

TEST_CASE("a one-relation query optimizes to a bare scan") {
  Catalog cat;
  cat.add_relation(testutil::make_relation("R", {"a"}, {mod_col(50, 5)}));
  cat.analyze_all();
  QuerySpec q;
  q.relations = {"R"};
  q.selections = {{{"R", "a"}, 2}};
  q.canonicalize();
  PhysicalPlan p = optimize(q, cat.stats, CardMap{});
  REQUIRE(p.single_scan());
  CHECK(p.root->relation == "R");
  REQUIRE(p.root->selections.size() == 1);
  CHECK(p.root->selections[0].value == 2);
}

TEST_CASE("hash joins build on the smaller estimated input") {
  Catalog cat;
  cat.add_relation(testutil::make_relation("S", {"k"}, {mod_col(30, 10)}));
  cat.add_relation(testutil::make_relation("T", {"k"}, {mod_col(300, 10)}));
  cat.analyze_all(0, 10);
  QuerySpec q;
  q.relations = {"S", "T"};
  q.joins = {{{"S", "k"}, {"T", "k"}}};
  q.canonicalize();
  PhysicalPlan p = optimize(q, cat.stats, CardMap{});
  REQUIRE_FALSE(p.single_scan());
  CHECK(p.root->algo == JoinAlgo::Hash);
  CHECK(p.root->left->relation == "S");
  CHECK(p.root->right->relation == "T");
}

TEST_CASE("validated cardinalities steer the join order") {
  Catalog cat = chain_catalog();
  QuerySpec q = chain_query();

  // Without feedback the two pair joins tie and the encoding order breaks
  // the tie toward {A,B}.
  PhysicalPlan base = optimize(q, cat.stats, CardMap{});
  REQUIRE(tree_encoding(base).size() == 2);
  CHECK(tree_encoding(base)[0] == 0b011);

  CardMap bc_small;
  bc_small.cards[subset_key(q, 0b110)] = 2.0;
  PhysicalPlan steered = optimize(q, cat.stats, bc_small);
  CHECK(tree_encoding(steered)[0] == 0b110);

  CardMap bc_zero;
  bc_zero.cards[subset_key(q, 0b110)] = 0.0;
  PhysicalPlan zero = optimize(q, cat.stats, bc_zero);
  CHECK(tree_encoding(zero)[0] == 0b110);

  CardMap ab_small;
  ab_small.cards[subset_key(q, 0b011)] = 2.0;
  PhysicalPlan back = optimize(q, cat.stats, ab_small);
  CHECK(tree_encoding(back)[0] == 0b011);
}

TEST_CASE("the optimizer matches exhaustive enumeration") {
  Rng rng(90);
  for (int trial = 0; trial < 24; ++trial) {
    int n_rels = 2 + static_cast<int>(rng.below(4));
    Catalog cat = testutil::make_random_catalog(rng, n_rels);
    QuerySpec q = testutil::make_random_query(rng, cat, n_rels);
    OptimizerConfig config;

    CardMap gamma;
    if (trial % 2 == 1) {
      // Validate a random pair subset to exercise feedback-aware costing.
      RelMask m = 0;
      m |= RelMask{1} << rng.below(static_cast<std::uint64_t>(n_rels));
      m |= RelMask{1} << rng.below(static_cast<std::uint64_t>(n_rels));
      gamma.cards[subset_key(q, m)] = static_cast<double>(rng.below(50));
    }

    PhysicalPlan p = optimize(q, cat.stats, gamma, config);
    EstimateContext ctx(q, cat.stats, gamma);
    double got = plan_cost(p, config.cost, ctx);
    double want = testutil::brute_force_min_cost(q, cat.stats, gamma, config);
    CHECK(got == want);

    // Among all plans achieving the minimum, the optimizer returns the
    // smallest in the deterministic plan order.
    PhysicalPlan best_enum;
    bool have = false;
    for (const PhysicalPlan& cand : testutil::enumerate_all_plans(q, config)) {
      if (plan_cost(cand, config.cost, ctx) != want) continue;
      if (!have || plan_less(cand, best_enum)) {
        best_enum = cand;
        have = true;
      }
    }
    REQUIRE(have);
    CHECK(plan_equal(p, best_enum));
  }
}

TEST_CASE("repeated optimization is bit-identical") {
  Rng rng(91);
  Catalog cat = testutil::make_random_catalog(rng, 5);
  QuerySpec q = testutil::make_random_query(rng, cat, 5);
  PhysicalPlan a = optimize(q, cat.stats, CardMap{});
  PhysicalPlan b = optimize(q, cat.stats, CardMap{});
  CHECK(plan_equal(a, b));
  CHECK(tree_encoding(a) == tree_encoding(b));
}

TEST_CASE("left-deep mode keeps a base relation on every join") {
  Rng rng(92);
  for (int trial = 0; trial < 12; ++trial) {
    int n_rels = 3 + static_cast<int>(rng.below(3));
    Catalog cat = testutil::make_random_catalog(rng, n_rels);
    QuerySpec q = testutil::make_random_query(rng, cat, n_rels);

    OptimizerConfig deep;
    deep.shape = TreeShape::LeftDeep;
    PhysicalPlan p = optimize(q, cat.stats, CardMap{}, deep);

    std::function<void(const NodePtr&)> walk = [&](const NodePtr& n) {
      if (n->kind == PlanNode::Kind::Scan) return;
      bool leaf_side = n->left->kind == PlanNode::Kind::Scan ||
                       n->right->kind == PlanNode::Kind::Scan;
      CHECK(leaf_side);
      walk(n->left);
      walk(n->right);
    };
    walk(p.root);

    EstimateContext ctx(q, cat.stats, CardMap{});
    double deep_cost = plan_cost(p, deep.cost, ctx);
    CHECK(deep_cost ==
          testutil::brute_force_min_cost(q, cat.stats, CardMap{}, deep));

    OptimizerConfig bushy;
    CHECK(deep_cost >=
          testutil::brute_force_min_cost(q, cat.stats, CardMap{}, bushy));
  }
}

TEST_CASE("restricting operators restricts the plans") {
  Catalog cat = chain_catalog();
  QuerySpec q = chain_query();
  OptimizerConfig hash_only;
  hash_only.operators = {JoinAlgo::Hash};
  PhysicalPlan p = optimize(q, cat.stats, CardMap{}, hash_only);
  std::function<void(const NodePtr&)> walk = [&](const NodePtr& n) {
    if (n->kind == PlanNode::Kind::Scan) return;
    CHECK(n->algo == JoinAlgo::Hash);
    walk(n->left);
    walk(n->right);
  };
  walk(p.root);

  OptimizerConfig none;
  none.operators = {};
  CHECK_THROWS_AS(optimize(q, cat.stats, CardMap{}, none), Error);
}

TEST_CASE("disconnected join graphs need cross products") {
  Catalog cat;
  cat.add_relation(testutil::make_relation("U", {"a"}, {mod_col(10, 5)}));
  cat.add_relation(testutil::make_relation("V", {"b"}, {mod_col(20, 5)}));
  cat.analyze_all();
  QuerySpec q;
  q.relations = {"U", "V"};
  q.canonicalize();

  CHECK_THROWS_WITH(optimize(q, cat.stats, CardMap{}),
                    Catch::Matchers::ContainsSubstring("disconnected"));

  OptimizerConfig cross;
  cross.allow_cross_products = true;
  PhysicalPlan p = optimize(q, cat.stats, CardMap{}, cross);
  REQUIRE_FALSE(p.single_scan());
  CHECK(p.root->keys.empty());
}

TEST_CASE("empty queries are rejected") {
  QuerySpec q;
  CHECK_THROWS_AS(optimize(q, CatalogStats{}, CardMap{}), Error);
}
