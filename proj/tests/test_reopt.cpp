#include <set>
#include <string>
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

// Chain query R0 - R1 - ... - R{n-1} over hand-built statistics: each
// relation links to its neighbours through dedicated columns, so the
// connected subsets are exactly the contiguous ranges.
struct ChainSetup {
  QuerySpec q;
  CatalogStats stats;
};

ChainSetup make_chain(int n, Rng& rng) {
  ChainSetup s;
  for (int i = 0; i < n; ++i) {
    std::string rel = "R" + std::to_string(i);
    s.q.relations.push_back(rel);
    AttributeStats st;
    st.row_count = 100 + static_cast<std::int64_t>(rng.below(900));
    st.n_distinct = 5 + static_cast<std::int64_t>(rng.below(45));
    AttributeStats st2 = st;
    st2.n_distinct = 5 + static_cast<std::int64_t>(rng.below(45));
    s.stats[rel]["p"] = st;
    s.stats[rel]["n"] = st2;
  }
  for (int i = 0; i + 1 < n; ++i) {
    s.q.joins.push_back({{"R" + std::to_string(i), "n"},
                         {"R" + std::to_string(i + 1), "p"}});
  }
  s.q.canonicalize();
  return s;
}

// Oracle truth for every contiguous range, scaled down from the histogram
// estimate so every estimation error is an overestimate.
CardMap overestimate_oracle(const ChainSetup& s, Rng& rng) {
  int n = static_cast<int>(s.q.relations.size());
  CardMap oracle;
  for (int lo = 0; lo < n; ++lo) {
    for (int hi = lo + 1; hi < n; ++hi) {
      RelMask mask = 0;
      for (int i = lo; i <= hi; ++i) mask |= RelMask{1} << i;
      double est = estimate_cardinality(s.q, mask, s.stats, CardMap{});
      double alpha = 0.1 + 0.9 * rng.uniform01();
      oracle.cards[subset_key(s.q, mask)] = est * alpha;
    }
  }
  return oracle;
}

}  // namespace

TEST_CASE("accurate estimates confirm the first plan immediately") {
  Catalog cat;
  cat.add_relation(testutil::make_relation("R", {"k"}, {mod_col(30, 10)}));
  cat.add_relation(testutil::make_relation("S", {"k"}, {mod_col(300, 10)}));
  cat.analyze_all();
  cat.sample_all(1.0, 5);

  QuerySpec q;
  q.relations = {"R", "S"};
  q.joins = {{{"R", "k"}, {"S", "k"}}};
  q.canonicalize();

  ReoptReport rep = reoptimize(q, cat);
  CHECK(rep.iterations == 2);
  CHECK(rep.plans.size() == 2);
  CHECK(rep.deltas.size() == 1);
  REQUIRE(rep.transformation_sequence.size() == 1);
  CHECK(rep.transformation_sequence[0] == Transformation::Local);
  CHECK(classify_sequence(rep.transformation_sequence) ==
        SequenceCase::TrivialTwoStep);
  CHECK(rep.warnings.empty());
  CHECK_FALSE(rep.fallback_to_histogram);

  // Full-fraction validation observed the exact join size.
  CHECK(rep.gamma_final.at(subset_key(q, 0b11)) == 900.0);
}

TEST_CASE("sampled runs keep the loop invariants") {
  Rng rng(120);
  int runs = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int n_rels = 2 + static_cast<int>(rng.below(3));
    Catalog cat = testutil::make_random_catalog(rng, n_rels);
    cat.sample_all(0.3, 1000 + static_cast<std::uint64_t>(trial));
    QuerySpec q = testutil::make_random_query(rng, cat, n_rels);

    ReoptReport rep = reoptimize(q, cat);
    ++runs;

    // Plans count the optimizer calls and the last round repeats.
    CHECK(rep.iterations == static_cast<int>(rep.plans.size()));
    REQUIRE(rep.plans.size() >= 2);
    CHECK(plan_equal(rep.plans.back(), rep.plans[rep.plans.size() - 2]));
    CHECK(rep.iterations < 64);
    CHECK(rep.transformation_sequence.size() == rep.plans.size() - 1);
    CHECK(classify_sequence(rep.transformation_sequence) !=
          SequenceCase::Invalid);
    CHECK(rep.costs_s.size() == rep.plans.size());

    if (!rep.fallback_to_histogram) {
      CHECK(rep.deltas.size() == rep.plans.size() - 1);

      // Every validated round before the last contributed a new key, and
      // no validated plan before the confirmed one was covered by its
      // predecessors. The confirmed plan itself may be covered: that is
      // what lets the loop stop.
      std::set<std::string> known;
      for (std::size_t i = 0; i + 1 < rep.deltas.size(); ++i) {
        bool fresh = false;
        for (const auto& [k, v] : rep.deltas[i].cards) {
          if (!known.count(k)) fresh = true;
        }
        CHECK(fresh);
        for (const auto& [k, v] : rep.deltas[i].cards) known.insert(k);
      }
      for (std::size_t i = 1; i + 2 < rep.plans.size(); ++i) {
        std::vector<PhysicalPlan> before(rep.plans.begin(),
                                         rep.plans.begin() +
                                             static_cast<std::ptrdiff_t>(i));
        CHECK_FALSE(covered(rep.plans[i], before));
      }
    }
  }
  CHECK(runs == 40);
}

TEST_CASE("re-optimization is deterministic end to end") {
  Rng rng(121);
  Catalog cat = testutil::make_random_catalog(rng, 4);
  cat.sample_all(0.25, 99);
  QuerySpec q = testutil::make_random_query(rng, cat, 4);
  ReoptReport a = reoptimize(q, cat);
  ReoptReport b = reoptimize(q, cat);
  CHECK(a.iterations == b.iterations);
  REQUIRE(a.plans.size() == b.plans.size());
  for (std::size_t i = 0; i < a.plans.size(); ++i) {
    CHECK(plan_equal(a.plans[i], b.plans[i]));
  }
  CHECK(a.gamma_final.cards == b.gamma_final.cards);
}

TEST_CASE("an exact oracle confirms in two rounds") {
  Rng rng(122);
  ChainSetup s = make_chain(3, rng);
  CardMap oracle;
  for (RelMask mask = 1; mask <= 0b111; ++mask) {
    if (std::popcount(mask) < 2) continue;
    oracle.cards[subset_key(s.q, mask)] =
        estimate_cardinality(s.q, mask, s.stats, CardMap{});
  }
  ReoptReport rep = reoptimize_injected(s.q, s.stats, oracle,
                                        ErrorProfile::OverestimateOnly);
  CHECK(rep.iterations == 2);
  CHECK(classify_sequence(rep.transformation_sequence) ==
        SequenceCase::TrivialTwoStep);
  CHECK(rep.costs_s[0] == rep.costs_s[1]);
}

TEST_CASE("overestimate-only error locks in within joins plus one rounds") {
  Rng rng(123);
  for (int trial = 0; trial < 30; ++trial) {
    int n = 3 + static_cast<int>(rng.below(3));
    ChainSetup s = make_chain(n, rng);
    CardMap oracle = overestimate_oracle(s, rng);

    ReoptReport rep = reoptimize_injected(s.q, s.stats, oracle,
                                          ErrorProfile::OverestimateOnly);
    int m = n - 1;  // joins in any plan over the chain
    CHECK(rep.iterations <= m + 1);
    CHECK(classify_sequence(rep.transformation_sequence) !=
          SequenceCase::Invalid);

    // Under the final validated values the plan sequence never got worse,
    // and the final plan is the cheapest of all.
    for (std::size_t i = 0; i + 1 < rep.costs_s.size(); ++i) {
      CHECK(rep.costs_s[i + 1] <= rep.costs_s[i] * (1.0 + 1e-12));
      CHECK(rep.costs_s.back() <= rep.costs_s[i] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("declared error profiles are checked against the estimates") {
  Rng rng(124);
  ChainSetup s = make_chain(3, rng);
  double est = estimate_cardinality(s.q, 0b011, s.stats, CardMap{});

  CardMap above;
  above.cards[subset_key(s.q, 0b011)] = est * 2.0;
  CHECK_THROWS_WITH(reoptimize_injected(s.q, s.stats, above,
                                        ErrorProfile::OverestimateOnly),
                    Catch::Matchers::ContainsSubstring("overestimate-only"));

  CardMap below;
  below.cards[subset_key(s.q, 0b011)] = est * 0.5;
  CHECK_THROWS_WITH(reoptimize_injected(s.q, s.stats, below,
                                        ErrorProfile::UnderestimateOnly),
                    Catch::Matchers::ContainsSubstring("underestimate-only"));

  // Mixed declares nothing, but the oracle must still cover the subsets the
  // chosen plans join.
  CHECK_THROWS_WITH(
      reoptimize_injected(s.q, s.stats, below, ErrorProfile::Mixed),
      Catch::Matchers::ContainsSubstring("do not cover"));
}

TEST_CASE("an exhausted round budget is an invariant violation") {
  Rng rng(125);
  ChainSetup s = make_chain(3, rng);
  CardMap oracle = overestimate_oracle(s, rng);
  ReoptConfig cfg;
  cfg.max_iters = 1;
  CHECK_THROWS_AS(reoptimize_injected(s.q, s.stats, oracle,
                                      ErrorProfile::OverestimateOnly, cfg),
                  InvariantViolation);
}

TEST_CASE("an empty sample falls back to histogram estimates") {
  Catalog cat;
  cat.add_relation(testutil::make_relation("R", {"k"}, {mod_col(20, 5)}));
  cat.add_relation(testutil::make_relation("S", {"k"}, {mod_col(30, 5)}));
  cat.analyze_all();
  cat.sample_all(0.5, 3);
  cat.samples["S"].rows = Relation{"S", {"k"}, {{}}};

  QuerySpec q;
  q.relations = {"R", "S"};
  q.joins = {{{"R", "k"}, {"S", "k"}}};
  q.canonicalize();

  ReoptReport rep = reoptimize(q, cat);
  CHECK(rep.fallback_to_histogram);
  CHECK(rep.iterations == 2);
  CHECK(rep.deltas.empty());
  CHECK(rep.gamma_final.empty());
  REQUIRE(rep.warnings.size() == 1);
  CHECK_THAT(rep.warnings[0],
             Catch::Matchers::ContainsSubstring("fall back"));
  CHECK(classify_sequence(rep.transformation_sequence) ==
        SequenceCase::TrivialTwoStep);
}

TEST_CASE("sequence shapes classify the three terminating patterns") {
  using T = Transformation;
  const T L = T::Local, G = T::Global;
  CHECK(classify_sequence({}) == SequenceCase::Invalid);
  CHECK(classify_sequence({L}) == SequenceCase::TrivialTwoStep);
  CHECK(classify_sequence({G, L}) == SequenceCase::AllGlobal);
  CHECK(classify_sequence({G, G, G, L}) == SequenceCase::AllGlobal);
  CHECK(classify_sequence({G, L, L}) == SequenceCase::GlobalThenLocal);
  CHECK(classify_sequence({L, L}) == SequenceCase::GlobalThenLocal);
  CHECK(classify_sequence({G}) == SequenceCase::Invalid);
  CHECK(classify_sequence({L, G, L}) == SequenceCase::Invalid);
  CHECK(classify_sequence({G, L, L, L}) == SequenceCase::Invalid);
  CHECK(classify_sequence({L, L, L}) == SequenceCase::Invalid);
  CHECK(classify_sequence({G, L, G, L}) == SequenceCase::Invalid);

  CHECK(std::string(sequence_case_name(SequenceCase::TrivialTwoStep)) ==
        "trivial_two_step");
  CHECK(std::string(sequence_case_name(SequenceCase::AllGlobal)) ==
        "all_global");
  CHECK(std::string(sequence_case_name(SequenceCase::GlobalThenLocal)) ==
        "global_then_local");
  CHECK(std::string(sequence_case_name(SequenceCase::Invalid)) == "invalid");
}
