#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "reoptdb/catalog.hpp"
#include "reoptdb/optimizer.hpp"
#include "reoptdb/sample_est.hpp"

namespace reoptdb {

struct ReoptConfig {
  OptimizerConfig optimizer;
  ValidationOptions validation;
  int max_iters = 64;
};

struct ReoptReport {
  QuerySpec query;
  // Every plan the optimizer returned, in order; the last two entries are
  // structurally equal (the confirming round).
  std::vector<PhysicalPlan> plans;
  // One validated-cardinality batch per validated round.
  std::vector<CardMap> deltas;
  CardMap gamma_final;
  // Classification of each plan after the first against all of its
  // predecessors; always ends Local (the confirming round repeats a plan).
  std::vector<Transformation> transformation_sequence;
  // Number of optimizer invocations, the confirming round included.
  int iterations = 0;
  // Each plan's cost under gamma_final (validated values first, histogram
  // estimates elsewhere).
  std::vector<double> costs_s;
  bool fallback_to_histogram = false;
  std::vector<std::string> warnings;
};

namespace detail {

template <typename ValidateFn>
ReoptReport reoptimize_loop(const QuerySpec& q, const CatalogStats& stats,
                            ValidateFn&& validate, const ReoptConfig& cfg) {
  ReoptReport rep;
  rep.query = q;
  CardMap gamma;

  // Plan, validate, accumulate, re-plan; stop as soon as a plan repeats.
  // The repeat check runs before validation, so a confirming round never
  // re-executes the samples.
  while (true) {
    if (rep.iterations >= cfg.max_iters) {
      throw InvariantViolation(
          "re-optimization did not converge within " +
          std::to_string(cfg.max_iters) +
          " rounds; the loop is guaranteed to halt, so a determinism or "
          "key-canonicalization invariant is broken");
    }
    PhysicalPlan plan = optimize(q, stats, gamma, cfg.optimizer);
    rep.plans.push_back(plan);
    ++rep.iterations;
    if (rep.plans.size() >= 2 &&
        plan_equal(plan, rep.plans[rep.plans.size() - 2])) {
      break;
    }
    try {
      CardMap delta = validate(plan);
      rep.deltas.push_back(delta);
      gamma = merge_gamma(gamma, delta);
    } catch (const EmptySampleError& e) {
      // Cannot observe anything; the plan stands on histogram estimates.
      // Gamma is unchanged, so the next round confirms this plan.
      rep.fallback_to_histogram = true;
      rep.warnings.push_back(e.what());
    }
  }

  rep.gamma_final = gamma;
  for (std::size_t i = 1; i < rep.plans.size(); ++i) {
    bool local = false;
    for (std::size_t j = 0; j < i && !local; ++j) {
      local = classify_transformation(rep.plans[i], rep.plans[j]) ==
              Transformation::Local;
    }
    rep.transformation_sequence.push_back(local ? Transformation::Local
                                                : Transformation::Global);
  }

  EstimateContext ctx(q, stats, rep.gamma_final);
  for (const auto& plan : rep.plans) {
    rep.costs_s.push_back(plan_cost(plan, cfg.optimizer.cost, ctx));
  }
  return rep;
}

}  // namespace detail

// The re-optimization loop over a catalog's samples: optimize under the
// accumulated validated cardinalities, execute the chosen plan's join tree
// over the samples, feed the observations back, repeat until the optimizer
// stands by its plan.
inline ReoptReport reoptimize(const QuerySpec& q, const Catalog& catalog,
                              const ReoptConfig& cfg = {}) {
  CatalogStats stats;
  SampleBindings samples;
  for (const auto& rel : q.relations) {
    stats[rel] = catalog.relation_stats(rel);
    samples[rel] = &catalog.sample(rel);
  }
  ReoptReport rep = detail::reoptimize_loop(
      q, stats,
      [&](const PhysicalPlan& p) {
        return validate_plan(p, samples, cfg.validation);
      },
      cfg);

  // The final plan should cost no more under the validated cardinalities
  // than any earlier plan. Sampling noise can break the premise of that
  // guarantee, so on sampled runs a violation is reported, not fatal.
  for (std::size_t i = 0; i + 1 < rep.costs_s.size(); ++i) {
    double last = rep.costs_s.back();
    if (last > rep.costs_s[i] * (1.0 + 1e-9)) {
      rep.warnings.push_back(
          "final plan costs more under validated cardinalities than plan " +
          std::to_string(i + 1) + " (" + std::to_string(last) + " > " +
          std::to_string(rep.costs_s[i]) + ")");
    }
  }
  return rep;
}

enum class ErrorProfile { OverestimateOnly, UnderestimateOnly, Mixed };

// The same loop with sampling replaced by a lookup table of true
// cardinalities, for studying convergence under controlled estimation
// errors. oracle_cards must cover every joinable subset the optimizer can
// reach. The declared error profile is checked against the initial
// histogram estimates before the loop starts.
inline ReoptReport reoptimize_injected(const QuerySpec& q,
                                       const CatalogStats& stats,
                                       const CardMap& oracle_cards,
                                       ErrorProfile profile,
                                       const ReoptConfig& cfg = {}) {
  std::size_t n = q.relations.size();
  if (n > 20) throw Error("reoptimize_injected: too many relations");
  CardMap empty;
  EquivalenceClasses classes = equivalence_classes(q);
  RelMask full = (RelMask{1} << n) - 1;
  for (RelMask mask = 1; mask <= full; ++mask) {
    std::string key = subset_key(q, mask);
    if (!oracle_cards.contains(key)) continue;
    double est = estimate_cardinality(q, mask, stats, classes, empty);
    double oracle = oracle_cards.at(key);
    double slack = 1e-9 * std::max(1.0, std::max(std::fabs(est), std::fabs(oracle)));
    if (profile == ErrorProfile::OverestimateOnly && est < oracle - slack) {
      throw Error("error profile declared overestimate-only, but the initial "
                  "estimate for " + key + " (" + std::to_string(est) +
                  ") is below the oracle value (" + std::to_string(oracle) +
                  ")");
    }
    if (profile == ErrorProfile::UnderestimateOnly && est > oracle + slack) {
      throw Error("error profile declared underestimate-only, but the initial "
                  "estimate for " + key + " (" + std::to_string(est) +
                  ") is above the oracle value (" + std::to_string(oracle) +
                  ")");
    }
  }

  ReoptReport rep = detail::reoptimize_loop(
      q, stats,
      [&](const PhysicalPlan& p) {
        CardMap delta;
        std::vector<const PlanNode*> nodes;
        detail::collect_nodes_postorder(p.root, nodes);
        for (const PlanNode* node : nodes) {
          if (node->kind != PlanNode::Kind::Join) continue;
          std::string key = subset_key(q, node->mask);
          if (!oracle_cards.contains(key)) {
            throw Error(
                "oracle cardinalities do not cover joinable subset " + key);
          }
          delta.cards[key] = oracle_cards.at(key);
        }
        return delta;
      },
      cfg);

  // With injected truth the final plan is provably no costlier than any
  // earlier plan under the validated values; a violation is a bug.
  for (std::size_t i = 0; i + 1 < rep.costs_s.size(); ++i) {
    if (rep.costs_s.back() > rep.costs_s[i] * (1.0 + 1e-9) + 1e-12) {
      throw InvariantViolation(
          "injected-oracle run: final plan cost " +
          std::to_string(rep.costs_s.back()) + " exceeds plan " +
          std::to_string(i + 1) + "'s cost " + std::to_string(rep.costs_s[i]));
    }
  }
  return rep;
}

enum class SequenceCase { TrivialTwoStep, AllGlobal, GlobalThenLocal, Invalid };

inline const char* sequence_case_name(SequenceCase c) {
  switch (c) {
    case SequenceCase::TrivialTwoStep: return "trivial_two_step";
    case SequenceCase::AllGlobal: return "all_global";
    case SequenceCase::GlobalThenLocal: return "global_then_local";
    case SequenceCase::Invalid: return "invalid";
  }
  return "invalid";
}

// A terminating run's transformation sequence takes one of three shapes:
// the immediate fixed point [L]; global moves confirmed by the trivial
// final repeat [G..G, L]; or global moves, one genuinely new local
// rearrangement, then the repeat [G..G, L, L].
inline SequenceCase classify_sequence(const std::vector<Transformation>& seq) {
  if (seq.empty() || seq.back() != Transformation::Local) {
    return SequenceCase::Invalid;
  }
  if (seq.size() == 1) return SequenceCase::TrivialTwoStep;
  std::size_t globals = 0;
  while (globals < seq.size() && seq[globals] == Transformation::Global) {
    ++globals;
  }
  for (std::size_t i = globals; i < seq.size(); ++i) {
    if (seq[i] != Transformation::Local) return SequenceCase::Invalid;
  }
  std::size_t locals = seq.size() - globals;
  if (locals == 1 && globals >= 1) return SequenceCase::AllGlobal;
  if (locals == 2) return SequenceCase::GlobalThenLocal;
  return SequenceCase::Invalid;
}

}  // namespace reoptdb
