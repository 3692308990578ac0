#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "reoptdb/executor.hpp"
#include "reoptdb/plan.hpp"
#include "reoptdb/query.hpp"
#include "reoptdb/relation.hpp"

namespace reoptdb {

using SampleBindings = std::map<std::string, const SampleTable*>;

namespace detail {

inline const SampleTable& bound_sample(const SampleBindings& samples,
                                       const std::string& name) {
  auto it = samples.find(name);
  if (it == samples.end() || it->second == nullptr) {
    throw Error("no sample bound for relation '" + name + "'");
  }
  if (it->second->row_count() == 0) {
    throw EmptySampleError("sample of relation '" + name +
                           "' is empty; fall back to histogram estimates");
  }
  return *it->second;
}

// A plan joining the query's relations in canonical order, hash joins
// throughout, staying connected where the join graph allows and appending
// the remaining relations as cross products. Used to evaluate sample joins
// with machinery independent of the nested-loop oracle.
inline PhysicalPlan chain_plan(const QuerySpec& q) {
  EquivalenceClasses classes = equivalence_classes(q);
  std::size_t n = q.relations.size();

  std::vector<RelMask> adj(n, 0);
  for (const auto& members : classes.classes) {
    RelMask touched = 0;
    for (const auto& col : members) {
      int idx = q.relation_index(col.relation);
      if (idx >= 0) touched |= RelMask{1} << idx;
    }
    for (int i : mask_indices(touched)) {
      adj[static_cast<std::size_t>(i)] |= touched & ~(RelMask{1} << i);
    }
  }

  auto scan_for = [&](std::size_t i) {
    return make_scan(q.relations[i], static_cast<int>(i),
                     q.selections_on(q.relations[i]));
  };

  NodePtr root = scan_for(0);
  RelMask done = 1;
  while (mask_indices(done).size() < n) {
    // Next relation in canonical order that connects to the tree so far;
    // if none connects, take the first remaining one as a cross product.
    int next = -1;
    for (std::size_t i = 0; i < n; ++i) {
      RelMask bit = RelMask{1} << i;
      if (done & bit) continue;
      if (adj[i] & done) {
        next = static_cast<int>(i);
        break;
      }
      if (next < 0) next = static_cast<int>(i);
    }
    RelMask bit = RelMask{1} << next;
    auto keys = std::vector<std::pair<ColumnRef, ColumnRef>>{};
    for (const auto& members : classes.classes) {
      const ColumnRef* l = nullptr;
      const ColumnRef* r = nullptr;
      for (const auto& col : members) {
        int idx = q.relation_index(col.relation);
        if (idx < 0) continue;
        RelMask b = RelMask{1} << idx;
        if (!l && (done & b)) l = &col;
        if (!r && (bit & b)) r = &col;
      }
      if (l && r) keys.emplace_back(*l, *r);
    }
    root = make_join(root, scan_for(static_cast<std::size_t>(next)),
                     JoinAlgo::Hash, std::move(keys));
    done |= bit;
  }
  return PhysicalPlan{root, q.relations};
}

inline Bindings sample_rows(const SampleBindings& samples,
                            const std::vector<std::string>& relations) {
  Bindings b;
  for (const auto& name : relations) {
    b[name] = &bound_sample(samples, name).rows;
  }
  return b;
}

}  // namespace detail

// Selectivity of a select-join query observed on the samples: the count of
// the join over the selection-filtered samples divided by the product of
// the unfiltered sample sizes. Per-tuple inclusion makes this an unbiased
// estimate of the query's true selectivity on the full tables.
inline double sample_selectivity(const QuerySpec& q,
                                 const SampleBindings& samples) {
  double denom = 1.0;
  for (const auto& name : q.relations) {
    denom *= static_cast<double>(detail::bound_sample(samples, name).row_count());
  }
  ExecOptions opts;
  opts.short_circuit_empty = false;
  ExecReport rep =
      execute(detail::chain_plan(q), detail::sample_rows(samples, q.relations),
              opts);
  return static_cast<double>(rep.result_rows) / denom;
}

struct ValidationOptions {
  // Replaces an observed count of zero with one row before scaling.
  // Off by default: a validated-empty join is trusted as truly empty.
  bool floor_empty_to_one = false;
};

// Runs the plan's join tree bottom-up over the selection-filtered samples
// and converts each join node's observed count into an estimated full-data
// cardinality by dividing out the sampling fractions of every base table
// beneath the node. Returns one entry per join node, keyed canonically.
inline CardMap validate_plan(const PhysicalPlan& plan,
                             const SampleBindings& samples,
                             const ValidationOptions& vopts = {}) {
  ExecOptions opts;
  opts.short_circuit_empty = false;  // every node must be observed
  ExecReport rep =
      execute(plan, detail::sample_rows(samples, plan.rel_order), opts);

  // Scale factor per join node: product of base fractions beneath it.
  CardMap delta;
  struct Walker {
    const SampleBindings& samples;
    const ValidationOptions& vopts;
    const ExecReport& rep;
    CardMap& delta;

    double walk(const NodePtr& n) {
      if (n->kind == PlanNode::Kind::Scan) {
        return detail::bound_sample(samples, n->relation).fraction;
      }
      double fractions = walk(n->left) * walk(n->right);
      std::string key = node_key(n);
      double observed = static_cast<double>(rep.node_rows.at(key));
      if (observed == 0.0 && vopts.floor_empty_to_one) observed = 1.0;
      delta.cards[key] = observed / fractions;
      return fractions;
    }
  } walker{samples, vopts, rep, delta};
  walker.walk(plan.root);
  return delta;
}

// Union of the accumulated store and one round's new values; the newer
// value wins on collision.
inline CardMap merge_gamma(const CardMap& gamma, const CardMap& delta) {
  return merge_cards(gamma, delta);
}

}  // namespace reoptdb
