#pragma once

// Shared fixtures for the suite: deterministic random catalogs with
// correlated columns, random select-join queries over them, and an
// exhaustive plan enumerator that serves as the optimizer's independent
// oracle.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reoptdb/reoptdb.hpp"

namespace testutil {

using namespace reoptdb;

inline Relation make_relation(const std::string& name,
                              std::vector<std::string> cols,
                              std::vector<std::vector<Value>> columns) {
  Relation r;
  r.name = name;
  r.column_names = std::move(cols);
  r.columns = std::move(columns);
  r.check();
  return r;
}

// A catalog whose columns mix uniform, skewed, and cross-correlated
// generation so histogram estimates are wrong in interesting ways.
inline Catalog make_random_catalog(Rng& rng, int n_rels) {
  Catalog cat;
  for (int i = 0; i < n_rels; ++i) {
    std::int64_t rows = 40 + static_cast<std::int64_t>(rng.below(160));
    int n_cols = 2 + static_cast<int>(rng.below(2));
    std::vector<std::string> names;
    std::vector<std::vector<Value>> cols;
    for (int c = 0; c < n_cols; ++c) {
      names.push_back("c" + std::to_string(c));
      std::vector<Value> col(static_cast<std::size_t>(rows));
      std::uint64_t domain = 2 + rng.below(19);
      std::uint64_t mode = rng.below(3);
      for (std::int64_t r = 0; r < rows; ++r) {
        std::size_t ri = static_cast<std::size_t>(r);
        if (mode == 0) {
          col[ri] = static_cast<Value>(rng.below(domain));
        } else if (mode == 1) {
          // Quadratic skew: small values dominate.
          double u = rng.uniform01();
          col[ri] = static_cast<Value>(u * u * static_cast<double>(domain));
        } else if (c > 0) {
          // Correlated with the previous column, with occasional noise.
          Value base = cols[static_cast<std::size_t>(c - 1)][ri];
          col[ri] = rng.below(4) == 0 ? static_cast<Value>(rng.below(domain))
                                      : base % static_cast<Value>(domain);
        } else {
          col[ri] = static_cast<Value>(rng.below(domain));
        }
      }
      cols.push_back(std::move(col));
    }
    cat.add_relation(
        make_relation("T" + std::to_string(i), std::move(names),
                      std::move(cols)));
  }
  cat.analyze_all();
  return cat;
}

// A connected select-join query over a random subset of the catalog's
// relations: a random spanning pattern of join predicates, sometimes an
// extra edge, and selections on roughly half the relations.
inline QuerySpec make_random_query(Rng& rng, const Catalog& cat,
                                   int n_rels_in_query) {
  std::vector<std::string> all;
  for (const auto& [name, rel] : cat.relations) all.push_back(name);
  if (n_rels_in_query > static_cast<int>(all.size())) {
    n_rels_in_query = static_cast<int>(all.size());
  }
  for (std::size_t i = all.size(); i > 1; --i) {
    std::swap(all[i - 1], all[rng.below(i)]);
  }
  all.resize(static_cast<std::size_t>(n_rels_in_query));

  auto random_col = [&](const std::string& rel) {
    const Relation& r = cat.relation(rel);
    return ColumnRef{rel,
                     r.column_names[rng.below(r.column_names.size())]};
  };

  QuerySpec q;
  q.relations = all;
  for (std::size_t i = 1; i < all.size(); ++i) {
    const std::string& prev = all[rng.below(i)];
    q.joins.push_back({random_col(prev), random_col(all[i])});
  }
  if (all.size() >= 3 && rng.below(10) < 3) {
    std::size_t a = rng.below(all.size());
    std::size_t b = rng.below(all.size());
    if (a != b) q.joins.push_back({random_col(all[a]), random_col(all[b])});
  }
  for (const std::string& rel : all) {
    if (rng.below(2) == 0) {
      const Relation& r = cat.relation(rel);
      std::size_t c = rng.below(r.column_names.size());
      // Usually a value that exists; sometimes one that may not.
      Value v = rng.below(5) == 0
                    ? static_cast<Value>(rng.below(25))
                    : r.columns[c][rng.below(
                          static_cast<std::uint64_t>(r.row_count()))];
      bool dup = false;
      for (const SelectionPred& s : q.selections) {
        if (s.col.relation == rel && s.col.column == r.column_names[c]) {
          dup = true;
        }
      }
      if (!dup) q.selections.push_back({{rel, r.column_names[c]}, v});
    }
  }
  q.canonicalize();
  return q;
}

// Every physical plan over the query in the configured search space,
// assembled by direct recursion. Independent of the optimizer's DP: plans
// are materialized and priced one by one through plan_cost.
inline std::vector<PhysicalPlan> enumerate_all_plans(
    const QuerySpec& q, const OptimizerConfig& config) {
  EquivalenceClasses classes = equivalence_classes(q);
  std::size_t n = q.relations.size();
  std::map<RelMask, std::vector<NodePtr>> memo;

  std::function<const std::vector<NodePtr>&(RelMask)> trees =
      [&](RelMask mask) -> const std::vector<NodePtr>& {
    auto found = memo.find(mask);
    if (found != memo.end()) return found->second;
    std::vector<NodePtr> out;
    if (std::popcount(mask) == 1) {
      int idx = std::countr_zero(mask);
      const std::string& rel = q.relations[static_cast<std::size_t>(idx)];
      out.push_back(make_scan(rel, idx, q.selections_on(rel)));
    } else {
      for (RelMask left = (mask - 1) & mask; left != 0;
           left = (left - 1) & mask) {
        RelMask right = mask & ~left;
        if (config.shape == TreeShape::LeftDeep &&
            std::popcount(left) != 1 && std::popcount(right) != 1) {
          continue;
        }
        auto keys = derive_join_keys(q, classes, left, right);
        if (keys.empty() && !config.allow_cross_products) continue;
        for (const NodePtr& lt : trees(left)) {
          for (const NodePtr& rt : trees(right)) {
            for (JoinAlgo algo : config.operators) {
              out.push_back(make_join(lt, rt, algo, keys));
            }
          }
        }
      }
    }
    return memo.emplace(mask, std::move(out)).first->second;
  };

  RelMask all = (RelMask{1} << n) - 1;
  std::vector<PhysicalPlan> plans;
  for (const NodePtr& root : trees(all)) {
    PhysicalPlan p;
    p.root = root;
    p.rel_order = q.relations;
    plans.push_back(std::move(p));
  }
  return plans;
}

// Minimum cost over the exhaustive enumeration; the oracle for optimize().
inline double brute_force_min_cost(const QuerySpec& q,
                                   const CatalogStats& stats,
                                   const CardMap& validated,
                                   const OptimizerConfig& config) {
  EstimateContext ctx(q, stats, validated);
  double best = std::numeric_limits<double>::infinity();
  for (const PhysicalPlan& p : enumerate_all_plans(q, config)) {
    best = std::min(best, plan_cost(p, config.cost, ctx));
  }
  return best;
}

inline Bindings full_bindings(const Catalog& cat) {
  Bindings b;
  for (const auto& [name, rel] : cat.relations) b[name] = &rel;
  return b;
}

inline SampleBindings sample_bindings(const Catalog& cat) {
  SampleBindings b;
  for (const auto& [name, s] : cat.samples) b[name] = &s;
  return b;
}

}  // namespace testutil
