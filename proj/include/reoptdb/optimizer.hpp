#pragma once

#include <bit>
#include <vector>

#include "reoptdb/cost_model.hpp"
#include "reoptdb/plan.hpp"

namespace reoptdb {

enum class TreeShape { Bushy, LeftDeep };

struct OptimizerConfig {
  TreeShape shape = TreeShape::Bushy;
  bool allow_cross_products = false;
  std::vector<JoinAlgo> operators = {JoinAlgo::Hash, JoinAlgo::NestedLoop};
  CostModel cost;
};

// One cross-side key pair per equivalence class spanning both sides. Lower
// joins have already equalized every class member within each side, so one
// pair per class enforces the whole class.
inline std::vector<std::pair<ColumnRef, ColumnRef>> derive_join_keys(
    const QuerySpec& q, const EquivalenceClasses& classes, RelMask left,
    RelMask right) {
  std::vector<std::pair<ColumnRef, ColumnRef>> keys;
  for (const auto& members : classes.classes) {
    const ColumnRef* l = nullptr;
    const ColumnRef* r = nullptr;
    for (const auto& col : members) {
      int idx = q.relation_index(col.relation);
      if (idx < 0) continue;
      RelMask bit = RelMask{1} << idx;
      if (!l && (left & bit)) l = &col;
      if (!r && (right & bit)) r = &col;
    }
    if (l && r) keys.emplace_back(*l, *r);
  }
  return keys;
}

// Exhaustive dynamic-programming join ordering over connected subsets of
// the equivalence-class-expanded join graph. Both child orders of every
// partition are costed (the order carries the build/probe side), with every
// enabled operator. Left-deep mode restricts each join to have a base
// relation on one side. Deterministic: cost ties fall to the plan-order
// comparison, so identical inputs give bit-identical plans.
inline PhysicalPlan optimize(const QuerySpec& q, const CatalogStats& stats,
                             const CardMap& validated,
                             const OptimizerConfig& config = {}) {
  config.cost.check();
  if (config.operators.empty()) {
    throw Error("optimize: no join operators enabled");
  }
  std::size_t n = q.relations.size();
  if (n == 0) throw Error("optimize: query has no relations");
  if (n > 20) {
    throw Error("optimize: too many relations for exhaustive enumeration");
  }

  EstimateContext ctx(q, stats, validated);
  const EquivalenceClasses& classes = ctx.classes();

  // Adjacency over the expanded join graph: i~j when some class has member
  // columns in both relations.
  std::vector<RelMask> adj(n, 0);
  for (const auto& members : classes.classes) {
    RelMask touched = 0;
    for (const auto& col : members) {
      int idx = q.relation_index(col.relation);
      if (idx >= 0) touched |= RelMask{1} << idx;
    }
    for (int i : detail::mask_indices(touched)) {
      adj[static_cast<std::size_t>(i)] |= touched & ~(RelMask{1} << i);
    }
  }

  auto connected = [&](RelMask s) {
    if (s == 0) return false;
    RelMask seen = s & (~s + 1);  // lowest bit
    while (true) {
      RelMask grow = seen;
      for (int i : detail::mask_indices(seen)) {
        grow |= adj[static_cast<std::size_t>(i)] & s;
      }
      if (grow == seen) break;
      seen = grow;
    }
    return seen == s;
  };

  RelMask full = (n == 32 ? ~RelMask{0} : (RelMask{1} << n) - 1);

  struct Slot {
    NodePtr node;
    double cost = 0.0;
    bool valid = false;
  };
  std::vector<Slot> best(static_cast<std::size_t>(full) + 1);

  for (std::size_t i = 0; i < n; ++i) {
    RelMask m = RelMask{1} << i;
    Slot& slot = best[m];
    slot.node = make_scan(q.relations[i], static_cast<int>(i),
                          q.selections_on(q.relations[i]));
    slot.cost = config.cost.c_scan_row * ctx.base_rows(static_cast<int>(i));
    slot.valid = true;
  }

  for (RelMask s = 1; s <= full; ++s) {
    if (std::popcount(s) < 2) continue;
    if (!config.allow_cross_products && !connected(s)) continue;
    Slot& slot = best[s];
    double out_card = ctx.card(s);
    // Every ordered partition (left, right); submask enumeration visits
    // each unordered split twice, once per orientation.
    for (RelMask left = (s - 1) & s; left != 0; left = (left - 1) & s) {
      RelMask right = s ^ left;
      const Slot& ls = best[left];
      const Slot& rs = best[right];
      if (!ls.valid || !rs.valid) continue;
      if (config.shape == TreeShape::LeftDeep &&
          std::popcount(left) != 1 && std::popcount(right) != 1) {
        continue;
      }
      auto keys = derive_join_keys(q, classes, left, right);
      if (!config.allow_cross_products && keys.empty()) continue;
      for (JoinAlgo algo : config.operators) {
        double cost = ls.cost + rs.cost +
                      config.cost.join_cost(algo, ctx.card(left),
                                            ctx.card(right), out_card);
        if (slot.valid && cost > slot.cost) continue;
        NodePtr node = make_join(ls.node, rs.node, algo, keys);
        if (slot.valid && cost == slot.cost) {
          PhysicalPlan cand{node, q.relations};
          PhysicalPlan cur{slot.node, q.relations};
          if (!plan_less(cand, cur)) continue;
        }
        slot.node = std::move(node);
        slot.cost = cost;
        slot.valid = true;
      }
    }
  }

  if (!best[full].valid) {
    throw Error(
        "optimize: join graph is disconnected (enable cross products to plan "
        "this query)");
  }
  return PhysicalPlan{best[full].node, q.relations};
}

}  // namespace reoptdb
