#pragma once

#include <map>
#include <vector>

#include "reoptdb/card_est.hpp"
#include "reoptdb/plan.hpp"

namespace reoptdb {

// Per-row cost constants. Build is costlier than probe so the optimizer
// prefers the smaller input as the hash build side; the nested-loop inner
// constant is low enough that nested loops win on very small inputs.
struct CostModel {
  double c_scan_row = 1.0;
  double c_hash_build_row = 2.0;
  double c_hash_probe_row = 1.0;
  double c_nl_inner_row = 0.25;
  double c_output_row = 2.0;

  void check() const {
    if (c_scan_row <= 0 || c_hash_build_row <= 0 || c_hash_probe_row <= 0 ||
        c_nl_inner_row <= 0 || c_output_row <= 0) {
      throw Error("cost constants must be positive");
    }
  }

  double join_cost(JoinAlgo algo, double left_rows, double right_rows,
                   double out_rows) const {
    if (algo == JoinAlgo::Hash) {
      return c_hash_build_row * left_rows + c_hash_probe_row * right_rows +
             c_output_row * out_rows;
    }
    return c_scan_row * left_rows + c_nl_inner_row * left_rows * right_rows +
           c_output_row * out_rows;
  }
};

// Cardinality source for costing: validated values where present, histogram
// estimates elsewhere, memoized per relation subset.
class EstimateContext {
 public:
  EstimateContext(const QuerySpec& q, const CatalogStats& stats,
                  const CardMap& validated)
      : q_(&q),
        stats_(&stats),
        validated_(&validated),
        classes_(equivalence_classes(q)) {}

  double card(RelMask mask) const {
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    double v = estimate_cardinality(*q_, mask, *stats_, classes_, *validated_);
    memo_.emplace(mask, v);
    return v;
  }

  double base_rows(int rel_index) const {
    const std::string& rel = q_->relations[static_cast<std::size_t>(rel_index)];
    auto it = stats_->find(rel);
    if (it == stats_->end() || it->second.empty()) {
      throw Error("no statistics for relation '" + rel + "'");
    }
    return static_cast<double>(it->second.begin()->second.row_count);
  }

  const QuerySpec& query() const { return *q_; }
  const EquivalenceClasses& classes() const { return classes_; }

 private:
  const QuerySpec* q_;
  const CatalogStats* stats_;
  const CardMap* validated_;
  EquivalenceClasses classes_;
  mutable std::map<RelMask, double> memo_;
};

namespace detail {

inline double node_cost(const NodePtr& n, const CostModel& cm,
                        const EstimateContext& ctx) {
  if (n->kind == PlanNode::Kind::Scan) {
    return cm.c_scan_row * ctx.base_rows(n->rel_index);
  }
  double left = node_cost(n->left, cm, ctx);
  double right = node_cost(n->right, cm, ctx);
  return left + right +
         cm.join_cost(n->algo, ctx.card(n->left->mask), ctx.card(n->right->mask),
                      ctx.card(n->mask));
}

}  // namespace detail

// Total plan cost: every leaf pays a full scan of its base relation; every
// join pays its operator formula on the children's estimated output sizes.
// Monotone: no cost term decreases when any cardinality grows.
inline double plan_cost(const PhysicalPlan& p, const CostModel& cm,
                        const EstimateContext& ctx) {
  cm.check();
  if (!p.root) throw Error("plan_cost: empty plan");
  return detail::node_cost(p.root, cm, ctx);
}

}  // namespace reoptdb
