#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "reoptdb/common.hpp"
#include "reoptdb/cost_model.hpp"
#include "reoptdb/plan.hpp"

namespace reoptdb {

// Plan tree annotated for display: per node the operator, the cardinality
// the cost model worked with, the cumulative cost of the subtree, and
// whether the cardinality came from the validated set rather than from
// column statistics.
struct ExplainNode {
  std::string op;                       // "scan", "hash join", "nested loop join"
  std::string detail;                   // relation + selections, or join keys
  double est_rows = 0.0;
  double cost = 0.0;
  bool from_validated = false;
  std::vector<ExplainNode> children;
};

namespace detail {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline ExplainNode build_explain_node(const NodePtr& n, const CostModel& cm,
                                      EstimateContext& ctx,
                                      const CardMap& validated) {
  ExplainNode out;
  out.est_rows = ctx.card(n->mask);
  out.cost = node_cost(n, cm, ctx);
  out.from_validated = validated.contains(subset_key(ctx.query(), n->mask));
  if (n->kind == PlanNode::Kind::Scan) {
    out.op = "scan";
    out.detail = n->relation;
    for (const SelectionPred& s : n->selections) {
      out.detail += out.detail == n->relation ? " (" : ", ";
      out.detail += s.col.column + " = " + std::to_string(s.value);
    }
    if (!n->selections.empty()) out.detail += ")";
    return out;
  }
  out.op = n->algo == JoinAlgo::Hash ? "hash join" : "nested loop join";
  if (n->keys.empty()) {
    out.detail = "cross product";
  } else {
    for (const auto& [l, r] : n->keys) {
      if (!out.detail.empty()) out.detail += ", ";
      out.detail += l.text() + " = " + r.text();
    }
  }
  out.children.push_back(build_explain_node(n->left, cm, ctx, validated));
  out.children.push_back(build_explain_node(n->right, cm, ctx, validated));
  return out;
}

inline void render_explain_node(const ExplainNode& n, int depth,
                                std::string& out) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += n.op;
  if (!n.detail.empty()) out += " " + n.detail;
  out += "  rows=" + format_number(n.est_rows);
  out += " cost=" + format_number(n.cost);
  if (n.from_validated) out += " [Γ]";
  out += "\n";
  for (const ExplainNode& c : n.children) {
    render_explain_node(c, depth + 1, out);
  }
}

}  // namespace detail

inline ExplainNode build_explain(const PhysicalPlan& plan, const QuerySpec& q,
                                 const CatalogStats& stats,
                                 const CardMap& validated,
                                 const CostModel& cm = CostModel{}) {
  EstimateContext ctx(q, stats, validated);
  return detail::build_explain_node(plan.root, cm, ctx, validated);
}

inline std::string render_explain(const ExplainNode& root) {
  std::string out;
  detail::render_explain_node(root, 0, out);
  return out;
}

inline std::string render_explain(const PhysicalPlan& plan, const QuerySpec& q,
                                  const CatalogStats& stats,
                                  const CardMap& validated,
                                  const CostModel& cm = CostModel{}) {
  return render_explain(build_explain(plan, q, stats, validated, cm));
}

}  // namespace reoptdb
