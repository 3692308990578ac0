#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "reoptdb/common.hpp"
#include "reoptdb/convergence.hpp"
#include "reoptdb/executor.hpp"
#include "reoptdb/explain.hpp"
#include "reoptdb/ott.hpp"
#include "reoptdb/plan.hpp"
#include "reoptdb/reopt.hpp"

namespace reoptdb {

using nlohmann::json;

constexpr int kReportSchemaVersion = 1;

inline json card_map_json(const CardMap& cards) {
  json out = json::object();
  for (const auto& [key, value] : cards.cards) out[key] = value;
  return out;
}

inline CardMap card_map_from_json(const json& j) {
  if (!j.is_object()) throw Error("validated cardinalities: expected an object");
  CardMap out;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) {
      throw Error("validated cardinalities: value for '" + key +
                  "' is not a number");
    }
    double v = value.get<double>();
    if (v < 0.0) {
      throw Error("validated cardinalities: value for '" + key +
                  "' is negative");
    }
    out.cards[key] = v;
  }
  return out;
}

// File form used by `explain --gamma`; the flat map is wrapped so the file
// is self-describing.
inline json card_map_file_json(const CardMap& cards) {
  return json{{"schema_version", kReportSchemaVersion},
              {"validated_cardinalities", card_map_json(cards)}};
}

inline CardMap card_map_from_file_json(const json& j) {
  if (j.is_object() && j.contains("validated_cardinalities")) {
    if (j.value("schema_version", kReportSchemaVersion) !=
        kReportSchemaVersion) {
      throw Error("validated cardinalities: unsupported schema version");
    }
    return card_map_from_json(j.at("validated_cardinalities"));
  }
  return card_map_from_json(j);
}

inline json plan_node_json(const NodePtr& n) {
  json out;
  if (n->kind == PlanNode::Kind::Scan) {
    out["op"] = "scan";
    out["relation"] = n->relation;
    json sels = json::array();
    for (const SelectionPred& s : n->selections) {
      sels.push_back({{"column", s.col.column}, {"value", s.value}});
    }
    out["selections"] = std::move(sels);
    return out;
  }
  out["op"] = "join";
  out["algorithm"] = n->algo == JoinAlgo::Hash ? "hash" : "nested_loop";
  json keys = json::array();
  for (const auto& [l, r] : n->keys) {
    keys.push_back({{"left", l.text()}, {"right", r.text()}});
  }
  out["keys"] = std::move(keys);
  out["children"] = json::array({plan_node_json(n->left),
                                 plan_node_json(n->right)});
  return out;
}

inline json plan_json(const PhysicalPlan& plan) {
  return json{{"encoding", encoding_text(plan)},
              {"tree", plan_node_json(plan.root)}};
}

inline json exec_report_json(const ExecReport& rep) {
  json nodes = json::object();
  for (const auto& [key, rows] : rep.node_rows) nodes[key] = rows;
  return json{{"schema_version", kReportSchemaVersion},
              {"result_rows", rep.result_rows},
              {"rows_processed", rep.rows_processed},
              {"wall_seconds", rep.wall_seconds},
              {"join_output_rows", std::move(nodes)}};
}

inline json reopt_report_json(const ReoptReport& rep) {
  json plans = json::array();
  for (std::size_t i = 0; i < rep.plans.size(); ++i) {
    json p = plan_json(rep.plans[i]);
    if (i < rep.costs_s.size()) p["cost_under_final"] = rep.costs_s[i];
    plans.push_back(std::move(p));
  }
  json deltas = json::array();
  for (const CardMap& d : rep.deltas) deltas.push_back(card_map_json(d));
  json seq = json::array();
  for (Transformation t : rep.transformation_sequence) {
    seq.push_back(transformation_name(t));
  }
  return json{
      {"schema_version", kReportSchemaVersion},
      {"query", rep.query.text()},
      {"iterations", rep.iterations},
      {"plans", std::move(plans)},
      {"deltas", std::move(deltas)},
      {"validated_cardinalities", card_map_json(rep.gamma_final)},
      {"transformation_sequence", std::move(seq)},
      {"sequence_shape",
       sequence_case_name(classify_sequence(rep.transformation_sequence))},
      {"fallback_to_histogram", rep.fallback_to_histogram},
      {"warnings", rep.warnings}};
}

inline json explain_json(const ExplainNode& n) {
  json out{{"op", n.op},
           {"detail", n.detail},
           {"est_rows", n.est_rows},
           {"cost", n.cost},
           {"from_validated", n.from_validated}};
  if (!n.children.empty()) {
    json kids = json::array();
    for (const ExplainNode& c : n.children) kids.push_back(explain_json(c));
    out["children"] = std::move(kids);
  }
  return out;
}

inline json steps_profile_json(const std::vector<GrowthProfileRow>& rows) {
  json out = json::array();
  for (const GrowthProfileRow& r : rows) {
    out.push_back({{"n", r.n},
                   {"expected_steps", r.steps},
                   {"rounded", round_half_up(r.steps)},
                   {"sqrt_ratio", r.sqrt_ratio}});
  }
  return out;
}

inline json ott_bench_json(const OttBenchResult& res) {
  json queries = json::array();
  for (const OttQueryResult& q : res.queries) {
    json seq = json::array();
    for (Transformation t : q.transformation_sequence) {
      seq.push_back(transformation_name(t));
    }
    queries.push_back(
        {{"query", q.query},
         {"true_rows", q.true_rows},
         {"estimated_rows", q.estimated_rows},
         {"iterations", q.iterations},
         {"transformation_sequence", std::move(seq)},
         {"sequence_shape", sequence_case_name(q.sequence_case)},
         {"final_first_join_validated_empty",
          q.final_first_join_validated_empty},
         {"baseline_result", q.baseline_result},
         {"reopt_result", q.reopt_result},
         {"baseline_rows_processed", q.baseline_rows_processed},
         {"reopt_rows_processed", q.reopt_rows_processed},
         {"reopt_join_output_rows", q.reopt_join_output_rows},
         {"baseline_seconds", q.baseline_seconds},
         {"reopt_seconds", q.reopt_seconds},
         {"baseline_plan", q.baseline_plan},
         {"reopt_plan", q.reopt_plan},
         {"fallback_to_histogram", q.fallback_to_histogram},
         {"warnings", q.warnings}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"tables", res.config.data.tables},
              {"rows_per_table", res.config.data.rows_per_table},
              {"rows_per_value", res.config.data.rows_per_value},
              {"n_join", res.config.n_join},
              {"m", res.config.m},
              {"sample_fraction", res.config.sample_fraction},
              {"queries", std::move(queries)},
              {"total_baseline_rows_processed",
               res.total_baseline_rows_processed},
              {"total_reopt_rows_processed", res.total_reopt_rows_processed},
              {"rows_processed_ratio", res.rows_processed_ratio}};
}

}  // namespace reoptdb
