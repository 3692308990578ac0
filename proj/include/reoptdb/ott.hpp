#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "reoptdb/catalog.hpp"
#include "reoptdb/common.hpp"
#include "reoptdb/executor.hpp"
#include "reoptdb/relation.hpp"
#include "reoptdb/reopt.hpp"

namespace reoptdb {

// Adversarial benchmark schema: tables R1..RK with columns (Ak, Bk) where
// Bk = Ak and every value in 0..values()-1 appears exactly rows_per_value
// times, in shuffled row order. Queries select a constant on a subset of the
// tables and chain-join the rest; attribute-independence estimates are then
// identical for every query of a given shape while the true result is either
// 0 or rows_per_value^n depending only on whether the selected constants all
// agree.
struct OttConfig {
  int tables = 5;
  std::int64_t rows_per_table = 1000;
  std::int64_t rows_per_value = 10;
  std::uint64_t seed = 0;

  // Domain size: each of values() distinct values occurs exactly
  // rows_per_value times.
  std::int64_t values() const {
    if (tables < 2) throw UsageError("ott: need at least 2 tables");
    if (rows_per_value < 1) {
      throw UsageError("ott: rows_per_value must be >= 1");
    }
    if (rows_per_table < 1 || rows_per_table % rows_per_value != 0) {
      throw UsageError(
          "ott: rows_per_table must be a positive multiple of rows_per_value");
    }
    std::int64_t v = rows_per_table / rows_per_value;
    if (v < 2) throw UsageError("ott: need at least 2 distinct values");
    return v;
  }
};

inline std::vector<Relation> generate_ott(const OttConfig& cfg) {
  (void)cfg.values();  // validates the shape parameters
  std::vector<Relation> out;
  for (int k = 1; k <= cfg.tables; ++k) {
    std::vector<Value> col(static_cast<std::size_t>(cfg.rows_per_table));
    for (std::int64_t i = 0; i < cfg.rows_per_table; ++i) {
      col[static_cast<std::size_t>(i)] = i / cfg.rows_per_value;
    }
    // Shuffle so row order carries no signal; per-table derived stream keeps
    // each table independent of the others and of the table count.
    Rng rng(detail::mix64(cfg.seed, static_cast<std::uint64_t>(k)));
    for (std::size_t i = col.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(col[i], col[j]);
    }
    Relation rel;
    rel.name = "R" + std::to_string(k);
    rel.column_names = {"A" + std::to_string(k), "B" + std::to_string(k)};
    rel.columns = {col, col};
    rel.check();
    out.push_back(std::move(rel));
  }
  return out;
}

// One benchmark query over R1..Rn: selections Ak = constants[k-1] on every
// table, join chain Bk = Bk+1. Constants are 0 except on one subset of
// positions, which carries either all 0s or all 1s; with an odd table the two
// groups disagree and the true result is empty.
struct OttQuery {
  std::vector<Value> constants;  // one per table R1..Rn

  int tables() const { return static_cast<int>(constants.size()); }

  QuerySpec to_query() const {
    QuerySpec q;
    int n = tables();
    if (n < 2) throw UsageError("ott query: need at least 2 tables");
    for (int k = 1; k <= n; ++k) {
      std::string rel = "R" + std::to_string(k);
      q.relations.push_back(rel);
      q.selections.push_back(
          {{rel, "A" + std::to_string(k)}, constants[static_cast<std::size_t>(k - 1)]});
      if (k < n) {
        q.joins.push_back({{rel, "B" + std::to_string(k)},
                           {"R" + std::to_string(k + 1),
                            "B" + std::to_string(k + 1)}});
      }
    }
    q.canonicalize();
    return q;
  }
};

// All queries over R1..R(n_join+1) whose constants take one value on a chosen
// m-subset of positions and the other value elsewhere: C(n, m) subsets times
// the two assignments. With 0 < m < n every query's true result is empty.
inline std::vector<OttQuery> ott_queries(int n_join, int m) {
  int n = n_join + 1;
  if (n_join < 1) throw UsageError("ott queries: need at least 1 join");
  if (m < 0 || m > n) throw UsageError("ott queries: m out of range");
  std::vector<OttQuery> out;
  std::vector<int> pick;
  auto emit = [&]() {
    for (Value group_value : {Value{0}, Value{1}}) {
      OttQuery q;
      q.constants.assign(static_cast<std::size_t>(n), group_value == 0 ? 1 : 0);
      for (int pos : pick) {
        q.constants[static_cast<std::size_t>(pos)] = group_value;
      }
      out.push_back(std::move(q));
    }
  };
  // Lexicographic m-subsets of {0..n-1}.
  std::function<void(int)> walk = [&](int start) {
    if (static_cast<int>(pick.size()) == m) {
      emit();
      return;
    }
    int need = m - static_cast<int>(pick.size());
    for (int i = start; i + need <= n; ++i) {
      pick.push_back(i);
      walk(i + 1);
      pick.pop_back();
    }
  };
  walk(0);
  return out;
}

// Exact result size, independent of the engine: rows_per_value^n when all
// constants agree, 0 otherwise.
inline double ott_true_cardinality(const OttConfig& cfg, const OttQuery& q) {
  if (q.constants.empty()) throw UsageError("ott query: no tables");
  for (Value c : q.constants) {
    if (c != q.constants.front()) return 0.0;
  }
  return std::pow(static_cast<double>(cfg.rows_per_value),
                  static_cast<double>(q.tables()));
}

// What independent-attribute estimation must report for any of these
// queries: rows_per_value^n / values^(n-1), regardless of the constants.
inline double ott_avi_cardinality(const OttConfig& cfg, int tables) {
  double m = static_cast<double>(cfg.rows_per_value);
  double l = static_cast<double>(cfg.values());
  return std::pow(m, static_cast<double>(tables)) /
         std::pow(l, static_cast<double>(tables - 1));
}

struct OttBenchConfig {
  OttConfig data;
  int n_join = 4;
  int m = 4;
  double sample_fraction = kDefaultSampleFraction;
  std::uint64_t sample_seed = 1;
  int stats_mcv_limit = 100;
  int stats_buckets = 100;
  ReoptConfig reopt;
};

struct OttQueryResult {
  std::string query;
  double true_rows = 0.0;
  double estimated_rows = 0.0;  // initial estimate of the full join
  int iterations = 0;
  std::vector<Transformation> transformation_sequence;
  SequenceCase sequence_case = SequenceCase::Invalid;
  bool final_first_join_validated_empty = false;
  std::int64_t baseline_result = 0;
  std::int64_t reopt_result = 0;
  std::int64_t baseline_rows_processed = 0;
  std::int64_t reopt_rows_processed = 0;
  std::int64_t reopt_join_output_rows = 0;  // emitted above the leaf scans
  double baseline_seconds = 0.0;
  double reopt_seconds = 0.0;
  std::string baseline_plan;
  std::string reopt_plan;
  bool fallback_to_histogram = false;
  std::vector<std::string> warnings;
};

struct OttBenchResult {
  OttBenchConfig config;
  std::vector<OttQueryResult> queries;
  std::int64_t total_baseline_rows_processed = 0;
  std::int64_t total_reopt_rows_processed = 0;
  // Sum over queries of baseline rows processed divided by the same sum for
  // the re-optimized plans.
  double rows_processed_ratio = 0.0;
};

inline Catalog make_ott_catalog(const OttBenchConfig& cfg) {
  Catalog cat;
  for (Relation& rel : generate_ott(cfg.data)) {
    cat.add_relation(std::move(rel));
  }
  cat.analyze_all(cfg.stats_mcv_limit, cfg.stats_buckets);
  cat.sample_all(cfg.sample_fraction, cfg.sample_seed);
  return cat;
}

// Runs every benchmark query twice: once with the plan picked from column
// statistics alone, once through the full re-optimization loop, and compares
// work done over the full data.
inline OttBenchResult run_ott_bench(const OttBenchConfig& cfg) {
  if (cfg.n_join + 1 > cfg.data.tables) {
    throw UsageError("ott bench: n_join + 1 exceeds the table count");
  }
  Catalog cat = make_ott_catalog(cfg);
  Bindings full;
  for (const auto& [name, rel] : cat.relations) full[name] = &rel;

  OttBenchResult result;
  result.config = cfg;
  for (const OttQuery& oq : ott_queries(cfg.n_join, cfg.m)) {
    QuerySpec q = oq.to_query();
    OttQueryResult row;
    row.query = q.text();
    row.true_rows = ott_true_cardinality(cfg.data, oq);

    RelMask all_mask =
        (RelMask{1} << static_cast<RelMask>(q.relations.size())) - 1;
    row.estimated_rows =
        estimate_cardinality(q, all_mask, cat.stats, CardMap{});

    PhysicalPlan baseline =
        optimize(q, cat.stats, CardMap{}, cfg.reopt.optimizer);
    ExecReport base_exec = execute(baseline, full);
    row.baseline_plan = encoding_text(baseline);
    row.baseline_result = base_exec.result_rows;
    row.baseline_rows_processed = base_exec.rows_processed;
    row.baseline_seconds = base_exec.wall_seconds;

    ReoptReport rep = reoptimize(q, cat, cfg.reopt);
    const PhysicalPlan& final_plan = rep.plans.back();
    ExecReport reopt_exec = execute(final_plan, full);
    row.reopt_plan = encoding_text(final_plan);
    row.reopt_result = reopt_exec.result_rows;
    row.reopt_rows_processed = reopt_exec.rows_processed;
    row.reopt_seconds = reopt_exec.wall_seconds;
    for (const auto& [key, rows] : reopt_exec.node_rows) {
      (void)key;
      row.reopt_join_output_rows += rows;
    }
    row.iterations = rep.iterations;
    row.transformation_sequence = rep.transformation_sequence;
    row.sequence_case = classify_sequence(rep.transformation_sequence);
    row.fallback_to_histogram = rep.fallback_to_histogram;
    row.warnings = rep.warnings;

    // Does the plan start from a join the loop has pinned to zero? That is
    // the mechanism that turns an empty query into leaf-scans-only work.
    std::vector<RelMask> enc = tree_encoding(final_plan);
    if (!enc.empty()) {
      std::string key = subset_key(q, enc.front());
      auto it = rep.gamma_final.cards.find(key);
      row.final_first_join_validated_empty =
          it != rep.gamma_final.cards.end() && it->second == 0.0;
    }

    result.total_baseline_rows_processed += row.baseline_rows_processed;
    result.total_reopt_rows_processed += row.reopt_rows_processed;
    result.queries.push_back(std::move(row));
  }
  if (result.total_reopt_rows_processed > 0) {
    result.rows_processed_ratio =
        static_cast<double>(result.total_baseline_rows_processed) /
        static_cast<double>(result.total_reopt_rows_processed);
  }
  return result;
}

}  // namespace reoptdb
