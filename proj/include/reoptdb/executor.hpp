#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "reoptdb/plan.hpp"
#include "reoptdb/query.hpp"
#include "reoptdb/relation.hpp"

namespace reoptdb {

using Bindings = std::map<std::string, const Relation*>;

struct ExecOptions {
  // When a join's left (build/outer) input is empty the join's result is
  // empty regardless of the right side, so the right subtree is skipped
  // entirely. This is what makes plans that evaluate an empty join first
  // cheap to run. Validation runs disable it so every node gets observed.
  bool short_circuit_empty = true;
};

struct ExecReport {
  std::int64_t result_rows = 0;
  // Rows emitted per join node, keyed canonically; covers every join of the
  // plan (skipped nodes report 0).
  std::map<std::string, std::int64_t> node_rows;
  double wall_seconds = 0.0;
  // Total rows emitted across all executed operators, leaves included.
  std::int64_t rows_processed = 0;
};

namespace detail {

struct ExecTable {
  std::vector<ColumnRef> schema;
  std::vector<std::vector<Value>> columns;
  std::size_t rows = 0;

  int column_index(const ColumnRef& c) const {
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i] == c) return static_cast<int>(i);
    }
    return -1;
  }
};

inline const Relation& bound_relation(const Bindings& bindings,
                                      const std::string& name) {
  auto it = bindings.find(name);
  if (it == bindings.end() || it->second == nullptr) {
    throw Error("no table bound for relation '" + name + "'");
  }
  return *it->second;
}

inline std::vector<ColumnRef> static_schema(const NodePtr& n,
                                            const Bindings& bindings) {
  if (n->kind == PlanNode::Kind::Scan) {
    const Relation& rel = bound_relation(bindings, n->relation);
    std::vector<ColumnRef> out;
    for (const auto& col : rel.column_names) out.push_back({n->relation, col});
    return out;
  }
  auto left = static_schema(n->left, bindings);
  auto right = static_schema(n->right, bindings);
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

inline void record_skipped_joins(const NodePtr& n, ExecReport& report) {
  if (n->kind == PlanNode::Kind::Scan) return;
  record_skipped_joins(n->left, report);
  record_skipped_joins(n->right, report);
  report.node_rows[node_key(n)] = 0;
}

struct RowKeyHash {
  std::size_t operator()(const std::vector<Value>& key) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Value v : key) {
      h = mix64(h ^ static_cast<std::uint64_t>(v));
    }
    return static_cast<std::size_t>(h);
  }
};

class PlanExecutor {
 public:
  PlanExecutor(const Bindings& bindings, const ExecOptions& opts,
               ExecReport& report)
      : bindings_(bindings), opts_(opts), report_(report) {}

  ExecTable run(const NodePtr& n) {
    if (n->kind == PlanNode::Kind::Scan) return scan(n);
    ExecTable left = run(n->left);

    ExecTable out;
    if (opts_.short_circuit_empty && left.rows == 0) {
      out.schema = static_schema(n, bindings_);
      out.columns.assign(out.schema.size(), {});
      record_skipped_joins(n->right, report_);
      report_.node_rows[node_key(n)] = 0;
      return out;
    }

    ExecTable right = run(n->right);
    out.schema = left.schema;
    out.schema.insert(out.schema.end(), right.schema.begin(),
                      right.schema.end());
    out.columns.assign(out.schema.size(), {});

    std::vector<int> left_key, right_key;
    for (const auto& [l, r] : n->keys) {
      int li = left.column_index(l);
      int ri = right.column_index(r);
      if (li < 0 || ri < 0) {
        throw Error("join key " + l.text() + " = " + r.text() +
                    " does not match the children's schemas");
      }
      left_key.push_back(li);
      right_key.push_back(ri);
    }

    auto emit = [&](std::size_t lrow, std::size_t rrow) {
      std::size_t nl = left.columns.size();
      for (std::size_t c = 0; c < nl; ++c) {
        out.columns[c].push_back(left.columns[c][lrow]);
      }
      for (std::size_t c = 0; c < right.columns.size(); ++c) {
        out.columns[nl + c].push_back(right.columns[c][rrow]);
      }
      ++out.rows;
    };

    if (n->algo == JoinAlgo::Hash) {
      // Build on the left input, probe with the right. Bucket lists keep
      // build order, so output order is deterministic.
      std::unordered_map<std::vector<Value>, std::vector<std::size_t>,
                         RowKeyHash>
          table;
      std::vector<Value> key(left_key.size());
      for (std::size_t r = 0; r < left.rows; ++r) {
        for (std::size_t k = 0; k < left_key.size(); ++k) {
          key[k] = left.columns[static_cast<std::size_t>(left_key[k])][r];
        }
        table[key].push_back(r);
      }
      for (std::size_t r = 0; r < right.rows; ++r) {
        for (std::size_t k = 0; k < right_key.size(); ++k) {
          key[k] = right.columns[static_cast<std::size_t>(right_key[k])][r];
        }
        auto it = table.find(key);
        if (it == table.end()) continue;
        for (std::size_t lrow : it->second) emit(lrow, r);
      }
    } else {
      for (std::size_t lr = 0; lr < left.rows; ++lr) {
        for (std::size_t rr = 0; rr < right.rows; ++rr) {
          bool match = true;
          for (std::size_t k = 0; k < left_key.size(); ++k) {
            if (left.columns[static_cast<std::size_t>(left_key[k])][lr] !=
                right.columns[static_cast<std::size_t>(right_key[k])][rr]) {
              match = false;
              break;
            }
          }
          if (match) emit(lr, rr);
        }
      }
    }

    report_.node_rows[node_key(n)] = static_cast<std::int64_t>(out.rows);
    report_.rows_processed += static_cast<std::int64_t>(out.rows);
    return out;
  }

 private:
  ExecTable scan(const NodePtr& n) {
    const Relation& rel = bound_relation(bindings_, n->relation);
    ExecTable out;
    for (const auto& col : rel.column_names) {
      out.schema.push_back({n->relation, col});
    }
    out.columns.assign(rel.columns.size(), {});

    std::vector<const std::vector<Value>*> sel_cols;
    std::vector<Value> sel_vals;
    for (const auto& s : n->selections) {
      sel_cols.push_back(&rel.column(s.col.column));
      sel_vals.push_back(s.value);
    }
    for (std::size_t r = 0; r < rel.row_count(); ++r) {
      bool keep = true;
      for (std::size_t i = 0; i < sel_cols.size(); ++i) {
        if ((*sel_cols[i])[r] != sel_vals[i]) {
          keep = false;
          break;
        }
      }
      if (!keep) continue;
      for (std::size_t c = 0; c < rel.columns.size(); ++c) {
        out.columns[c].push_back(rel.columns[c][r]);
      }
      ++out.rows;
    }
    report_.rows_processed += static_cast<std::int64_t>(out.rows);
    return out;
  }

  const Bindings& bindings_;
  const ExecOptions& opts_;
  ExecReport& report_;
};

}  // namespace detail

// Runs a plan over the bound tables with bag semantics, materializing each
// operator's output column-wise. The result row count is plan-independent;
// per-node row counts and rows_processed are properties of the chosen plan.
inline ExecReport execute(const PhysicalPlan& plan, const Bindings& bindings,
                          const ExecOptions& opts = {}) {
  if (!plan.root) throw Error("execute: empty plan");
  ExecReport report;
  auto start = std::chrono::steady_clock::now();
  detail::PlanExecutor exec(bindings, opts, report);
  detail::ExecTable result = exec.run(plan.root);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  report.result_rows = static_cast<std::int64_t>(result.rows);
  return report;
}

// Independent result oracle: filters each relation, then counts the rows of
// the cross product that satisfy every join predicate, via plain nested
// loops. Errors out when the filtered cross product exceeds the guard.
inline std::int64_t nested_loop_reference(const QuerySpec& q,
                                          const Bindings& bindings,
                                          double guard = 1e8) {
  std::vector<const Relation*> rels;
  std::vector<std::vector<std::size_t>> kept;
  double product = 1.0;
  for (const auto& name : q.relations) {
    const Relation& rel = detail::bound_relation(bindings, name);
    rels.push_back(&rel);
    std::vector<std::size_t> rows;
    auto sels = q.selections_on(name);
    for (std::size_t r = 0; r < rel.row_count(); ++r) {
      bool keep = true;
      for (const auto& s : sels) {
        if (rel.column(s.col.column)[r] != s.value) {
          keep = false;
          break;
        }
      }
      if (keep) rows.push_back(r);
    }
    product *= static_cast<double>(rows.size());
    kept.push_back(std::move(rows));
  }
  if (product > guard) {
    throw Error("nested_loop_reference: filtered cross product of " +
                std::to_string(product) + " rows exceeds the guard of " +
                std::to_string(guard));
  }

  // Join predicates indexed by the later of their two relations, so each is
  // checked as soon as both sides are assigned.
  struct Check {
    std::size_t left_rel, right_rel;
    const std::vector<Value>* left_col;
    const std::vector<Value>* right_col;
  };
  std::vector<std::vector<Check>> checks(q.relations.size());
  for (const auto& j : q.joins) {
    std::size_t a = static_cast<std::size_t>(q.relation_index(j.left.relation));
    std::size_t b =
        static_cast<std::size_t>(q.relation_index(j.right.relation));
    Check c{a, b, &rels[a]->column(j.left.column),
            &rels[b]->column(j.right.column)};
    checks[std::max(a, b)].push_back(c);
  }

  std::vector<std::size_t> current(q.relations.size(), 0);
  std::int64_t count = 0;
  struct Walker {
    const std::vector<std::vector<std::size_t>>& kept;
    const std::vector<std::vector<Check>>& checks;
    std::vector<std::size_t>& current;
    std::int64_t& count;

    void walk(std::size_t depth) {
      if (depth == kept.size()) {
        ++count;
        return;
      }
      for (std::size_t row : kept[depth]) {
        current[depth] = row;
        bool ok = true;
        for (const auto& c : checks[depth]) {
          std::size_t lrow = current[c.left_rel];
          std::size_t rrow = current[c.right_rel];
          if ((*c.left_col)[lrow] != (*c.right_col)[rrow]) {
            ok = false;
            break;
          }
        }
        if (ok) walk(depth + 1);
      }
    }
  } walker{kept, checks, current, count};
  walker.walk(0);
  return count;
}

}  // namespace reoptdb
