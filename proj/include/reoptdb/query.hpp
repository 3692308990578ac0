#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "reoptdb/common.hpp"

namespace reoptdb {

// A qualified column reference.
struct ColumnRef {
  std::string relation;
  std::string column;

  auto operator<=>(const ColumnRef&) const = default;
  std::string text() const { return relation + "." + column; }
};

// relation.column = constant
struct SelectionPred {
  ColumnRef col;
  Value value = 0;

  auto operator<=>(const SelectionPred&) const = default;
  std::string text() const {
    return col.text() + " = " + std::to_string(value);
  }
};

// left.column = right.column across two distinct relations.
struct JoinPred {
  ColumnRef left;
  ColumnRef right;

  auto operator<=>(const JoinPred&) const = default;
  std::string text() const { return left.text() + " = " + right.text(); }
};

// A COUNT(*) select-join query over a conjunction of equality predicates.
// Canonical form sorts relations and predicates and orients each join
// predicate so validated-cardinality keys and plan encodings do not depend
// on how the query text was spelled.
struct QuerySpec {
  std::vector<std::string> relations;
  std::vector<SelectionPred> selections;
  std::vector<JoinPred> joins;

  bool operator==(const QuerySpec&) const = default;

  void canonicalize() {
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()),
                    relations.end());
    std::sort(selections.begin(), selections.end());
    selections.erase(std::unique(selections.begin(), selections.end()),
                     selections.end());
    for (auto& j : joins) {
      if (j.right < j.left) std::swap(j.left, j.right);
    }
    std::sort(joins.begin(), joins.end());
    joins.erase(std::unique(joins.begin(), joins.end()), joins.end());
  }

  int relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < relations.size(); ++i) {
      if (relations[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<SelectionPred> selections_on(const std::string& rel) const {
    std::vector<SelectionPred> out;
    for (const auto& s : selections) {
      if (s.col.relation == rel) out.push_back(s);
    }
    return out;
  }

  // Canonical text form; parse(print(q)) == q for canonical q.
  std::string text() const {
    std::string out = "SELECT COUNT(*) FROM ";
    for (std::size_t i = 0; i < relations.size(); ++i) {
      if (i) out += ", ";
      out += relations[i];
    }
    std::vector<std::string> preds;
    for (const auto& s : selections) preds.push_back(s.text());
    for (const auto& j : joins) preds.push_back(j.text());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      out += (i == 0 ? " WHERE " : " AND ");
      out += preds[i];
    }
    return out;
  }
};

// Columns made equal by the transitive closure of the query's join
// predicates. Each class lists its member columns in canonical order.
struct EquivalenceClasses {
  std::vector<std::vector<ColumnRef>> classes;

  // Class index for a column, or -1 if the column joins nothing.
  int class_of(const ColumnRef& c) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      for (const auto& m : classes[i]) {
        if (m == c) return static_cast<int>(i);
      }
    }
    return -1;
  }
};

inline EquivalenceClasses equivalence_classes(const QuerySpec& q) {
  std::vector<ColumnRef> cols;
  auto find_col = [&](const ColumnRef& c) -> int {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == c) return static_cast<int>(i);
    }
    cols.push_back(c);
    return static_cast<int>(cols.size() - 1);
  };

  std::vector<int> parent;
  auto root = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (const auto& j : q.joins) {
    int a = find_col(j.left);
    int b = find_col(j.right);
    while (static_cast<int>(parent.size()) < static_cast<int>(cols.size())) {
      parent.push_back(static_cast<int>(parent.size()));
    }
    parent[root(a)] = root(b);
  }

  std::map<int, std::vector<ColumnRef>> grouped;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    grouped[root(static_cast<int>(i))].push_back(cols[i]);
  }
  EquivalenceClasses ec;
  for (auto& [r, members] : grouped) {
    std::sort(members.begin(), members.end());
    ec.classes.push_back(std::move(members));
  }
  std::sort(ec.classes.begin(), ec.classes.end());
  return ec;
}

}  // namespace reoptdb
