#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "reoptdb/plan.hpp"
#include "reoptdb/query.hpp"
#include "reoptdb/stats.hpp"

namespace reoptdb {

// Selectivity of column = c under the column's statistics: the exact MCV
// frequency when c is an MCV, otherwise the non-MCV mass spread uniformly
// over the non-MCV distinct values.
inline double eq_selectivity(const AttributeStats& st, Value c) {
  double f = st.mcv_frequency(c);
  if (f >= 0.0) return f;
  std::int64_t rest = st.n_distinct - static_cast<std::int64_t>(st.mcvs.size());
  if (rest <= 0) return 0.0;  // every value is an MCV; c matches nothing
  double non_mcv_mass = 1.0 - st.mcv_total_frequency();
  if (non_mcv_mass < 0.0) non_mcv_mass = 0.0;
  return non_mcv_mass / static_cast<double>(rest);
}

// Selectivity of an equality join between two columns, as a fraction of the
// cross product. Without MCVs on both sides this is the uniform rule
// 1/max(n_distinct). With MCVs, matching MCV pairs contribute their exact
// frequency product and the residual mass is spread uniformly over the
// larger non-MCV distinct count. Symmetric in its arguments.
inline double join_selectivity(const AttributeStats& a,
                               const AttributeStats& b) {
  if (a.n_distinct <= 0 || b.n_distinct <= 0) {
    throw Error("join_selectivity: statistics with no distinct values");
  }
  if (a.mcvs.empty() || b.mcvs.empty()) {
    return 1.0 / static_cast<double>(std::max(a.n_distinct, b.n_distinct));
  }
  double matched = 0.0;
  for (const auto& [va, fa] : a.mcvs) {
    double fb = b.mcv_frequency(va);
    if (fb >= 0.0) matched += fa * fb;
  }
  double rest_a = 1.0 - a.mcv_total_frequency();
  double rest_b = 1.0 - b.mcv_total_frequency();
  if (rest_a < 0.0) rest_a = 0.0;
  if (rest_b < 0.0) rest_b = 0.0;
  std::int64_t non_mcv_distinct =
      std::max<std::int64_t>({a.n_distinct - static_cast<std::int64_t>(a.mcvs.size()),
                              b.n_distinct - static_cast<std::int64_t>(b.mcvs.size()),
                              1});
  return matched + rest_a * rest_b / static_cast<double>(non_mcv_distinct);
}

// Attribute-value-independence combination: selectivities multiply. The
// empty list combines to 1.0.
inline double combine_avi(const std::vector<double>& selectivities) {
  double out = 1.0;
  for (double s : selectivities) out *= s;
  return out;
}

namespace detail {

inline const AttributeStats& column_stats(const CatalogStats& stats,
                                          const ColumnRef& col) {
  auto rel_it = stats.find(col.relation);
  if (rel_it == stats.end()) {
    throw Error("no statistics for relation '" + col.relation + "'");
  }
  auto col_it = rel_it->second.find(col.column);
  if (col_it == rel_it->second.end()) {
    throw Error("no statistics for column '" + col.text() + "'");
  }
  return col_it->second;
}

}  // namespace detail

// Estimated cardinality of joining the subset `mask` of the query's
// relations, with the query's selections applied. A validated cardinality
// for exactly this subset wins outright; otherwise the estimate is the
// product of base row counts with all applicable selection and join
// selectivities combined by attribute-value independence. Join predicates
// are expanded by transitive closure into equivalence classes; a class
// touching t of the subset's relations charges t-1 join factors (one per
// merge), chaining the class's member columns in canonical order.
inline double estimate_cardinality(const QuerySpec& q, RelMask mask,
                                   const CatalogStats& stats,
                                   const EquivalenceClasses& classes,
                                   const CardMap& validated) {
  std::string key = subset_key(q, mask);
  if (validated.contains(key)) return validated.at(key);

  std::vector<double> factors;
  double rows = 1.0;
  for (int i : detail::mask_indices(mask)) {
    const std::string& rel = q.relations[static_cast<std::size_t>(i)];
    const AttributeStats* any_col = nullptr;
    auto rel_it = stats.find(rel);
    if (rel_it == stats.end() || rel_it->second.empty()) {
      throw Error("no statistics for relation '" + rel + "'");
    }
    any_col = &rel_it->second.begin()->second;
    rows *= static_cast<double>(any_col->row_count);
    for (const auto& sel : q.selections_on(rel)) {
      factors.push_back(
          eq_selectivity(detail::column_stats(stats, sel.col), sel.value));
    }
  }

  for (const auto& members : classes.classes) {
    // Member columns of this class that fall inside the subset, one
    // representative per relation, in canonical order.
    std::vector<ColumnRef> present;
    for (const auto& col : members) {
      int idx = q.relation_index(col.relation);
      if (idx < 0 || !(mask & (RelMask{1} << idx))) continue;
      bool seen = false;
      for (const auto& p : present) {
        if (p.relation == col.relation) {
          seen = true;
          break;
        }
      }
      if (!seen) present.push_back(col);
    }
    for (std::size_t i = 1; i < present.size(); ++i) {
      factors.push_back(
          join_selectivity(detail::column_stats(stats, present[i - 1]),
                           detail::column_stats(stats, present[i])));
    }
  }
  return rows * combine_avi(factors);
}

inline double estimate_cardinality(const QuerySpec& q, RelMask mask,
                                   const CatalogStats& stats,
                                   const CardMap& validated) {
  return estimate_cardinality(q, mask, stats, equivalence_classes(q),
                              validated);
}

}  // namespace reoptdb
