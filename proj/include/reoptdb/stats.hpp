#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "reoptdb/relation.hpp"

namespace reoptdb {

// Per-column statistics computed by a full scan: exact distinct count, the
// most common values with exact frequencies, and an equi-depth histogram
// over the remaining (non-MCV) rows.
struct AttributeStats {
  std::int64_t row_count = 0;
  std::int64_t n_distinct = 0;
  // (value, frequency) sorted by frequency descending, ties by value
  // ascending.
  std::vector<std::pair<Value, double>> mcvs;
  // bucket_count+1 boundaries over the sorted non-MCV rows; empty when every
  // value is an MCV.
  std::vector<Value> histogram;
  // Rows per histogram bucket; populations differ by at most one.
  std::vector<std::int64_t> bucket_rows;

  double mcv_frequency(Value v) const {
    for (const auto& [val, freq] : mcvs) {
      if (val == v) return freq;
    }
    return -1.0;
  }

  double mcv_total_frequency() const {
    double total = 0.0;
    for (const auto& [val, freq] : mcvs) total += freq;
    return total;
  }
};

using RelationStats = std::map<std::string, AttributeStats>;

inline AttributeStats analyze_column(const std::vector<Value>& data,
                                     int mcv_limit, int bucket_count) {
  AttributeStats st;
  st.row_count = static_cast<std::int64_t>(data.size());

  std::map<Value, std::int64_t> counts;
  for (Value v : data) ++counts[v];
  st.n_distinct = static_cast<std::int64_t>(counts.size());

  // Rank values by (count desc, value asc); the top mcv_limit become MCVs.
  std::vector<std::pair<Value, std::int64_t>> ranked(counts.begin(),
                                                     counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::size_t n_mcv =
      std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(mcv_limit));
  for (std::size_t i = 0; i < n_mcv; ++i) {
    st.mcvs.emplace_back(ranked[i].first,
                         static_cast<double>(ranked[i].second) /
                             static_cast<double>(st.row_count));
  }

  // Equi-depth histogram over the non-MCV rows (values with multiplicity,
  // sorted). Bucket populations differ by at most one row.
  std::vector<Value> rest;
  for (std::size_t i = n_mcv; i < ranked.size(); ++i) {
    rest.insert(rest.end(), static_cast<std::size_t>(ranked[i].second),
                ranked[i].first);
  }
  std::sort(rest.begin(), rest.end());
  if (!rest.empty()) {
    std::size_t buckets =
        std::min<std::size_t>(rest.size(), static_cast<std::size_t>(bucket_count));
    std::size_t base = rest.size() / buckets;
    std::size_t extra = rest.size() % buckets;
    st.histogram.push_back(rest.front());
    std::size_t pos = 0;
    for (std::size_t b = 0; b < buckets; ++b) {
      std::size_t size = base + (b < extra ? 1 : 0);
      pos += size;
      st.bucket_rows.push_back(static_cast<std::int64_t>(size));
      st.histogram.push_back(rest[pos - 1]);
    }
  }
  return st;
}

// Full-scan statistics for every column of a relation.
inline RelationStats analyze(const Relation& rel, int mcv_limit = 100,
                             int bucket_count = 100) {
  if (rel.row_count() == 0) {
    throw Error("cannot analyze empty relation '" + rel.name + "'");
  }
  if (mcv_limit < 0 || bucket_count < 1) {
    throw Error("analyze: mcv_limit must be >= 0 and bucket_count >= 1");
  }
  RelationStats result;
  for (std::size_t i = 0; i < rel.column_names.size(); ++i) {
    result[rel.column_names[i]] =
        analyze_column(rel.columns[i], mcv_limit, bucket_count);
  }
  return result;
}

using CatalogStats = std::map<std::string, RelationStats>;

}  // namespace reoptdb
