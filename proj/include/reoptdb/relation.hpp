#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reoptdb/common.hpp"

namespace reoptdb {

// An in-memory integer table, stored column-major. Column order is part of
// the schema and is preserved through save/load round trips.
struct Relation {
  std::string name;
  std::vector<std::string> column_names;
  std::vector<std::vector<Value>> columns;

  std::size_t row_count() const {
    return columns.empty() ? 0 : columns.front().size();
  }

  int column_index(const std::string& col) const {
    for (std::size_t i = 0; i < column_names.size(); ++i) {
      if (column_names[i] == col) return static_cast<int>(i);
    }
    return -1;
  }

  const std::vector<Value>& column(const std::string& col) const {
    int idx = column_index(col);
    if (idx < 0) {
      throw Error("relation '" + name + "' has no column '" + col + "'");
    }
    return columns[static_cast<std::size_t>(idx)];
  }

  // Columns must be named, distinct, and of equal length.
  void check() const {
    if (column_names.size() != columns.size()) {
      throw Error("relation '" + name + "': column name/data count mismatch");
    }
    for (std::size_t i = 0; i < column_names.size(); ++i) {
      if (column_names[i].empty()) {
        throw Error("relation '" + name + "': empty column name");
      }
      for (std::size_t j = i + 1; j < column_names.size(); ++j) {
        if (column_names[i] == column_names[j]) {
          throw Error("relation '" + name + "': duplicate column '" +
                      column_names[i] + "'");
        }
      }
      if (columns[i].size() != columns.front().size()) {
        throw Error("relation '" + name + "': ragged columns");
      }
    }
  }
};

// A Bernoulli row sample of a source relation. Membership is fully
// determined by (seed, fraction, source row index), so a sample can be
// re-drawn bit-exactly instead of being persisted.
struct SampleTable {
  std::string source;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  Relation rows;

  std::size_t row_count() const { return rows.row_count(); }
};

}  // namespace reoptdb
