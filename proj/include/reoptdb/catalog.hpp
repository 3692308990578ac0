#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "reoptdb/relation.hpp"
#include "reoptdb/stats.hpp"

namespace reoptdb {

constexpr int kCatalogSchemaVersion = 1;
constexpr double kDefaultSampleFraction = 0.05;

// Parses a header-row CSV of integer cells. The header must match the
// expected schema exactly when one is given.
inline Relation load_csv(const std::string& path,
                         const std::vector<std::string>& expect_columns = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CSV file '" + path + "'");

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  Relation rel;
  rel.name = std::filesystem::path(path).stem().string();

  std::string line;
  if (!std::getline(in, line)) throw Error("CSV file '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  rel.column_names = split(line);
  if (rel.column_names.empty()) {
    throw Error("CSV file '" + path + "' has an empty header");
  }
  if (!expect_columns.empty() && rel.column_names != expect_columns) {
    throw Error("CSV file '" + path + "' header does not match schema");
  }
  rel.columns.assign(rel.column_names.size(), {});

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != rel.column_names.size()) {
      throw Error("CSV file '" + path + "' line " + std::to_string(line_no) +
                  ": expected " + std::to_string(rel.column_names.size()) +
                  " cells, got " + std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        std::size_t used = 0;
        Value v = std::stoll(cells[i], &used);
        if (used != cells[i].size()) throw std::invalid_argument("trailing");
        rel.columns[i].push_back(v);
      } catch (const std::exception&) {
        throw Error("CSV file '" + path + "' line " + std::to_string(line_no) +
                    ": cell '" + cells[i] + "' is not an integer");
      }
    }
  }
  rel.check();
  return rel;
}

inline std::string to_csv(const Relation& rel) {
  std::string out;
  for (std::size_t i = 0; i < rel.column_names.size(); ++i) {
    if (i) out += ',';
    out += rel.column_names[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < rel.row_count(); ++r) {
    for (std::size_t i = 0; i < rel.columns.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(rel.columns[i][r]);
    }
    out += '\n';
  }
  return out;
}

// Bernoulli sample: row i of the source is included iff the (seed, i) hash
// maps below the fraction. Membership depends only on (seed, fraction, i),
// never on other rows, so samples re-draw bit-exactly.
inline SampleTable draw_sample(const Relation& rel, double fraction,
                               std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw Error("sample fraction must lie in (0, 1]");
  }
  SampleTable s;
  s.source = rel.name;
  s.fraction = fraction;
  s.seed = seed;
  s.rows.name = rel.name;
  s.rows.column_names = rel.column_names;
  s.rows.columns.assign(rel.columns.size(), {});
  for (std::size_t i = 0; i < rel.row_count(); ++i) {
    if (detail::to_unit_double(detail::mix64(seed, i)) < fraction) {
      for (std::size_t c = 0; c < rel.columns.size(); ++c) {
        s.rows.columns[c].push_back(rel.columns[c][i]);
      }
    }
  }
  return s;
}

// A named set of relations plus their samples and statistics. Persisted as
// one CSV per relation and a JSON manifest carrying schema, checksums,
// sample parameters, and statistics.
struct Catalog {
  std::map<std::string, Relation> relations;
  std::map<std::string, SampleTable> samples;
  CatalogStats stats;

  const Relation& relation(const std::string& name) const {
    auto it = relations.find(name);
    if (it == relations.end()) throw Error("unknown relation '" + name + "'");
    return it->second;
  }

  const SampleTable& sample(const std::string& name) const {
    auto it = samples.find(name);
    if (it == samples.end()) {
      throw Error("no sample drawn for relation '" + name + "'");
    }
    return it->second;
  }

  const RelationStats& relation_stats(const std::string& name) const {
    auto it = stats.find(name);
    if (it == stats.end()) {
      throw Error("no statistics for relation '" + name +
                  "' (run analyze first)");
    }
    return it->second;
  }

  void add_relation(Relation rel) {
    rel.check();
    relations[rel.name] = std::move(rel);
  }

  void analyze_all(int mcv_limit = 100, int bucket_count = 100) {
    stats.clear();
    for (const auto& [name, rel] : relations) {
      stats[name] = analyze(rel, mcv_limit, bucket_count);
    }
  }

  void sample_all(double fraction, std::uint64_t seed) {
    samples.clear();
    for (const auto& [name, rel] : relations) {
      // Per-relation seed, derived so that adding a relation does not
      // perturb the samples of the others.
      samples[name] =
          draw_sample(rel, fraction, detail::mix64(seed, detail::fnv1a(name)));
    }
  }
};

namespace detail {

inline nlohmann::json stats_to_json(const AttributeStats& st) {
  nlohmann::json j;
  j["row_count"] = st.row_count;
  j["n_distinct"] = st.n_distinct;
  auto mcvs = nlohmann::json::array();
  for (const auto& [v, f] : st.mcvs) mcvs.push_back({v, f});
  j["mcvs"] = std::move(mcvs);
  j["histogram"] = st.histogram;
  j["bucket_rows"] = st.bucket_rows;
  return j;
}

inline AttributeStats stats_from_json(const nlohmann::json& j) {
  AttributeStats st;
  st.row_count = j.at("row_count").get<std::int64_t>();
  st.n_distinct = j.at("n_distinct").get<std::int64_t>();
  for (const auto& pair : j.at("mcvs")) {
    st.mcvs.emplace_back(pair.at(0).get<Value>(), pair.at(1).get<double>());
  }
  st.histogram = j.at("histogram").get<std::vector<Value>>();
  st.bucket_rows = j.at("bucket_rows").get<std::vector<std::int64_t>>();
  return st;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing file '" + path + "'");
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

inline void save_catalog(const Catalog& cat, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["schema_version"] = kCatalogSchemaVersion;

  auto rels = nlohmann::json::array();
  for (const auto& [name, rel] : cat.relations) {
    std::string csv = to_csv(rel);
    std::string file = name + ".csv";
    detail::write_file((fs::path(dir) / file).string(), csv);
    rels.push_back({{"name", name},
                    {"file", file},
                    {"columns", rel.column_names},
                    {"row_count", rel.row_count()},
                    {"checksum", detail::hex64(detail::fnv1a(csv))}});
  }
  manifest["relations"] = std::move(rels);

  auto samples = nlohmann::json::array();
  for (const auto& [name, s] : cat.samples) {
    samples.push_back(
        {{"source", s.source}, {"fraction", s.fraction}, {"seed", s.seed}});
  }
  manifest["samples"] = std::move(samples);

  nlohmann::json stats = nlohmann::json::object();
  for (const auto& [rel_name, rel_stats] : cat.stats) {
    nlohmann::json per_rel = nlohmann::json::object();
    for (const auto& [col, st] : rel_stats) {
      per_rel[col] = detail::stats_to_json(st);
    }
    stats[rel_name] = std::move(per_rel);
  }
  manifest["stats"] = std::move(stats);

  detail::write_file((fs::path(dir) / "manifest.json").string(),
                     manifest.dump(2) + "\n");
}

inline Catalog open_catalog(const std::string& dir) {
  namespace fs = std::filesystem;
  std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error("catalog manifest '" + manifest_path +
                "' is not valid JSON: " + e.what());
  }
  int version = manifest.at("schema_version").get<int>();
  if (version != kCatalogSchemaVersion) {
    throw Error("catalog manifest '" + manifest_path + "' has schema version " +
                std::to_string(version) + ", expected " +
                std::to_string(kCatalogSchemaVersion));
  }

  Catalog cat;
  for (const auto& entry : manifest.at("relations")) {
    std::string name = entry.at("name").get<std::string>();
    std::string file = entry.at("file").get<std::string>();
    std::string path = (fs::path(dir) / file).string();
    std::string csv = detail::read_file(path);
    std::string checksum = detail::hex64(detail::fnv1a(csv));
    if (checksum != entry.at("checksum").get<std::string>()) {
      throw Error("catalog file '" + path +
                  "' is corrupt: checksum mismatch (expected " +
                  entry.at("checksum").get<std::string>() + ", got " +
                  checksum + ")");
    }
    Relation rel = load_csv(path, entry.at("columns").get<std::vector<std::string>>());
    rel.name = name;
    if (rel.row_count() != entry.at("row_count").get<std::size_t>()) {
      throw Error("catalog file '" + path + "' is corrupt: row count mismatch");
    }
    cat.add_relation(std::move(rel));
  }

  for (const auto& entry : manifest.at("samples")) {
    std::string source = entry.at("source").get<std::string>();
    cat.samples[source] =
        draw_sample(cat.relation(source), entry.at("fraction").get<double>(),
                    entry.at("seed").get<std::uint64_t>());
  }

  if (manifest.contains("stats")) {
    for (const auto& [rel_name, per_rel] : manifest.at("stats").items()) {
      for (const auto& [col, st] : per_rel.items()) {
        cat.stats[rel_name][col] = detail::stats_from_json(st);
      }
    }
  }
  return cat;
}

}  // namespace reoptdb
