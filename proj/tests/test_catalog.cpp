#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "helpers.hpp"

using namespace reoptdb;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("reoptdb_test_" + tag);
  fs::remove_all(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("csv loading parses header and rows") {
  fs::path dir = fresh_dir("csv");
  fs::create_directories(dir);
  write_file(dir / "t.csv", "a,b\n1,2\n3,4\n-5,6\n");
  Relation r = load_csv((dir / "t.csv").string(), {"a", "b"});
  CHECK(r.row_count() == 3);
  CHECK(r.column_names == std::vector<std::string>{"a", "b"});
  CHECK(r.column("a") == std::vector<Value>{1, 3, -5});
  CHECK(r.column("b") == std::vector<Value>{2, 4, 6});
}

TEST_CASE("csv loading accepts a header-only file") {
  fs::path dir = fresh_dir("csv_empty");
  fs::create_directories(dir);
  write_file(dir / "t.csv", "a,b\n");
  Relation r = load_csv((dir / "t.csv").string(), {"a", "b"});
  CHECK(r.row_count() == 0);
}

TEST_CASE("csv loading reports bad input with line numbers") {
  fs::path dir = fresh_dir("csv_bad");
  fs::create_directories(dir);

  write_file(dir / "ragged.csv", "a,b\n1,2\n1,2,3\n");
  CHECK_THROWS_WITH(load_csv((dir / "ragged.csv").string(), {"a", "b"}),
                    Catch::Matchers::ContainsSubstring("line 3"));

  write_file(dir / "noint.csv", "a,b\n1,x\n");
  CHECK_THROWS_WITH(load_csv((dir / "noint.csv").string(), {"a", "b"}),
                    Catch::Matchers::ContainsSubstring("line 2"));

  write_file(dir / "hdr.csv", "a,c\n1,2\n");
  CHECK_THROWS(load_csv((dir / "hdr.csv").string(), {"a", "b"}));

  CHECK_THROWS(load_csv((dir / "missing.csv").string(), {"a"}));
}

TEST_CASE("bernoulli sampling is deterministic and respects bounds") {
  Rng rng(41);
  Catalog cat = testutil::make_random_catalog(rng, 1);
  const Relation& r = cat.relations.begin()->second;

  SampleTable s1 = draw_sample(r, 0.3, 99);
  SampleTable s2 = draw_sample(r, 0.3, 99);
  CHECK(s1.rows.columns == s2.rows.columns);
  CHECK(s1.fraction == 0.3);
  CHECK(s1.seed == 99);
  CHECK(s1.source == r.name);

  SampleTable all = draw_sample(r, 1.0, 7);
  CHECK(all.rows.columns == r.columns);

  CHECK_THROWS(draw_sample(r, 0.0, 1));
  CHECK_THROWS(draw_sample(r, 1.5, 1));
}

TEST_CASE("sample rows are a subsequence of the source") {
  Rng rng(42);
  Catalog cat = testutil::make_random_catalog(rng, 1);
  const Relation& r = cat.relations.begin()->second;
  SampleTable s = draw_sample(r, 0.5, 3);
  // Walk the source in order matching sample rows greedily; every sample row
  // must be found, in order.
  std::size_t src = 0;
  for (std::int64_t i = 0; i < s.row_count(); ++i) {
    bool found = false;
    for (; src < static_cast<std::size_t>(r.row_count()); ++src) {
      bool same = true;
      for (std::size_t c = 0; c < r.columns.size(); ++c) {
        if (r.columns[c][src] !=
            s.rows.columns[c][static_cast<std::size_t>(i)]) {
          same = false;
          break;
        }
      }
      if (same) {
        ++src;
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("sample sizes are binomial on average") {
  std::vector<Value> col(10000);
  for (std::size_t i = 0; i < col.size(); ++i) {
    col[i] = static_cast<Value>(i);
  }
  Relation r = testutil::make_relation("R", {"a"}, {col});
  double fraction = 0.05;
  int seeds = 200;
  double total = 0;
  for (int s = 0; s < seeds; ++s) {
    total += static_cast<double>(
        draw_sample(r, fraction, static_cast<std::uint64_t>(s)).row_count());
  }
  double mean = total / seeds;
  double expected = fraction * 10000;
  double sd_of_mean =
      std::sqrt(10000 * fraction * (1 - fraction)) / std::sqrt(seeds);
  CHECK(std::abs(mean - expected) <= 3 * sd_of_mean);
}

TEST_CASE("catalog round-trip restores relations, samples, and stats") {
  Rng rng(50);
  Catalog cat = testutil::make_random_catalog(rng, 3);
  cat.sample_all(0.2, 17);

  fs::path dir = fresh_dir("roundtrip");
  save_catalog(cat, dir.string());
  Catalog back = open_catalog(dir.string());

  REQUIRE(back.relations.size() == cat.relations.size());
  for (const auto& [name, rel] : cat.relations) {
    const Relation& restored = back.relation(name);
    CHECK(restored.column_names == rel.column_names);
    CHECK(restored.columns == rel.columns);
  }
  REQUIRE(back.samples.size() == cat.samples.size());
  for (const auto& [name, s] : cat.samples) {
    const SampleTable& restored = back.sample(name);
    CHECK(restored.fraction == s.fraction);
    CHECK(restored.seed == s.seed);
    CHECK(restored.rows.columns == s.rows.columns);
  }
  REQUIRE(back.stats.size() == cat.stats.size());
  for (const auto& [name, rel_stats] : cat.stats) {
    const RelationStats& restored = back.stats.at(name);
    REQUIRE(restored.size() == rel_stats.size());
    for (const auto& [col, st] : rel_stats) {
      const AttributeStats& rst = restored.at(col);
      CHECK(rst.row_count == st.row_count);
      CHECK(rst.n_distinct == st.n_distinct);
      CHECK(rst.mcvs == st.mcvs);
      CHECK(rst.histogram == st.histogram);
      CHECK(rst.bucket_rows == st.bucket_rows);
    }
  }
}

TEST_CASE("catalog open rejects corruption and missing directories") {
  CHECK_THROWS(open_catalog("/nonexistent/catalog/dir"));

  Rng rng(51);
  Catalog cat = testutil::make_random_catalog(rng, 1);
  fs::path dir = fresh_dir("corrupt");
  save_catalog(cat, dir.string());

  // Flip a data cell without updating the manifest checksum.
  fs::path csv = dir / (cat.relations.begin()->first + ".csv");
  std::ifstream in(csv);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();
  std::size_t pos = text.find_last_of("0123456789");
  text[pos] = text[pos] == '9' ? '8' : '9';
  write_file(csv, text);
  CHECK_THROWS_WITH(open_catalog(dir.string()),
                    Catch::Matchers::ContainsSubstring("corrupt"));
}

TEST_CASE("per-relation sample seeds differ but stay reproducible") {
  Rng rng(52);
  Catalog cat = testutil::make_random_catalog(rng, 3);
  cat.sample_all(0.5, 123);
  std::vector<std::uint64_t> seeds1, seeds2;
  for (const auto& [name, s] : cat.samples) seeds1.push_back(s.seed);
  cat.sample_all(0.5, 123);
  for (const auto& [name, s] : cat.samples) seeds2.push_back(s.seed);
  CHECK(seeds1 == seeds2);
  // Distinct relations get distinct derived seeds.
  std::sort(seeds1.begin(), seeds1.end());
  CHECK(std::adjacent_find(seeds1.begin(), seeds1.end()) == seeds1.end());
}
