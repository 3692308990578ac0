#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "reoptdb/catalog.hpp"
#include "reoptdb/common.hpp"
#include "reoptdb/convergence.hpp"
#include "reoptdb/executor.hpp"
#include "reoptdb/explain.hpp"
#include "reoptdb/ott.hpp"
#include "reoptdb/parser.hpp"
#include "reoptdb/reopt.hpp"
#include "reoptdb/serialize.hpp"

namespace reoptdb {

namespace detail {

inline std::uint64_t parse_seed_text(const std::string& text,
                                     const std::string& what) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0') {
    throw UsageError(what + " must be an unsigned integer, got '" + text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

// Seed precedence: explicit flag, then the REOPTDB_SEED environment
// variable, then zero.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("REOPTDB_SEED");
  if (env == nullptr || *env == '\0') return 0;
  return parse_seed_text(env, "REOPTDB_SEED");
}

inline std::vector<std::int64_t> parse_size_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string part = text.substr(pos, comma - pos);
    if (part.empty()) throw UsageError("--n: empty entry in size list");
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(part.c_str(), &end, 10);
    if (errno != 0 || end == part.c_str() || *end != '\0' || v < 1) {
      throw UsageError("--n: '" + part + "' is not a positive integer");
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

inline std::string render_trace(const ReoptReport& rep) {
  std::string out;
  for (std::size_t i = 0; i < rep.plans.size(); ++i) {
    out += "round " + std::to_string(i + 1) + ": plan " +
           encoding_text(rep.plans[i]);
    if (i < rep.costs_s.size()) {
      out += "  cost_under_final=" + format_number(rep.costs_s[i]);
    }
    if (i > 0 && i - 1 < rep.transformation_sequence.size()) {
      out += "  [";
      out += transformation_name(rep.transformation_sequence[i - 1]);
      out += "]";
    }
    out += "\n";
    if (i < rep.deltas.size()) {
      for (const auto& [key, value] : rep.deltas[i].cards) {
        out += "  validated " + key + " = " + format_number(value) + "\n";
      }
    }
  }
  out += "final: plan repeated after " + std::to_string(rep.iterations) +
         " optimizer calls (" +
         sequence_case_name(classify_sequence(rep.transformation_sequence)) +
         ")\n";
  for (const std::string& w : rep.warnings) {
    out += "warning: " + w + "\n";
  }
  return out;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv) {
  try {
    CLI::App app{
        "reoptdb: cost-based join optimization with sampling-based plan "
        "validation and re-optimization"};
    app.require_subcommand(1);

    // gen-ott ------------------------------------------------------------
    auto* gen = app.add_subcommand(
        "gen-ott", "Generate the adversarial benchmark tables into a catalog "
                   "directory");
    std::string gen_dir;
    OttConfig gen_cfg;
    gen_cfg.seed = detail::default_seed();
    gen->add_option("dir", gen_dir, "catalog directory to create")->required();
    gen->add_option("--tables", gen_cfg.tables, "number of tables");
    gen->add_option("--rows", gen_cfg.rows_per_table, "rows per table");
    gen->add_option("--per-value", gen_cfg.rows_per_value,
                    "occurrences of each value");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->callback([&] {
      Catalog cat;
      for (Relation& rel : generate_ott(gen_cfg)) {
        cat.add_relation(std::move(rel));
      }
      save_catalog(cat, gen_dir);
      std::cout << "wrote " << cat.relations.size() << " relations to "
                << gen_dir << "\n";
    });

    // analyze ------------------------------------------------------------
    auto* analyze = app.add_subcommand(
        "analyze", "Build column statistics for every relation in a catalog");
    std::string analyze_dir;
    int analyze_mcv = 100;
    int analyze_buckets = 100;
    analyze->add_option("dir", analyze_dir, "catalog directory")->required();
    analyze->add_option("--mcv", analyze_mcv, "most-common-value list size");
    analyze->add_option("--buckets", analyze_buckets,
                        "equi-depth histogram buckets");
    analyze->callback([&] {
      Catalog cat = open_catalog(analyze_dir);
      cat.analyze_all(analyze_mcv, analyze_buckets);
      save_catalog(cat, analyze_dir);
      std::cout << "analyzed " << cat.relations.size() << " relations\n";
    });

    // sample -------------------------------------------------------------
    auto* sample = app.add_subcommand(
        "sample", "Draw per-relation row samples used for plan validation");
    std::string sample_dir;
    double sample_fraction = kDefaultSampleFraction;
    std::uint64_t sample_seed = detail::default_seed();
    sample->add_option("dir", sample_dir, "catalog directory")->required();
    sample->add_option("--fraction", sample_fraction,
                       "sampling probability per row, in (0, 1]");
    sample->add_option("--seed", sample_seed, "sampling seed");
    sample->callback([&] {
      Catalog cat = open_catalog(sample_dir);
      cat.sample_all(sample_fraction, sample_seed);
      save_catalog(cat, sample_dir);
      std::cout << "sampled " << cat.samples.size() << " relations at fraction "
                << sample_fraction << "\n";
    });

    // shared query-command options ---------------------------------------
    struct QueryArgs {
      std::string dir;
      std::string query;
      bool left_deep = false;
      bool cross_products = false;
      bool hash_only = false;
      bool floor_empty = false;
      int max_iters = 64;
      bool as_json = false;
    };
    auto add_query_options = [](CLI::App* sub, QueryArgs& args,
                                bool with_loop_flags) {
      sub->add_option("dir", args.dir, "catalog directory")->required();
      sub->add_option("--query,-q", args.query, "SELECT COUNT(*) query text")
          ->required();
      sub->add_flag("--left-deep", args.left_deep,
                    "restrict plans to joins with a base relation on one side");
      sub->add_flag("--cross-products", args.cross_products,
                    "allow joins without a connecting predicate");
      sub->add_flag("--hash-only", args.hash_only,
                    "plan hash joins only (no nested loops)");
      if (with_loop_flags) {
        sub->add_flag("--floor-empty", args.floor_empty,
                      "treat sample-empty joins as one row instead of zero");
        sub->add_option("--max-iters", args.max_iters,
                        "safety bound on optimizer rounds");
      }
    };
    auto make_reopt_config = [](const QueryArgs& args) {
      ReoptConfig cfg;
      if (args.left_deep) cfg.optimizer.shape = TreeShape::LeftDeep;
      cfg.optimizer.allow_cross_products = args.cross_products;
      if (args.hash_only) cfg.optimizer.operators = {JoinAlgo::Hash};
      cfg.validation.floor_empty_to_one = args.floor_empty;
      cfg.max_iters = args.max_iters;
      return cfg;
    };

    // explain ------------------------------------------------------------
    auto* explain = app.add_subcommand(
        "explain", "Show the chosen plan with estimated cardinalities and "
                   "costs");
    QueryArgs explain_args;
    std::string explain_gamma_file;
    add_query_options(explain, explain_args, /*with_loop_flags=*/false);
    explain->add_option("--gamma", explain_gamma_file,
                        "JSON file of validated cardinalities to plan with");
    explain->add_flag("--json", explain_args.as_json, "emit JSON");
    explain->callback([&] {
      Catalog cat = open_catalog(explain_args.dir);
      QuerySpec q = parse_query(explain_args.query);
      CardMap validated;
      if (!explain_gamma_file.empty()) {
        std::ifstream in(explain_gamma_file);
        if (!in) {
          throw UsageError("cannot open gamma file '" + explain_gamma_file +
                           "'");
        }
        json j = json::parse(in, nullptr, true);
        validated = card_map_from_file_json(j);
      }
      ReoptConfig cfg = make_reopt_config(explain_args);
      PhysicalPlan plan = optimize(q, cat.stats, validated, cfg.optimizer);
      ExplainNode tree =
          build_explain(plan, q, cat.stats, validated, cfg.optimizer.cost);
      if (explain_args.as_json) {
        std::cout << explain_json(tree).dump(2) << "\n";
      } else {
        std::cout << render_explain(tree);
      }
    });

    // reopt --------------------------------------------------------------
    auto* reopt_cmd = app.add_subcommand(
        "reopt", "Run the optimize/validate loop to a fixed point and report "
                 "every round");
    QueryArgs reopt_args;
    bool reopt_trace = false;
    add_query_options(reopt_cmd, reopt_args, /*with_loop_flags=*/true);
    reopt_cmd->add_flag("--trace", reopt_trace,
                        "write a per-round narrative to stderr");
    reopt_cmd->callback([&] {
      Catalog cat = open_catalog(reopt_args.dir);
      QuerySpec q = parse_query(reopt_args.query);
      ReoptReport rep = reoptimize(q, cat, make_reopt_config(reopt_args));
      if (reopt_trace) std::cerr << detail::render_trace(rep);
      std::cout << reopt_report_json(rep).dump(2) << "\n";
    });

    // run ----------------------------------------------------------------
    auto* run_cmd = app.add_subcommand(
        "run", "Execute a query over the full data and report work done");
    QueryArgs run_args;
    std::string run_plan_mode = "reopt";
    bool run_no_short_circuit = false;
    add_query_options(run_cmd, run_args, /*with_loop_flags=*/true);
    run_cmd->add_option("--plan", run_plan_mode,
                        "which plan to execute: stats | reopt")
        ->check(CLI::IsMember({"stats", "reopt"}));
    run_cmd->add_flag("--no-short-circuit", run_no_short_circuit,
                      "evaluate both join inputs even when one is empty");
    run_cmd->callback([&] {
      Catalog cat = open_catalog(run_args.dir);
      QuerySpec q = parse_query(run_args.query);
      ReoptConfig cfg = make_reopt_config(run_args);
      PhysicalPlan plan;
      if (run_plan_mode == "stats") {
        plan = optimize(q, cat.stats, CardMap{}, cfg.optimizer);
      } else {
        ReoptReport rep = reoptimize(q, cat, cfg);
        plan = rep.plans.back();
      }
      Bindings full;
      for (const auto& [name, rel] : cat.relations) full[name] = &rel;
      ExecOptions opts;
      opts.short_circuit_empty = !run_no_short_circuit;
      ExecReport exec = execute(plan, full, opts);
      json out = exec_report_json(exec);
      out["plan"] = encoding_text(plan);
      std::cout << out.dump(2) << "\n";
    });

    // simulate-sn --------------------------------------------------------
    auto* sim = app.add_subcommand(
        "simulate-sn", "Expected validation rounds for the queue model: "
                       "closed form and Monte Carlo");
    std::string sim_sizes = "10,100,400,1000";
    std::int64_t sim_trials = 10000;
    std::uint64_t sim_seed = detail::default_seed();
    bool sim_json = false;
    sim->add_option("--n", sim_sizes, "comma-separated queue sizes");
    sim->add_option("--trials", sim_trials, "Monte Carlo trials per size");
    sim->add_option("--seed", sim_seed, "simulation seed");
    sim->add_flag("--json", sim_json, "emit JSON instead of CSV");
    sim->callback([&] {
      std::vector<std::int64_t> sizes = detail::parse_size_list(sim_sizes);
      json rows = json::array();
      std::string csv =
          "n,expected_steps,rounded,simulated_mean,simulated_stderr,"
          "sqrt_ratio\n";
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        std::int64_t n = sizes[i];
        double exact = expected_steps(n);
        StepsEstimate mc = simulate_steps(
            n, sim_trials,
            detail::mix64(sim_seed, static_cast<std::uint64_t>(i)));
        double ratio = exact / std::sqrt(static_cast<double>(n));
        if (sim_json) {
          rows.push_back({{"n", n},
                          {"expected_steps", exact},
                          {"rounded", round_half_up(exact)},
                          {"simulated_mean", mc.mean},
                          {"simulated_stderr", mc.stderr_of_mean},
                          {"trials", mc.trials},
                          {"sqrt_ratio", ratio}});
        } else {
          char line[256];
          std::snprintf(line, sizeof(line),
                        "%lld,%.10g,%lld,%.10g,%.6g,%.10g\n",
                        static_cast<long long>(n), exact,
                        static_cast<long long>(round_half_up(exact)), mc.mean,
                        mc.stderr_of_mean, ratio);
          csv += line;
        }
      }
      if (sim_json) {
        std::cout << json{{"schema_version", kReportSchemaVersion},
                          {"trials", sim_trials},
                          {"rows", std::move(rows)}}
                         .dump(2)
                  << "\n";
      } else {
        std::cout << csv;
      }
    });

    // bench-ott ----------------------------------------------------------
    auto* bench = app.add_subcommand(
        "bench-ott", "Generate the benchmark in memory, run every query with "
                     "and without re-optimization, and compare work done");
    OttBenchConfig bench_cfg;
    bench_cfg.data.seed = detail::default_seed();
    bool bench_left_deep = false;
    bool bench_floor_empty = false;
    bool bench_hash_only = false;
    bench->add_option("--tables", bench_cfg.data.tables, "number of tables");
    bench->add_option("--rows", bench_cfg.data.rows_per_table,
                      "rows per table");
    bench->add_option("--per-value", bench_cfg.data.rows_per_value,
                      "occurrences of each value");
    bench->add_option("--seed", bench_cfg.data.seed, "data generator seed");
    bench->add_option("--n-join", bench_cfg.n_join, "joins per query");
    bench->add_option("--m", bench_cfg.m, "selections per constant group");
    bench->add_option("--fraction", bench_cfg.sample_fraction,
                      "sampling probability per row");
    bench->add_option("--sample-seed", bench_cfg.sample_seed, "sampling seed");
    bench->add_option("--max-iters", bench_cfg.reopt.max_iters,
                      "safety bound on optimizer rounds");
    bench->add_flag("--left-deep", bench_left_deep,
                    "restrict plans to joins with a base relation on one side");
    bench->add_flag("--floor-empty", bench_floor_empty,
                    "treat sample-empty joins as one row instead of zero");
    bench->add_flag("--hash-only", bench_hash_only,
                    "plan hash joins only (no nested loops)");
    bench->callback([&] {
      if (bench_left_deep) {
        bench_cfg.reopt.optimizer.shape = TreeShape::LeftDeep;
      }
      if (bench_hash_only) {
        bench_cfg.reopt.optimizer.operators = {JoinAlgo::Hash};
      }
      bench_cfg.reopt.validation.floor_empty_to_one = bench_floor_empty;
      OttBenchResult res = run_ott_bench(bench_cfg);
      std::cout << ott_bench_json(res).dump(2) << "\n";
    });

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace reoptdb
