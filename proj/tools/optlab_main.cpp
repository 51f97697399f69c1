#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "optlab/bench.hpp"
#include "optlab/driver.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_plan(const std::string& catalog_path, const std::string& query_path,
             const std::string& mode_arg, bool show_explain, bool show_stats) {
  auto mode = optlab::mode_from_name(mode_arg);
  if (!mode) {
    std::cerr << "error: unknown mode '" << mode_arg << "'\n";
    return 1;
  }
  optlab::Catalog cat = optlab::load_catalog(catalog_path);
  optlab::QueryTree tree = optlab::analyze_query(read_file(query_path), cat);
  optlab::OptimizerSession session(cat, *mode);
  optlab::OptimizeResult result = optlab::optimize_tree(std::move(tree), session);

  std::printf("mode: %s\n", optlab::mode_name(*mode));
  std::printf("digest: %s\n", result.digest.c_str());
  std::printf("cost: %.2f..%.2f\n", result.plan->cost.startup, result.plan->cost.total);
  std::printf("rows: %.0f\n", result.est_rows);
  std::fputs(optlab::decision_log_tsv(result.decisions).c_str(), stdout);
  if (show_explain) std::fputs(result.explain_text.c_str(), stdout);
  if (show_stats) {
    const optlab::Counters& c = result.counters;
    std::printf("planner_entries: %lld\n", static_cast<long long>(c.cbo_invocations));
    std::printf("rewrite_planner_entries: %lld\n", static_cast<long long>(c.qrw_cbo_invocations));
    std::printf("cost_path_calls: %lld\n", static_cast<long long>(c.cost_path_calls));
    std::printf("paths_constructed: %lld\n", static_cast<long long>(c.paths_constructed));
    std::printf("prune_events: %lld\n", static_cast<long long>(c.prune_events));
    std::fputs(result.cache_report.c_str(), stdout);
  }
  return 0;
}

int run_bench(const optlab::BenchConfig& config) {
  optlab::BenchReport report = optlab::run_suite(config);
  if (!config.out_path.empty()) optlab::write_report(report, config.out_path);
  std::fputs(optlab::report_to_tsv(report).c_str(), stdout);
  for (const auto& row : report.rows)
    if (!row.error.empty()) std::cerr << "query " << row.query_id << " failed: " << row.error << "\n";
  return 0;
}

int run_verify(const std::string& report_path) {
  optlab::BenchReport report = optlab::read_report(report_path);
  optlab::VerifyResult v = optlab::verify_plan_equality(report);
  if (v.ok) {
    std::printf("plan equality: ok (%zu queries)\n", report.rows.size());
    return 0;
  }
  for (const auto& m : v.mismatches) std::printf("mismatch %s\n", m.c_str());
  std::printf("plan equality: FAILED (%zu of %zu queries)\n", v.mismatches.size(),
              report.rows.size());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cost-based rewrite workbench"};
  app.require_subcommand(1);

  std::string plan_catalog, plan_query, plan_mode = "cache-guess";
  bool show_explain = false, show_stats = false;
  CLI::App* plan_cmd = app.add_subcommand("plan", "optimize a single query");
  plan_cmd->add_option("--catalog", plan_catalog, "catalog JSON file")->required();
  plan_cmd->add_option("--query", plan_query, "SQL query file")->required();
  plan_cmd->add_option("--mode", plan_mode, "off|naive|cache|cache-guess|guess-only");
  plan_cmd->add_flag("--explain", show_explain, "print the plan tree");
  plan_cmd->add_flag("--stats", show_stats, "print work counters and cache report");

  optlab::BenchConfig bench_config;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run a query corpus under all modes");
  bench_cmd->add_option("--catalog", bench_config.catalog_path, "catalog JSON file")->required();
  bench_cmd->add_option("--queries", bench_config.queries_dir, "directory of .sql files")->required();
  bench_cmd->add_option("--reps", bench_config.reps, "repetitions per query and mode");
  bench_cmd->add_option("--out", bench_config.out_path, "report TSV output path");
  bench_cmd->add_flag("--corrupt-cache", bench_config.corrupt_cache,
                      "fault injection: scale cached costs to provoke mismatches");

  std::string verify_report;
  CLI::App* verify_cmd = app.add_subcommand("verify", "check cross-mode plan equality");
  verify_cmd->add_option("--report", verify_report, "report TSV from bench")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) return run_plan(plan_catalog, plan_query, plan_mode, show_explain, show_stats);
    if (bench_cmd->parsed()) return run_bench(bench_config);
    if (verify_cmd->parsed()) return run_verify(verify_report);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
