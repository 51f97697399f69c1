#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optlab/driver.hpp"

namespace optlab {

// (naive - contender) / (naive - rewrite_only): the fraction of the
// optimization-time overhead of naive cost-based rewriting that the
// contender eliminates. May be negative.
double improvement_ratio(double t_rewrite_only, double t_naive, double t_contender);

struct BenchConfig {
  std::string catalog_path;
  std::string queries_dir;
  std::string out_path;
  int reps = 6;
  bool corrupt_cache = false;
};

struct QueryResult {
  std::string query_id;
  // Mean wall time (ms) of the later half of the repetitions, per mode.
  double t_off = 0.0;
  double t_naive = 0.0;
  double t_cache = 0.0;
  double t_cache_guess = 0.0;
  std::optional<double> ratio_cache;        // column IV
  std::optional<double> ratio_cache_guess;  // column VI
  std::string digest_naive;
  std::string digest_cache;
  std::string digest_cache_guess;
  std::string error;  // nonempty when the query failed; other rows unaffected
};

struct BenchReport {
  std::vector<QueryResult> rows;
  QueryResult total;  // summed times, ratios over the sums
};

BenchReport run_suite(const BenchConfig& config);

std::string report_to_tsv(const BenchReport& report);
BenchReport report_from_tsv(const std::string& text);
void write_report(const BenchReport& report, const std::string& path);
BenchReport read_report(const std::string& path);

struct VerifyResult {
  bool ok = true;
  std::vector<std::string> mismatches;  // one line per disagreeing query
};

// Plan-equality check across the cost-based modes (naive, cache,
// cache_guess); the heuristic-only mode legitimately differs and is skipped.
VerifyResult verify_plan_equality(const BenchReport& report);

}  // namespace optlab
