#include "optlab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace optlab {

double improvement_ratio(double t_rewrite_only, double t_naive, double t_contender) {
  return (t_naive - t_contender) / (t_naive - t_rewrite_only);
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double timed_optimize_ms(const QueryTree& resolved, const Catalog& cat, Mode mode,
                         bool corrupt_cache, std::string* digest_out) {
  QueryTree tree = clone_tree(resolved);
  OptimizerSession session(cat, mode);
  if (corrupt_cache) session.cache().set_corrupt_inserted_costs(true);
  auto t0 = std::chrono::steady_clock::now();
  OptimizeResult result = optimize_tree(std::move(tree), session);
  auto t1 = std::chrono::steady_clock::now();
  if (digest_out) *digest_out = result.digest;
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

// Mean of the later half of the repetitions; early ones warm caches and
// allocator pools and would inflate the spread.
double settled_mean(std::vector<double> samples) {
  size_t keep = (samples.size() + 1) / 2;
  double sum = 0.0;
  for (size_t i = samples.size() - keep; i < samples.size(); ++i) sum += samples[i];
  return sum / static_cast<double>(keep);
}

std::optional<double> guarded_ratio(double t_off, double t_naive, double t_contender) {
  if (!(t_naive - t_off > 0.0)) return std::nullopt;
  return improvement_ratio(t_off, t_naive, t_contender);
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string fmt_ratio(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

BenchReport run_suite(const BenchConfig& config) {
  Catalog cat = load_catalog(config.catalog_path);

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config.queries_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".sql") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  BenchReport report;
  report.total.query_id = "Total";
  int reps = std::max(1, config.reps);

  for (const auto& file : files) {
    QueryResult row;
    row.query_id = file.stem().string();
    try {
      QueryTree resolved = analyze_query(read_file(file.string()), cat);

      struct ModeSlot {
        Mode mode;
        double* time;
        std::string* digest;
      };
      ModeSlot slots[] = {
          {Mode::Off, &row.t_off, nullptr},
          {Mode::Naive, &row.t_naive, &row.digest_naive},
          {Mode::Cache, &row.t_cache, &row.digest_cache},
          {Mode::CacheGuess, &row.t_cache_guess, &row.digest_cache_guess},
      };
      for (auto& slot : slots) {
        std::vector<double> samples;
        samples.reserve(static_cast<size_t>(reps));
        for (int r = 0; r < reps; ++r)
          samples.push_back(
              timed_optimize_ms(resolved, cat, slot.mode, config.corrupt_cache, slot.digest));
        *slot.time = settled_mean(std::move(samples));
      }
      row.ratio_cache = guarded_ratio(row.t_off, row.t_naive, row.t_cache);
      row.ratio_cache_guess = guarded_ratio(row.t_off, row.t_naive, row.t_cache_guess);

      report.total.t_off += row.t_off;
      report.total.t_naive += row.t_naive;
      report.total.t_cache += row.t_cache;
      report.total.t_cache_guess += row.t_cache_guess;
    } catch (const std::exception& e) {
      // A failing query gets an error row; the rest of the suite proceeds.
      row = QueryResult{};
      row.query_id = file.stem().string();
      row.error = e.what();
      for (char& c : row.error)
        if (c == '\t' || c == '\n') c = ' ';
    }
    report.rows.push_back(std::move(row));
  }

  report.total.ratio_cache =
      guarded_ratio(report.total.t_off, report.total.t_naive, report.total.t_cache);
  report.total.ratio_cache_guess =
      guarded_ratio(report.total.t_off, report.total.t_naive, report.total.t_cache_guess);
  return report;
}

std::string report_to_tsv(const BenchReport& report) {
  std::ostringstream os;
  os << "query\tI\tII\tIII\tIV\tV\tVI\t"
        "digest_naive\tdigest_cache\tdigest_cache_guess\terror\n";
  auto emit = [&](const QueryResult& r) {
    os << r.query_id << "\t" << fmt(r.t_off) << "\t" << fmt(r.t_naive) << "\t" << fmt(r.t_cache)
       << "\t" << fmt_ratio(r.ratio_cache) << "\t" << fmt(r.t_cache_guess) << "\t"
       << fmt_ratio(r.ratio_cache_guess) << "\t" << r.digest_naive << "\t" << r.digest_cache
       << "\t" << r.digest_cache_guess << "\t" << r.error << "\n";
  };
  for (const auto& r : report.rows) emit(r);
  emit(report.total);
  return os.str();
}

BenchReport report_from_tsv(const std::string& text) {
  BenchReport report;
  report.total.query_id = "Total";
  std::istringstream is(text);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() != 11) throw std::runtime_error("malformed report row: " + line);
    QueryResult r;
    r.query_id = cols[0];
    r.t_off = std::stod(cols[1]);
    r.t_naive = std::stod(cols[2]);
    r.t_cache = std::stod(cols[3]);
    if (cols[4] != "-") r.ratio_cache = std::stod(cols[4]);
    r.t_cache_guess = std::stod(cols[5]);
    if (cols[6] != "-") r.ratio_cache_guess = std::stod(cols[6]);
    r.digest_naive = cols[7];
    r.digest_cache = cols[8];
    r.digest_cache_guess = cols[9];
    r.error = cols[10];
    if (r.query_id == "Total")
      report.total = std::move(r);
    else
      report.rows.push_back(std::move(r));
  }
  return report;
}

void write_report(const BenchReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << report_to_tsv(report);
}

BenchReport read_report(const std::string& path) { return report_from_tsv(read_file(path)); }

VerifyResult verify_plan_equality(const BenchReport& report) {
  VerifyResult result;
  for (const auto& r : report.rows) {
    if (!r.error.empty()) continue;
    if (r.digest_naive.empty() && r.digest_cache.empty() && r.digest_cache_guess.empty()) continue;
    if (r.digest_naive == r.digest_cache && r.digest_naive == r.digest_cache_guess) continue;
    result.ok = false;
    result.mismatches.push_back(r.query_id + ": naive=" + r.digest_naive +
                                " cache=" + r.digest_cache +
                                " cache_guess=" + r.digest_cache_guess);
  }
  return result;
}

}  // namespace optlab
