#pragma once

#include <cmath>
#include <cstdint>

namespace optlab {

// Planner cost parameters. Page costs are in units of one sequential page
// read; CPU terms are fractions of that.
struct CostParams {
  double seq_page_cost = 1.0;
  double random_page_cost = 4.0;
  double cpu_tuple_cost = 0.01;
  double cpu_operator_cost = 0.0025;
  double hash_build_cost_per_row = 0.015;
  double work_mem_bytes = 4.0 * 1024.0 * 1024.0;
};

// startup: cost before the first row can be produced.
// total: cost to produce all rows. Invariant: 0 <= startup <= total.
struct Cost {
  double startup = 0.0;
  double total = 0.0;
};

// Total, then startup as tie-break.
inline bool cost_less(const Cost& a, const Cost& b) {
  if (a.total != b.total) return a.total < b.total;
  return a.startup < b.startup;
}

inline double log2_at_least_one(double n) { return std::log2(n < 2.0 ? 2.0 : n); }

// Cost of sorting n_rows already-costed input; the sort is blocking, so
// everything but row emission lands in startup.
inline Cost cost_sort(const CostParams& p, const Cost& input, double n_rows) {
  Cost c;
  double cmp = n_rows * log2_at_least_one(n_rows) * p.cpu_operator_cost;
  c.startup = input.total + cmp;
  c.total = c.startup + n_rows * p.cpu_operator_cost;
  return c;
}

// Hash aggregation / duplicate elimination over in_rows, producing
// out_groups. The hash table doubles its per-row cost once the grouped
// output no longer fits in work_mem.
inline Cost cost_hash_groups(const CostParams& p, const Cost& input, double in_rows,
                             double out_groups, int out_width) {
  Cost c;
  double spill_mult = out_groups * out_width > p.work_mem_bytes ? 2.0 : 1.0;
  c.startup = input.total + in_rows * (p.cpu_tuple_cost + p.hash_build_cost_per_row) * spill_mult;
  c.total = c.startup + out_groups * p.cpu_tuple_cost;
  return c;
}

// Single-group aggregation (no GROUP BY).
inline Cost cost_plain_agg(const CostParams& p, const Cost& input, double in_rows, int n_aggs) {
  Cost c;
  c.startup = input.total + in_rows * p.cpu_operator_cost * (n_aggs < 1 ? 1 : n_aggs);
  c.total = c.startup + p.cpu_tuple_cost;
  return c;
}

// LIMIT scales only the run cost: rows already paid for in startup stay paid.
inline Cost cost_limit(const CostParams& p, const Cost& input, double in_rows, double limit) {
  (void)p;
  double frac = in_rows <= 0 ? 1.0 : limit / in_rows;
  if (frac > 1.0) frac = 1.0;
  Cost c;
  c.startup = input.startup;
  c.total = input.startup + (input.total - input.startup) * frac;
  return c;
}

}  // namespace optlab
