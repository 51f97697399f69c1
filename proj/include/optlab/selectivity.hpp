#pragma once

#include "optlab/catalog.hpp"
#include "optlab/ir.hpp"

namespace optlab {

constexpr double kMinSelectivity = 1e-7;
constexpr double kDefaultSelectivity = 1.0 / 3.0;

// Per-column statistics resolved through subquery boundaries: a subquery
// output column that is a plain pass-through inherits the base column's
// stats; anything else gets defaults.
struct ColumnInfo {
  double ndv = 200.0;
  double null_frac = 0.0;
  std::optional<Datum> min_value;
  std::optional<Datum> max_value;
  const HllSketch* sketch = nullptr;
  DataType type = DataType::Int;
};

ColumnInfo column_info(const QueryBlock& b, const Catalog& cat, int rti, int col);

// Selectivity of one predicate expression evaluated within its block.
// Conjunctions multiply, disjunctions add with overlap correction; the
// result is clamped to [kMinSelectivity, 1].
double estimate_selectivity(const Expr& e, const QueryBlock& b, const Catalog& cat);

double clamp_selectivity(double s);

// Distinct-group estimate for a set of key expressions, capped by in_rows.
double estimate_groups(const std::vector<const Expr*>& keys, const QueryBlock& b, const Catalog& cat,
                       double in_rows);

}  // namespace optlab
