#pragma once

#include <optional>

#include "optlab/ir.hpp"

namespace optlab {

// Sketch-based set arithmetic. Intersection uses inclusion-exclusion over a
// merged sketch and is clamped to [0, min of the operands].
double estimate_union(const HllSketch& a, const HllSketch& b);
double estimate_intersection(const HllSketch& a, const HllSketch& b);

// Fraction of near-losslessness required for eager aggregation to be
// predicted a winner.
constexpr double kNearLosslessThreshold = 0.9;

// Planner-free winner predictions for the cost-based rules: true = the
// rewritten form is predicted cheaper, false = the original. nullopt = no
// basis to predict (missing sketches).

// Subquery merge: a correlated subquery is rescanned per outer row, so the
// merge is predicted to win outright; for uncorrelated ones the merge only
// loses when the duplicate-eliminating hash over the join output spills.
std::optional<bool> guess_subquery_merge(const QueryBlock& original, int sublink_id,
                                         const Catalog& cat, double work_mem_bytes);

// Eager aggregation: predicted to win when the aggregation-side join key
// survives the join near-losslessly, measured as
// est(A intersect B) / est(A) >= threshold over the key column sketches.
std::optional<bool> guess_eager_agg(const QueryBlock& original, int agg_side_rti, int agg_side_col,
                                    int other_side_rti, int other_side_col, const Catalog& cat);

}  // namespace optlab
