#include "optlab/guess.hpp"

#include <algorithm>

#include "optlab/planner.hpp"
#include "optlab/selectivity.hpp"

namespace optlab {

double estimate_union(const HllSketch& a, const HllSketch& b) {
  HllSketch merged = a;
  merged.merge(b);
  return merged.estimate();
}

double estimate_intersection(const HllSketch& a, const HllSketch& b) {
  double ea = a.estimate();
  double eb = b.estimate();
  double inter = ea + eb - estimate_union(a, b);
  return std::clamp(inter, 0.0, std::min(ea, eb));
}

namespace {

bool block_is_correlated(const QueryBlock& b, int depth) {
  bool found = false;
  auto scan = [&](const Expr& e) {
    walk_expr(e, [&](const Expr& n) {
      if (n.op == ExprOp::ColumnRef && n.levels_up > depth) found = true;
    });
  };
  for (const auto& q : b.quals) scan(*q.expr);
  for (const auto& j : b.sjinfos)
    for (const auto& q : j.quals) scan(*q.expr);
  for (const auto& sl : b.sublinks)
    if (sl.test_expr) scan(*sl.test_expr);
  for (const auto& t : b.targets) scan(*t.expr);
  for (const auto& g : b.group_by) scan(*g);
  for (const auto& o : b.order_by) scan(*o.expr);
  if (found) return true;
  for (const auto& rte : b.rtes)
    if (!rte.is_base() && block_is_correlated(*rte.subquery, depth + 1)) return true;
  for (const auto& sl : b.sublinks)
    if (block_is_correlated(*sl.child, depth + 1)) return true;
  return false;
}

}  // namespace

std::optional<bool> guess_subquery_merge(const QueryBlock& original, int sublink_id,
                                         const Catalog& cat, double work_mem_bytes) {
  const Sublink& sl = original.sublinks.at(static_cast<size_t>(sublink_id));
  if (!sl.child) return std::nullopt;

  // Rescanning a correlated subquery per outer row dwarfs everything the
  // merged form could cost.
  if (block_is_correlated(*sl.child, 0)) return true;

  // Uncorrelated: the merged form pays a duplicate-eliminating hash over the
  // join output; it is predicted to lose only when that hash spills.
  double outer_rows = estimate_rel_set_rows(original, cat, original.all_rels());
  double inner_rows = estimate_block_rows(*sl.child, cat);

  double sel = kDefaultSelectivity;
  if (sl.test_expr && sl.test_expr->op == ExprOp::ColumnRef && sl.test_expr->levels_up == 0) {
    double ndv_outer = column_info(original, cat, sl.test_expr->rti, sl.test_expr->col).ndv;
    double ndv_inner = 200.0;
    if (!sl.child->targets.empty()) {
      const Expr& te = *sl.child->targets[0].expr;
      if (te.op == ExprOp::ColumnRef && te.levels_up == 0)
        ndv_inner = column_info(*sl.child, cat, te.rti, te.col).ndv;
    }
    sel = 1.0 / std::max(1.0, std::max(ndv_outer, ndv_inner));
  }

  double join_rows = std::max(1.0, outer_rows * inner_rows * sel);
  int width = 0;
  for (const auto& t : original.targets)
    width += data_type_width(expr_type(*t.expr, original, cat));
  if (width <= 0) width = 4;

  bool spills = join_rows * width > work_mem_bytes;
  return !spills;
}

std::optional<bool> guess_eager_agg(const QueryBlock& original, int agg_side_rti, int agg_side_col,
                                    int other_side_rti, int other_side_col, const Catalog& cat) {
  ColumnInfo agg_info = column_info(original, cat, agg_side_rti, agg_side_col);
  ColumnInfo other_info = column_info(original, cat, other_side_rti, other_side_col);
  if (!agg_info.sketch || !other_info.sketch) return std::nullopt;
  if (agg_info.sketch->precision() != other_info.sketch->precision() ||
      agg_info.sketch->seed() != other_info.sketch->seed())
    return std::nullopt;

  double ea = agg_info.sketch->estimate();
  if (ea <= 0.0) return std::nullopt;
  double f = estimate_intersection(*agg_info.sketch, *other_info.sketch) / ea;
  return f >= kNearLosslessThreshold;
}

}  // namespace optlab
