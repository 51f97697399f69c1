#include "optlab/selectivity.hpp"

#include <algorithm>
#include <cmath>

namespace optlab {

double clamp_selectivity(double s) {
  if (!(s > kMinSelectivity)) return kMinSelectivity;
  if (s > 1.0) return 1.0;
  return s;
}

ColumnInfo column_info(const QueryBlock& b, const Catalog& cat, int rti, int col) {
  const RangeTableEntry& rte = b.rte(rti);
  if (rte.is_base()) {
    const ColumnStats& cs = cat.table_by_oid(rte.oid).column(col);
    ColumnInfo info;
    info.ndv = cs.ndv;
    info.null_frac = cs.null_frac;
    info.min_value = cs.min_value;
    info.max_value = cs.max_value;
    info.sketch = cs.sketch ? &*cs.sketch : nullptr;
    info.type = cs.type;
    return info;
  }
  const QueryBlock& child = *rte.subquery;
  const TargetEntry& t = child.targets.at(static_cast<size_t>(col));
  if (t.expr->op == ExprOp::ColumnRef && t.expr->levels_up == 0)
    return column_info(child, cat, t.expr->rti, t.expr->col);
  ColumnInfo info;
  info.type = t.type;
  if (t.expr->op == ExprOp::Literal) info.ndv = 1.0;
  return info;
}

namespace {

struct SideInfo {
  bool is_local_column = false;  // plain level-0 ColumnRef
  int rti = -1;
  int col = -1;
  bool is_literal = false;
  Datum literal;
};

SideInfo classify(const Expr& e) {
  SideInfo s;
  if (e.op == ExprOp::ColumnRef && e.levels_up == 0) {
    s.is_local_column = true;
    s.rti = e.rti;
    s.col = e.col;
  } else if (e.op == ExprOp::Literal) {
    s.is_literal = true;
    s.literal = e.value;
  }
  return s;
}

// Fraction of the column's [min, max] span that satisfies `col <op> lit`,
// by linear interpolation; default when the span is unknown or degenerate.
double range_fraction(const ColumnInfo& info, BinOpKind op, const Datum& lit) {
  if (!info.min_value || !info.max_value) return kDefaultSelectivity;
  double lo = info.min_value->as_double();
  double hi = info.max_value->as_double();
  double v = lit.as_double();
  if (!(hi > lo)) return kDefaultSelectivity;
  double frac = (v - lo) / (hi - lo);
  if (frac < 0.0) frac = 0.0;
  if (frac > 1.0) frac = 1.0;
  switch (op) {
    case BinOpKind::Lt:
    case BinOpKind::Le: return frac;
    case BinOpKind::Gt:
    case BinOpKind::Ge: return 1.0 - frac;
    default: return kDefaultSelectivity;
  }
}

}  // namespace

double estimate_selectivity(const Expr& e, const QueryBlock& b, const Catalog& cat) {
  switch (e.op) {
    case ExprOp::BinOp: {
      switch (e.bin) {
        case BinOpKind::And:
          return clamp_selectivity(estimate_selectivity(*e.children[0], b, cat) *
                                   estimate_selectivity(*e.children[1], b, cat));
        case BinOpKind::Or: {
          double s1 = estimate_selectivity(*e.children[0], b, cat);
          double s2 = estimate_selectivity(*e.children[1], b, cat);
          return clamp_selectivity(s1 + s2 - s1 * s2);
        }
        case BinOpKind::Eq: {
          SideInfo l = classify(*e.children[0]);
          SideInfo r = classify(*e.children[1]);
          if (l.is_local_column && r.is_local_column) {
            ColumnInfo li = column_info(b, cat, l.rti, l.col);
            ColumnInfo ri = column_info(b, cat, r.rti, r.col);
            return clamp_selectivity(1.0 / std::max(li.ndv, ri.ndv));
          }
          if (l.is_local_column || r.is_local_column) {
            const SideInfo& c = l.is_local_column ? l : r;
            ColumnInfo info = column_info(b, cat, c.rti, c.col);
            return clamp_selectivity(1.0 / info.ndv);
          }
          return kDefaultSelectivity;
        }
        case BinOpKind::Ne: {
          SideInfo l = classify(*e.children[0]);
          SideInfo r = classify(*e.children[1]);
          const SideInfo* c = l.is_local_column ? &l : r.is_local_column ? &r : nullptr;
          if (!c) return kDefaultSelectivity;
          ColumnInfo info = column_info(b, cat, c->rti, c->col);
          return clamp_selectivity(1.0 - 1.0 / info.ndv);
        }
        case BinOpKind::Lt:
        case BinOpKind::Le:
        case BinOpKind::Gt:
        case BinOpKind::Ge: {
          SideInfo l = classify(*e.children[0]);
          SideInfo r = classify(*e.children[1]);
          if (l.is_local_column && r.is_literal) {
            ColumnInfo info = column_info(b, cat, l.rti, l.col);
            return clamp_selectivity(range_fraction(info, e.bin, r.literal));
          }
          if (r.is_local_column && l.is_literal) {
            // Mirror the comparison so the column is on the left.
            BinOpKind flipped = e.bin == BinOpKind::Lt   ? BinOpKind::Gt
                                : e.bin == BinOpKind::Le ? BinOpKind::Ge
                                : e.bin == BinOpKind::Gt ? BinOpKind::Lt
                                                         : BinOpKind::Le;
            ColumnInfo info = column_info(b, cat, r.rti, r.col);
            return clamp_selectivity(range_fraction(info, flipped, l.literal));
          }
          return kDefaultSelectivity;
        }
        default:
          return kDefaultSelectivity;
      }
    }
    case ExprOp::InList: {
      SideInfo needle = classify(*e.children[0]);
      double k = static_cast<double>(e.children.size() - 1);
      if (!needle.is_local_column) return clamp_selectivity(k * kDefaultSelectivity * 0.1);
      ColumnInfo info = column_info(b, cat, needle.rti, needle.col);
      return clamp_selectivity(k / info.ndv);
    }
    case ExprOp::Literal:
    case ExprOp::ColumnRef:
    case ExprOp::AggCall:
    case ExprOp::SublinkRef:
      return kDefaultSelectivity;
  }
  return kDefaultSelectivity;
}

double estimate_groups(const std::vector<const Expr*>& keys, const QueryBlock& b, const Catalog& cat,
                       double in_rows) {
  if (in_rows < 1.0) in_rows = 1.0;
  double groups = 1.0;
  for (const Expr* k : keys) {
    double ndv;
    if (k->op == ExprOp::ColumnRef && k->levels_up == 0)
      ndv = column_info(b, cat, k->rti, k->col).ndv;
    else if (k->op == ExprOp::Literal)
      ndv = 1.0;
    else
      ndv = std::max(1.0, in_rows / 10.0);
    groups *= ndv;
    if (groups > in_rows) return in_rows;
  }
  return std::min(groups, in_rows);
}

}  // namespace optlab
