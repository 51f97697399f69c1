#include "optlab/expr.hpp"

namespace optlab {

const char* bin_op_token(BinOpKind k) {
  switch (k) {
    case BinOpKind::Eq: return "=";
    case BinOpKind::Ne: return "<>";
    case BinOpKind::Lt: return "<";
    case BinOpKind::Le: return "<=";
    case BinOpKind::Gt: return ">";
    case BinOpKind::Ge: return ">=";
    case BinOpKind::Add: return "+";
    case BinOpKind::Sub: return "-";
    case BinOpKind::Mul: return "*";
    case BinOpKind::And: return "and";
    case BinOpKind::Or: return "or";
  }
  return "?";
}

const char* agg_kind_name(AggKind k) {
  switch (k) {
    case AggKind::Sum: return "sum";
    case AggKind::Count: return "count";
    case AggKind::Min: return "min";
    case AggKind::Max: return "max";
  }
  return "?";
}

ExprPtr make_column(int rti, int col, int levels_up) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::ColumnRef;
  e->rti = rti;
  e->col = col;
  e->levels_up = levels_up;
  return e;
}

ExprPtr make_literal(Datum v) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::Literal;
  e->value = std::move(v);
  return e;
}

ExprPtr make_bin(BinOpKind k, ExprPtr lhs, ExprPtr rhs) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::BinOp;
  e->bin = k;
  e->children.push_back(std::move(lhs));
  e->children.push_back(std::move(rhs));
  return e;
}

ExprPtr make_in_list(ExprPtr needle, std::vector<ExprPtr> items) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::InList;
  e->children.push_back(std::move(needle));
  for (auto& it : items) e->children.push_back(std::move(it));
  return e;
}

ExprPtr make_agg(AggKind k, ExprPtr arg) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::AggCall;
  e->agg = k;
  if (arg) e->children.push_back(std::move(arg));
  return e;
}

ExprPtr make_sublink_ref(int sublink_id) {
  auto e = std::make_unique<Expr>();
  e->op = ExprOp::SublinkRef;
  e->sublink_id = sublink_id;
  return e;
}

ExprPtr clone_expr(const Expr& e) {
  auto out = std::make_unique<Expr>();
  out->op = e.op;
  out->rti = e.rti;
  out->col = e.col;
  out->levels_up = e.levels_up;
  out->value = e.value;
  out->bin = e.bin;
  out->agg = e.agg;
  out->sublink_id = e.sublink_id;
  out->children.reserve(e.children.size());
  for (const auto& c : e.children) out->children.push_back(clone_expr(*c));
  return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.op != b.op || a.children.size() != b.children.size()) return false;
  switch (a.op) {
    case ExprOp::ColumnRef:
      if (a.rti != b.rti || a.col != b.col || a.levels_up != b.levels_up) return false;
      break;
    case ExprOp::Literal:
      if (!(a.value == b.value)) return false;
      break;
    case ExprOp::BinOp:
      if (a.bin != b.bin) return false;
      break;
    case ExprOp::InList:
      break;
    case ExprOp::AggCall:
      if (a.agg != b.agg) return false;
      break;
    case ExprOp::SublinkRef:
      if (a.sublink_id != b.sublink_id) return false;
      break;
  }
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!expr_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

uint64_t expr_hash(const Expr& e, uint64_t seed) {
  uint64_t h = mix64(seed ^ static_cast<uint64_t>(e.op));
  switch (e.op) {
    case ExprOp::ColumnRef:
      h = hash_combine(h, static_cast<uint64_t>(e.rti) << 32 | static_cast<uint32_t>(e.col));
      h = hash_combine(h, static_cast<uint64_t>(e.levels_up));
      break;
    case ExprOp::Literal: h = hash_combine(h, datum_hash(e.value, seed)); break;
    case ExprOp::BinOp: h = hash_combine(h, static_cast<uint64_t>(e.bin)); break;
    case ExprOp::InList: break;
    case ExprOp::AggCall: h = hash_combine(h, static_cast<uint64_t>(e.agg)); break;
    case ExprOp::SublinkRef: h = hash_combine(h, static_cast<uint64_t>(e.sublink_id)); break;
  }
  for (const auto& c : e.children) h = hash_combine(h, expr_hash(*c, seed));
  return h;
}

ExprRefs collect_refs(const Expr& e) {
  ExprRefs refs;
  walk_expr(e, [&](const Expr& n) {
    if (n.op == ExprOp::ColumnRef) {
      if (n.levels_up == 0)
        refs.rels = rel_set_add(refs.rels, n.rti);
      else
        refs.has_outer_ref = true;
    } else if (n.op == ExprOp::SublinkRef) {
      refs.has_sublink = true;
    } else if (n.op == ExprOp::AggCall) {
      refs.has_agg = true;
    }
  });
  return refs;
}

void walk_expr(Expr& e, const std::function<void(Expr&)>& fn) {
  fn(e);
  for (auto& c : e.children) walk_expr(*c, fn);
}

void walk_expr(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& c : e.children) {
    const Expr& child = *c;
    walk_expr(child, fn);
  }
}

void translate_expr(Expr& e, const std::vector<int>& rel_map,
                    const std::vector<std::vector<int>>& col_maps) {
  walk_expr(e, [&](Expr& n) {
    if (n.op != ExprOp::ColumnRef || n.levels_up != 0) return;
    int old_rti = n.rti;
    // Rels absent from the map are exterior to the translated set; their
    // references stay as they are and compare by identity.
    if (old_rti < 0 || static_cast<size_t>(old_rti) >= rel_map.size() || rel_map[old_rti] < 0)
      return;
    n.rti = rel_map[old_rti];
    if (static_cast<size_t>(old_rti) < col_maps.size() && !col_maps[old_rti].empty()) {
      const auto& cm = col_maps[old_rti];
      if (n.col < 0 || static_cast<size_t>(n.col) >= cm.size() || cm[n.col] < 0)
        throw PlanError("translate: no column mapping for rel " + std::to_string(old_rti) +
                        " column " + std::to_string(n.col));
      n.col = cm[n.col];
    }
  });
}

std::string expr_to_string(const Expr& e, const ColumnNamer& namer) {
  switch (e.op) {
    case ExprOp::ColumnRef: return namer(e.rti, e.col, e.levels_up);
    case ExprOp::Literal: return e.value.to_string();
    case ExprOp::BinOp:
      return "(" + expr_to_string(*e.children[0], namer) + " " + bin_op_token(e.bin) + " " +
             expr_to_string(*e.children[1], namer) + ")";
    case ExprOp::InList: {
      std::string s = expr_to_string(*e.children[0], namer) + " in (";
      for (size_t i = 1; i < e.children.size(); ++i) {
        if (i > 1) s += ", ";
        s += expr_to_string(*e.children[i], namer);
      }
      return s + ")";
    }
    case ExprOp::AggCall: {
      std::string s = agg_kind_name(e.agg);
      s += "(";
      s += e.children.empty() ? "*" : expr_to_string(*e.children[0], namer);
      return s + ")";
    }
    case ExprOp::SublinkRef: return "sublink#" + std::to_string(e.sublink_id);
  }
  return "?";
}

namespace {

bool is_numeric(const Datum& d) {
  return d.kind == Datum::Kind::Int || d.kind == Datum::Kind::Decimal;
}

bool fold_node(Expr& e) {
  if (e.op != ExprOp::BinOp) return false;
  if (e.bin != BinOpKind::Add && e.bin != BinOpKind::Sub && e.bin != BinOpKind::Mul) return false;
  const Expr& l = *e.children[0];
  const Expr& r = *e.children[1];
  if (l.op != ExprOp::Literal || r.op != ExprOp::Literal) return false;
  Datum out;
  if (l.value.kind == Datum::Kind::Date && r.value.kind == Datum::Kind::Interval &&
      e.bin != BinOpKind::Mul) {
    int64_t count = e.bin == BinOpKind::Add ? r.value.int_v : -r.value.int_v;
    out = Datum::from_date_days(date_add_interval(l.value.int_v, count, r.value.unit));
  } else if (is_numeric(l.value) && is_numeric(r.value)) {
    if (l.value.kind == Datum::Kind::Int && r.value.kind == Datum::Kind::Int) {
      int64_t a = l.value.int_v, b = r.value.int_v;
      out = Datum::from_int(e.bin == BinOpKind::Add ? a + b : e.bin == BinOpKind::Sub ? a - b : a * b);
    } else {
      double a = l.value.as_double(), b = r.value.as_double();
      out = Datum::from_decimal(e.bin == BinOpKind::Add ? a + b : e.bin == BinOpKind::Sub ? a - b : a * b);
    }
  } else {
    return false;
  }
  e.op = ExprOp::Literal;
  e.value = std::move(out);
  e.children.clear();
  return true;
}

}  // namespace

bool fold_constants(Expr& e) {
  bool changed = false;
  for (auto& c : e.children) changed |= fold_constants(*c);
  changed |= fold_node(e);
  return changed;
}

}  // namespace optlab
