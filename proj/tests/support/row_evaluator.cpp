#include "support/row_evaluator.hpp"

#include <algorithm>
#include <functional>

#include "optlab/common.hpp"

namespace optlab::testsupport {

namespace {

uint64_t cell_hash(uint64_t seed, uint32_t oid, int col, size_t i) {
  return mix64(seed ^ mix64(static_cast<uint64_t>(oid) * 31 + static_cast<uint64_t>(col) * 7 + i));
}

Datum synth_value(const ColumnStats& s, uint64_t h) {
  switch (s.type) {
    case DataType::Int: {
      int64_t lo = s.min_value ? s.min_value->int_v : 0;
      int64_t hi = s.max_value ? s.max_value->int_v : lo + static_cast<int64_t>(s.ndv) - 1;
      int64_t span = hi >= lo ? hi - lo + 1 : 1;
      return Datum::from_int(lo + static_cast<int64_t>(h % static_cast<uint64_t>(span)));
    }
    case DataType::Date: {
      int64_t lo = s.min_value ? s.min_value->int_v : 0;
      int64_t hi = s.max_value ? s.max_value->int_v : lo + 364;
      int64_t span = hi >= lo ? hi - lo + 1 : 1;
      return Datum::from_date_days(lo + static_cast<int64_t>(h % static_cast<uint64_t>(span)));
    }
    case DataType::Decimal: {
      double lo = s.min_value ? s.min_value->as_double() : 0.0;
      double hi = s.max_value ? s.max_value->as_double() : lo + s.ndv;
      uint64_t steps = static_cast<uint64_t>(s.ndv < 1.0 ? 1.0 : s.ndv);
      uint64_t k = h % steps;
      double v = steps <= 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
      return Datum::from_decimal(v);
    }
    case DataType::Text: {
      uint64_t k = h % static_cast<uint64_t>(s.ndv < 1.0 ? 1.0 : s.ndv);
      return Datum::from_text(s.name + "_" + std::to_string(k));
    }
  }
  return Datum::null();
}

}  // namespace

TableData generate_rows(const TableDef& table, size_t n, uint64_t seed) {
  TableData out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    Row row;
    row.reserve(table.columns.size());
    for (size_t c = 0; c < table.columns.size(); ++c) {
      const ColumnStats& s = table.columns[c];
      uint64_t h = cell_hash(seed, table.oid, static_cast<int>(c), i);
      if (s.null_frac > 0.0 &&
          static_cast<double>(h % 10000) < s.null_frac * 10000.0) {
        row.push_back(Datum::null());
        continue;
      }
      if (table.column_is_unique(static_cast<int>(c))) {
        // Sequential values keep declared keys genuinely unique.
        int64_t lo = s.min_value ? s.min_value->int_v : 1;
        switch (s.type) {
          case DataType::Int: row.push_back(Datum::from_int(lo + static_cast<int64_t>(i))); break;
          case DataType::Date: row.push_back(Datum::from_date_days(lo + static_cast<int64_t>(i))); break;
          case DataType::Decimal:
            row.push_back(Datum::from_decimal((s.min_value ? s.min_value->as_double() : 0.0) +
                                              static_cast<double>(i)));
            break;
          case DataType::Text: row.push_back(Datum::from_text(s.name + "_" + std::to_string(i))); break;
        }
        continue;
      }
      if (s.hll_values && !s.hll_values->empty()) {
        row.push_back((*s.hll_values)[h % s.hll_values->size()]);
        continue;
      }
      row.push_back(synth_value(s, h));
    }
    out.push_back(std::move(row));
  }
  return out;
}

void RowEnv::set(int rti, int col, Datum v) {
  values_[(static_cast<uint64_t>(static_cast<uint32_t>(rti)) << 32) | static_cast<uint32_t>(col)] =
      std::move(v);
}

const Datum& RowEnv::get(int rti, int col, int levels_up) const {
  const RowEnv* e = this;
  for (int i = 0; i < levels_up && e; ++i) e = e->outer_;
  if (!e) throw PlanError("row environment: no enclosing level");
  auto it = e->values_.find(
      (static_cast<uint64_t>(static_cast<uint32_t>(rti)) << 32) | static_cast<uint32_t>(col));
  if (it == e->values_.end())
    throw PlanError("row environment: unbound column " + std::to_string(rti) + "." +
                    std::to_string(col));
  return it->second;
}

namespace {

Datum bool_datum(bool v) { return Datum::from_int(v ? 1 : 0); }

// Numeric/text/date comparison with null propagation.
Datum compare_datums(BinOpKind k, const Datum& a, const Datum& b) {
  if (a.is_null() || b.is_null()) return Datum::null();
  int c = datum_compare(a, b);
  switch (k) {
    case BinOpKind::Eq: return bool_datum(c == 0);
    case BinOpKind::Ne: return bool_datum(c != 0);
    case BinOpKind::Lt: return bool_datum(c < 0);
    case BinOpKind::Le: return bool_datum(c <= 0);
    case BinOpKind::Gt: return bool_datum(c > 0);
    case BinOpKind::Ge: return bool_datum(c >= 0);
    default: throw PlanError("not a comparison");
  }
}

Datum arith_datums(BinOpKind k, const Datum& a, const Datum& b) {
  if (a.is_null() || b.is_null()) return Datum::null();
  if (a.kind == Datum::Kind::Date && b.kind == Datum::Kind::Interval) {
    if (k == BinOpKind::Add)
      return Datum::from_date_days(date_add_interval(a.int_v, b.int_v, b.unit));
    if (k == BinOpKind::Sub)
      return Datum::from_date_days(date_add_interval(a.int_v, -b.int_v, b.unit));
    throw PlanError("unsupported date arithmetic");
  }
  bool dec = a.kind == Datum::Kind::Decimal || b.kind == Datum::Kind::Decimal;
  if (dec) {
    double x = a.as_double(), y = b.as_double();
    switch (k) {
      case BinOpKind::Add: return Datum::from_decimal(x + y);
      case BinOpKind::Sub: return Datum::from_decimal(x - y);
      case BinOpKind::Mul: return Datum::from_decimal(x * y);
      default: throw PlanError("not arithmetic");
    }
  }
  switch (k) {
    case BinOpKind::Add: return Datum::from_int(a.int_v + b.int_v);
    case BinOpKind::Sub: return Datum::from_int(a.int_v - b.int_v);
    case BinOpKind::Mul: return Datum::from_int(a.int_v * b.int_v);
    default: throw PlanError("not arithmetic");
  }
}

}  // namespace

Datum eval_scalar(const Expr& e, const RowEnv& env) {
  switch (e.op) {
    case ExprOp::ColumnRef: return env.get(e.rti, e.col, e.levels_up);
    case ExprOp::Literal: return e.value;
    case ExprOp::BinOp: {
      if (e.bin == BinOpKind::And || e.bin == BinOpKind::Or) {
        auto l = eval_predicate(*e.children[0], env);
        auto r = eval_predicate(*e.children[1], env);
        if (e.bin == BinOpKind::And) {
          if (l.has_value() && !*l) return bool_datum(false);
          if (r.has_value() && !*r) return bool_datum(false);
          if (l.has_value() && r.has_value()) return bool_datum(true);
          return Datum::null();
        }
        if (l.has_value() && *l) return bool_datum(true);
        if (r.has_value() && *r) return bool_datum(true);
        if (l.has_value() && r.has_value()) return bool_datum(false);
        return Datum::null();
      }
      Datum l = eval_scalar(*e.children[0], env);
      Datum r = eval_scalar(*e.children[1], env);
      if (e.bin == BinOpKind::Add || e.bin == BinOpKind::Sub || e.bin == BinOpKind::Mul)
        return arith_datums(e.bin, l, r);
      return compare_datums(e.bin, l, r);
    }
    case ExprOp::InList: {
      Datum needle = eval_scalar(*e.children[0], env);
      if (needle.is_null()) return Datum::null();
      bool saw_null = false;
      for (size_t i = 1; i < e.children.size(); ++i) {
        Datum item = eval_scalar(*e.children[i], env);
        if (item.is_null()) {
          saw_null = true;
          continue;
        }
        if (datum_compare(needle, item) == 0) return bool_datum(true);
      }
      return saw_null ? Datum::null() : bool_datum(false);
    }
    case ExprOp::AggCall: throw PlanError("aggregate outside grouping context");
    case ExprOp::SublinkRef: throw PlanError("sublink outside executor context");
  }
  return Datum::null();
}

std::optional<bool> eval_predicate(const Expr& e, const RowEnv& env) {
  Datum d = eval_scalar(e, env);
  if (d.is_null()) return std::nullopt;
  return d.as_double() != 0.0;
}

namespace {

// Joined row under construction: per-rti source rows, with null-extended
// rels tracked separately (left join misses).
struct JRow {
  std::vector<const Row*> slots;
  RelSet null_rels = 0;
};

class BlockExec {
 public:
  BlockExec(const QueryBlock& b, const Catalog& cat,
            const std::unordered_map<uint32_t, TableData>& data, const RowEnv* outer)
      : b_(b), cat_(cat), data_(data), outer_(outer) {}

  std::vector<Row> run();

 private:
  const QueryBlock& b_;
  const Catalog& cat_;
  const std::unordered_map<uint32_t, TableData>& data_;
  const RowEnv* outer_;
  std::vector<TableData> rel_rows_;        // materialized per rti
  std::vector<bool> quals_applied_;
  std::unordered_map<int, std::vector<Row>> uncorrelated_cache_;

  RowEnv env_of(const JRow& jr) const {
    RowEnv env(outer_);
    for (size_t rti = 0; rti < jr.slots.size(); ++rti) {
      if (rel_set_has(jr.null_rels, static_cast<int>(rti))) {
        int ncols = static_cast<int>(rel_rows_[rti].empty()
                                         ? block_rel_column_count(b_, cat_, static_cast<int>(rti))
                                         : rel_rows_[rti][0].size());
        for (int c = 0; c < ncols; ++c) env.set(static_cast<int>(rti), c, Datum::null());
        continue;
      }
      if (!jr.slots[rti]) continue;
      const Row& r = *jr.slots[rti];
      for (size_t c = 0; c < r.size(); ++c) env.set(static_cast<int>(rti), static_cast<int>(c), r[c]);
    }
    return env;
  }

  // Evaluates one block qual against a joined row, resolving sublinks.
  bool qual_passes(const Predicate& q, const RowEnv& env) {
    auto v = eval_sub(*q.expr, env);
    return v.has_value() && *v;
  }

  std::optional<bool> eval_sub(const Expr& e, const RowEnv& env) {
    Datum d = eval_scalar_sub(e, env);
    if (d.is_null()) return std::nullopt;
    return d.as_double() != 0.0;
  }

  Datum eval_scalar_sub(const Expr& e, const RowEnv& env) {
    if (e.op == ExprOp::SublinkRef) return eval_sublink(e.sublink_id, env);
    if (e.op == ExprOp::BinOp) {
      if (e.bin == BinOpKind::And || e.bin == BinOpKind::Or) {
        auto l = eval_sub(*e.children[0], env);
        auto r = eval_sub(*e.children[1], env);
        if (e.bin == BinOpKind::And) {
          if (l.has_value() && !*l) return Datum::from_int(0);
          if (r.has_value() && !*r) return Datum::from_int(0);
          if (l.has_value() && r.has_value()) return Datum::from_int(1);
          return Datum::null();
        }
        if (l.has_value() && *l) return Datum::from_int(1);
        if (r.has_value() && *r) return Datum::from_int(1);
        if (l.has_value() && r.has_value()) return Datum::from_int(0);
        return Datum::null();
      }
      Datum l = eval_scalar_sub(*e.children[0], env);
      Datum r = eval_scalar_sub(*e.children[1], env);
      if (e.bin == BinOpKind::Add || e.bin == BinOpKind::Sub || e.bin == BinOpKind::Mul)
        return arith_datums(e.bin, l, r);
      return compare_datums(e.bin, l, r);
    }
    return eval_scalar(e, env);
  }

  Datum eval_sublink(int id, const RowEnv& env) {
    const Sublink& sl = b_.sublinks.at(static_cast<size_t>(id));
    std::vector<Row> child_rows = child_result(id, sl, env);
    switch (sl.kind) {
      case Sublink::Kind::Exists: {
        bool found = !child_rows.empty();
        return bool_datum(sl.negated ? !found : found);
      }
      case Sublink::Kind::Scalar: {
        if (child_rows.size() > 1) throw PlanError("scalar subquery produced more than one row");
        return child_rows.empty() ? Datum::null() : child_rows[0].at(0);
      }
      case Sublink::Kind::In: {
        Datum needle = eval_scalar_sub(*sl.test_expr, env);
        if (needle.is_null()) return Datum::null();
        bool saw_null = false;
        bool found = false;
        for (const auto& r : child_rows) {
          if (r.at(0).is_null()) {
            saw_null = true;
            continue;
          }
          if (datum_compare(needle, r.at(0)) == 0) {
            found = true;
            break;
          }
        }
        Datum d = found ? bool_datum(true) : (saw_null ? Datum::null() : bool_datum(false));
        if (!sl.negated) return d;
        if (d.is_null()) return d;
        return bool_datum(d.as_double() == 0.0);
      }
    }
    return Datum::null();
  }

  std::vector<Row> child_result(int id, const Sublink& sl, const RowEnv& env) {
    bool correlated = child_has_outer_refs(*sl.child);
    if (!correlated) {
      auto it = uncorrelated_cache_.find(id);
      if (it != uncorrelated_cache_.end()) return it->second;
      auto rows = execute_block(*sl.child, cat_, data_, nullptr);
      uncorrelated_cache_[id] = rows;
      return rows;
    }
    return execute_block(*sl.child, cat_, data_, &env);
  }

  static bool child_has_outer_refs(const QueryBlock& b) {
    return count_lateral_rels(b) > 0 || block_refs_outer(b, 0);
  }

  static bool block_refs_outer(const QueryBlock& b, int depth) {
    bool found = false;
    auto check = [&](const Expr& e) {
      walk_expr(e, [&](const Expr& n) {
        if (n.op == ExprOp::ColumnRef && n.levels_up > depth) found = true;
      });
    };
    for (const auto& q : b.quals) check(*q.expr);
    for (const auto& j : b.sjinfos)
      for (const auto& q : j.quals) check(*q.expr);
    for (const auto& t : b.targets) check(*t.expr);
    for (const auto& g : b.group_by) check(*g);
    for (const auto& o : b.order_by) check(*o.expr);
    for (const auto& sl : b.sublinks) {
      if (sl.test_expr) check(*sl.test_expr);
      if (block_refs_outer(*sl.child, depth + 1)) found = true;
    }
    for (const auto& rte : b.rtes)
      if (!rte.is_base() && block_refs_outer(*rte.subquery, depth + 1)) found = true;
    return found;
  }

  std::vector<JRow> cross_with(const std::vector<JRow>& in, int rti, RelSet built, bool apply_quals);
};

std::vector<JRow> BlockExec::cross_with(const std::vector<JRow>& in, int rti, RelSet built,
                                        bool apply_quals) {
  std::vector<JRow> out;
  for (const auto& jr : in) {
    for (const auto& row : rel_rows_[static_cast<size_t>(rti)]) {
      JRow next = jr;
      next.slots[static_cast<size_t>(rti)] = &row;
      bool ok = true;
      if (apply_quals) {
        RowEnv env = env_of(next);
        for (size_t qi = 0; qi < b_.quals.size(); ++qi) {
          const Predicate& q = b_.quals[qi];
          if (quals_applied_[qi] || q.has_sublink || q.rels == 0) continue;
          if (!rel_set_has(q.rels, rti)) continue;
          if (!rel_set_subset(q.rels, rel_set_add(built, rti))) continue;
          if (!qual_passes(q, env)) {
            ok = false;
            break;
          }
        }
      }
      if (ok) out.push_back(std::move(next));
    }
  }
  return out;
}

std::vector<Row> BlockExec::run() {
  size_t nrels = b_.rtes.size();
  rel_rows_.resize(nrels);
  quals_applied_.assign(b_.quals.size(), false);

  for (size_t rti = 0; rti < nrels; ++rti) {
    const RangeTableEntry& rte = b_.rtes[rti];
    if (rte.is_base()) {
      auto it = data_.find(rte.oid);
      if (it == data_.end()) throw PlanError("no rows provided for table " + rte.alias);
      rel_rows_[rti] = it->second;
    } else {
      rel_rows_[rti] = execute_block(*rte.subquery, cat_, data_, outer_);
    }
  }

  // Rels on the right side of a special join enter at that join's stage.
  RelSet deferred = 0;
  for (const auto& j : b_.sjinfos) deferred |= j.min_right;
  RelSet base_set = b_.all_rels() & ~deferred;

  std::vector<JRow> rows;
  {
    JRow seed;
    seed.slots.assign(nrels, nullptr);
    rows.push_back(std::move(seed));
  }
  RelSet built = 0;
  rel_set_foreach(base_set, [&](int rti) {
    rows = cross_with(rows, rti, built, true);
    built = rel_set_add(built, rti);
  });
  for (size_t qi = 0; qi < b_.quals.size(); ++qi) {
    const Predicate& q = b_.quals[qi];
    if (!q.has_sublink && q.rels != 0 && rel_set_subset(q.rels, built)) quals_applied_[qi] = true;
  }

  for (const auto& j : b_.sjinfos) {
    // Semi/anti sides are consumed by the join, so their quals act as match
    // conditions; a left join's right-side quals are ordinary filters that
    // run after null extension.
    bool match_side_quals = j.type == JoinType::Semi || j.type == JoinType::Anti;
    std::vector<JRow> right;
    {
      JRow seed;
      seed.slots.assign(nrels, nullptr);
      right.push_back(std::move(seed));
    }
    RelSet rbuilt = 0;
    rel_set_foreach(j.min_right, [&](int rti) {
      right = cross_with(right, rti, rbuilt, match_side_quals);
      rbuilt = rel_set_add(rbuilt, rti);
    });

    RelSet joined = built | j.min_right;
    std::vector<size_t> span_quals;
    if (match_side_quals) {
      for (size_t qi = 0; qi < b_.quals.size(); ++qi) {
        const Predicate& q = b_.quals[qi];
        if (quals_applied_[qi] || q.has_sublink || q.rels == 0) continue;
        if (rel_set_subset(q.rels, joined) && (q.rels & j.min_right)) {
          span_quals.push_back(qi);
          quals_applied_[qi] = true;
        }
      }
    }

    std::vector<JRow> next;
    for (const auto& lr : rows) {
      bool any = false;
      for (const auto& rr : right) {
        JRow cand = lr;
        rel_set_foreach(j.min_right, [&](int rti) {
          cand.slots[static_cast<size_t>(rti)] = rr.slots[static_cast<size_t>(rti)];
        });
        RowEnv env = env_of(cand);
        bool ok = true;
        for (const auto& q : j.quals)
          if (!qual_passes(q, env)) {
            ok = false;
            break;
          }
        for (size_t qi : span_quals)
          if (ok && !qual_passes(b_.quals[qi], env)) ok = false;
        if (!ok) continue;
        any = true;
        if (j.type == JoinType::Semi) break;
        if (j.type == JoinType::Anti) break;
        next.push_back(std::move(cand));
      }
      if (j.type == JoinType::Semi) {
        if (any) next.push_back(lr);
      } else if (j.type == JoinType::Anti) {
        if (!any) next.push_back(lr);
      } else if (j.type == JoinType::Left) {
        if (!any) {
          JRow ext = lr;
          ext.null_rels |= j.min_right;
          next.push_back(std::move(ext));
        }
      }
    }
    rows = std::move(next);
    built = joined;
  }

  // Remaining quals: sublink-bearing and anything not yet staged.
  std::vector<JRow> filtered;
  for (auto& jr : rows) {
    RowEnv env = env_of(jr);
    bool ok = true;
    for (size_t qi = 0; qi < b_.quals.size(); ++qi) {
      if (quals_applied_[qi]) continue;
      if (!qual_passes(b_.quals[qi], env)) {
        ok = false;
        break;
      }
    }
    if (ok) filtered.push_back(std::move(jr));
  }

  bool has_aggs = false;
  for (const auto& t : b_.targets) {
    bool f = false;
    walk_expr(*t.expr, [&](const Expr& n) { f = f || n.op == ExprOp::AggCall; });
    has_aggs = has_aggs || f;
  }
  bool grouped = !b_.group_by.empty() || has_aggs;

  struct OutRow {
    Row values;
    Row order_keys;
  };
  std::vector<OutRow> produced;

  auto eval_order_keys = [&](const std::function<Datum(const Expr&)>& ev) {
    Row keys;
    for (const auto& k : b_.order_by) keys.push_back(ev(*k.expr));
    return keys;
  };

  if (!grouped) {
    for (const auto& jr : filtered) {
      RowEnv env = env_of(jr);
      OutRow r;
      for (const auto& t : b_.targets) r.values.push_back(eval_scalar_sub(*t.expr, env));
      r.order_keys = eval_order_keys([&](const Expr& e) { return eval_scalar_sub(e, env); });
      produced.push_back(std::move(r));
    }
  } else {
    // Group rows by the group-by key tuple (single group when absent).
    std::vector<std::pair<Row, std::vector<const JRow*>>> groups;
    for (const auto& jr : filtered) {
      RowEnv env = env_of(jr);
      Row key;
      for (const auto& g : b_.group_by) key.push_back(eval_scalar_sub(*g, env));
      auto match = std::find_if(groups.begin(), groups.end(), [&](const auto& grp) {
        if (grp.first.size() != key.size()) return false;
        for (size_t i = 0; i < key.size(); ++i) {
          const Datum& a = grp.first[i];
          const Datum& kb = key[i];
          bool eq = (a.is_null() && kb.is_null()) ||
                    (!a.is_null() && !kb.is_null() && datum_compare(a, kb) == 0);
          if (!eq) return false;
        }
        return true;
      });
      if (match == groups.end())
        groups.push_back({std::move(key), {&jr}});
      else
        match->second.push_back(&jr);
    }
    if (groups.empty() && b_.group_by.empty()) groups.push_back({{}, {}});

    for (const auto& [key, members] : groups) {
      std::function<Datum(const Expr&)> ev = [&](const Expr& e) -> Datum {
        if (e.op == ExprOp::AggCall) {
          if (e.agg == AggKind::Count && e.children.empty())
            return Datum::from_int(static_cast<int64_t>(members.size()));
          int64_t count = 0;
          Datum acc = Datum::null();
          for (const JRow* jr : members) {
            RowEnv env = env_of(*jr);
            Datum v = eval_scalar_sub(*e.children.at(0), env);
            if (v.is_null()) continue;
            count++;
            switch (e.agg) {
              case AggKind::Count: break;
              case AggKind::Sum:
                acc = acc.is_null() ? v : arith_datums(BinOpKind::Add, acc, v);
                break;
              case AggKind::Min:
                if (acc.is_null() || datum_compare(v, acc) < 0) acc = v;
                break;
              case AggKind::Max:
                if (acc.is_null() || datum_compare(v, acc) > 0) acc = v;
                break;
            }
          }
          if (e.agg == AggKind::Count) return Datum::from_int(count);
          return acc;
        }
        if (e.op == ExprOp::BinOp && e.bin != BinOpKind::And && e.bin != BinOpKind::Or) {
          Datum l = ev(*e.children[0]);
          Datum r = ev(*e.children[1]);
          if (e.bin == BinOpKind::Add || e.bin == BinOpKind::Sub || e.bin == BinOpKind::Mul)
            return arith_datums(e.bin, l, r);
          return compare_datums(e.bin, l, r);
        }
        // Plain column: constant within the group; take it from any member.
        if (members.empty()) return Datum::null();
        RowEnv env = env_of(*members[0]);
        return eval_scalar_sub(e, env);
      };
      OutRow r;
      for (const auto& t : b_.targets) r.values.push_back(ev(*t.expr));
      r.order_keys = eval_order_keys(ev);
      produced.push_back(std::move(r));
    }
  }

  if (b_.distinct) {
    std::vector<OutRow> unique;
    for (auto& r : produced) {
      bool dup = std::any_of(unique.begin(), unique.end(), [&](const OutRow& u) {
        if (u.values.size() != r.values.size()) return false;
        for (size_t i = 0; i < r.values.size(); ++i) {
          const Datum& a = u.values[i];
          const Datum& bv = r.values[i];
          bool eq = (a.is_null() && bv.is_null()) ||
                    (!a.is_null() && !bv.is_null() && datum_compare(a, bv) == 0);
          if (!eq) return false;
        }
        return true;
      });
      if (!dup) unique.push_back(std::move(r));
    }
    produced = std::move(unique);
  }

  if (!b_.order_by.empty()) {
    std::stable_sort(produced.begin(), produced.end(), [&](const OutRow& a, const OutRow& bb) {
      for (size_t i = 0; i < b_.order_by.size(); ++i) {
        int c = datum_compare(a.order_keys[i], bb.order_keys[i]);
        if (c != 0) return b_.order_by[i].desc ? c > 0 : c < 0;
      }
      return false;
    });
  }

  std::vector<Row> out;
  for (auto& r : produced) out.push_back(std::move(r.values));
  if (b_.limit && out.size() > static_cast<size_t>(*b_.limit))
    out.resize(static_cast<size_t>(*b_.limit));
  return out;
}

}  // namespace

std::vector<Row> execute_block(const QueryBlock& b, const Catalog& cat,
                               const std::unordered_map<uint32_t, TableData>& data_by_oid,
                               const RowEnv* outer) {
  BlockExec exec(b, cat, data_by_oid, outer);
  return exec.run();
}

std::vector<Row> execute_tree(const QueryTree& t, const Catalog& cat,
                              const std::unordered_map<uint32_t, TableData>& data_by_oid) {
  return execute_block(*t.root, cat, data_by_oid, nullptr);
}

}  // namespace optlab::testsupport
