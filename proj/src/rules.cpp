#include "optlab/rules.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "optlab/guess.hpp"
#include "optlab/planner.hpp"

namespace optlab {

std::string decision_log_tsv(const std::vector<RewriteDecision>& decisions) {
  std::ostringstream os;
  os << "rule\tmatched\tguess\tapplied\tcost_original\tcost_rewritten\tcbo_invocations\n";
  auto cost_str = [](double c) {
    if (c < 0.0) return std::string("-");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", c);
    return std::string(buf);
  };
  for (const auto& d : decisions) {
    os << d.rule_id << "\t" << (d.matched ? 1 : 0) << "\t"
       << (d.guess ? (*d.guess ? "1" : "0") : "-") << "\t" << (d.applied ? 1 : 0) << "\t"
       << cost_str(d.cost_original) << "\t" << cost_str(d.cost_rewritten) << "\t"
       << d.cbo_invocations << "\n";
  }
  return os.str();
}

namespace {

void for_each_block(QueryBlock& b, const std::function<void(QueryBlock&)>& fn) {
  fn(b);
  for (auto& rte : b.rtes)
    if (rte.subquery) for_each_block(*rte.subquery, fn);
  for (auto& sl : b.sublinks)
    if (sl.child) for_each_block(*sl.child, fn);
}

bool targets_have_aggs(const QueryBlock& b) {
  for (const auto& t : b.targets)
    if (collect_refs(*t.expr).has_agg) return true;
  for (const auto& o : b.order_by)
    if (collect_refs(*o.expr).has_agg) return true;
  return false;
}

// Deep clone with node replacement: repl may return a substitute for a node,
// which is taken whole (children included).
ExprPtr clone_replacing(const Expr& e, const std::function<std::optional<ExprPtr>(const Expr&)>& repl) {
  if (auto r = repl(e)) return std::move(*r);
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
  for (const auto& c : e.children) out->children.push_back(clone_replacing(*c, repl));
  return out;
}

// Renumbers a dissolved child block's references for life inside its parent:
// the child's own rels shift up by `base`, and every path through the child
// loses one level of nesting.
void shift_for_merge(QueryBlock& blk, int depth, int base) {
  auto fix = [&](Expr& e) {
    walk_expr(e, [&](Expr& n) {
      if (n.op != ExprOp::ColumnRef) return;
      if (n.levels_up == depth)
        n.rti += base;
      else if (n.levels_up > depth)
        n.levels_up -= 1;
    });
  };
  for (auto& q : blk.quals) {
    fix(*q.expr);
    if (depth == 0) refresh_predicate(q);
  }
  for (auto& j : blk.sjinfos) {
    for (auto& q : j.quals) {
      fix(*q.expr);
      if (depth == 0) refresh_predicate(q);
    }
    if (depth == 0) {
      j.min_left <<= base;
      j.min_right <<= base;
    }
  }
  for (auto& sl : blk.sublinks)
    if (sl.test_expr) fix(*sl.test_expr);
  for (auto& t : blk.targets) fix(*t.expr);
  for (auto& g : blk.group_by) fix(*g);
  for (auto& o : blk.order_by) fix(*o.expr);
  if (depth == 0)
    for (auto& h : blk.hints) h.rels <<= base;
  for (auto& rte : blk.rtes)
    if (rte.subquery) shift_for_merge(*rte.subquery, depth + 1, base);
  for (auto& sl : blk.sublinks)
    if (sl.child) shift_for_merge(*sl.child, depth + 1, base);
}

void remap_sublink_ids(QueryBlock& b, int removed) {
  auto fix = [&](Expr& e) {
    walk_expr(e, [&](Expr& n) {
      if (n.op == ExprOp::SublinkRef && n.sublink_id > removed) n.sublink_id -= 1;
    });
  };
  for (auto& q : b.quals) fix(*q.expr);
  for (auto& j : b.sjinfos)
    for (auto& q : j.quals) fix(*q.expr);
  for (auto& sl : b.sublinks)
    if (sl.test_expr) fix(*sl.test_expr);
  for (auto& t : b.targets) fix(*t.expr);
  for (auto& g : b.group_by) fix(*g);
  for (auto& o : b.order_by) fix(*o.expr);
}

// Index of the conjunct that is exactly `SublinkRef(id)`, or -1.
int bare_sublink_qual(const QueryBlock& b, int id) {
  for (size_t i = 0; i < b.quals.size(); ++i) {
    const Expr& e = *b.quals[i].expr;
    if (e.op == ExprOp::SublinkRef && e.sublink_id == id) return static_cast<int>(i);
  }
  return -1;
}

int next_sjinfo_id(const QueryBlock& b) {
  int id = 0;
  for (const auto& j : b.sjinfos) id = std::max(id, j.id + 1);
  return id;
}

bool fold_block(QueryBlock& b) {
  bool changed = false;
  for (auto& q : b.quals)
    if (fold_constants(*q.expr)) {
      refresh_predicate(q);
      changed = true;
    }
  for (auto& j : b.sjinfos)
    for (auto& q : j.quals)
      if (fold_constants(*q.expr)) {
        refresh_predicate(q);
        changed = true;
      }
  for (auto& sl : b.sublinks)
    if (sl.test_expr && fold_constants(*sl.test_expr)) changed = true;
  for (auto& t : b.targets)
    if (fold_constants(*t.expr)) changed = true;
  for (auto& g : b.group_by)
    if (fold_constants(*g)) changed = true;
  for (auto& o : b.order_by)
    if (fold_constants(*o.expr)) changed = true;
  return changed;
}

// EXISTS / NOT EXISTS with correlated quals becomes a semi / anti join:
// the child's rels join the block, correlation quals become the join's quals.
bool flatten_one_exists(QueryBlock& b) {
  for (size_t id = 0; id < b.sublinks.size(); ++id) {
    Sublink& sl = b.sublinks[id];
    if (sl.kind != Sublink::Kind::Exists) continue;
    int qual_idx = bare_sublink_qual(b, static_cast<int>(id));
    if (qual_idx < 0) continue;
    QueryBlock& child = *sl.child;
    if (!child.group_by.empty() || child.limit || targets_have_aggs(child)) continue;
    if (!child.sublinks.empty()) continue;
    if (b.rtes.size() + child.rtes.size() > 64) continue;
    bool correlated = false;
    for (const auto& q : child.quals) {
      walk_expr(*q.expr, [&](const Expr& n) {
        if (n.op == ExprOp::ColumnRef && n.levels_up == 1) correlated = true;
      });
    }
    if (!correlated) continue;

    int base = static_cast<int>(b.rtes.size());
    RelSet parent_mask = b.all_rels();
    shift_for_merge(child, 0, base);
    RelSet child_mask = 0;
    for (size_t i = 0; i < child.rtes.size(); ++i)
      child_mask = rel_set_add(child_mask, base + static_cast<int>(i));

    SpecialJoinInfo join;
    join.id = next_sjinfo_id(b);
    join.type = sl.negated ? JoinType::Anti : JoinType::Semi;
    join.min_right = child_mask;
    for (auto& q : child.quals) {
      if ((q.rels & parent_mask) && (q.rels & child_mask)) {
        join.min_left |= q.rels & parent_mask;
        join.quals.push_back(std::move(q));
      } else {
        b.quals.push_back(std::move(q));
      }
    }
    child.quals.clear();
    if (rel_set_empty(join.min_left)) {
      // No usable correlation after all; leave the sublink in place.
      // (The shift is undone by rebuilding from the untouched quals above,
      // but since quals were moved this branch must not be reachable: the
      // correlation precheck guarantees at least one crossing qual.)
      throw PlanError("exists flattening lost its correlation quals");
    }
    for (auto& rte : child.rtes) {
      if (rte.subquery) rte.subquery->parent = &b;
      b.rtes.push_back(std::move(rte));
    }
    for (auto& j : child.sjinfos) {
      j.id = next_sjinfo_id(b);
      b.sjinfos.push_back(std::move(j));
    }
    for (auto& h : child.hints) b.hints.push_back(std::move(h));
    b.sjinfos.push_back(std::move(join));

    b.quals.erase(b.quals.begin() + qual_idx);
    b.sublinks.erase(b.sublinks.begin() + static_cast<long>(id));
    remap_sublink_ids(b, static_cast<int>(id));
    return true;
  }
  return false;
}

// Single-rel predicates sink through subquery rels by substituting the
// child's target expressions for the referenced output columns.
bool push_down_one(QueryBlock& b) {
  for (size_t qi = 0; qi < b.quals.size(); ++qi) {
    const Predicate& q = b.quals[qi];
    if (q.has_sublink || q.has_outer_ref) continue;
    if (rel_set_count(q.rels) != 1) continue;
    int rti = rel_set_lowest(q.rels);
    RangeTableEntry& rte = b.rtes[static_cast<size_t>(rti)];
    if (rte.is_base()) continue;
    QueryBlock& child = *rte.subquery;
    if (!child.group_by.empty() || child.limit || targets_have_aggs(child)) continue;

    bool ok = true;
    auto pushed = clone_replacing(*q.expr, [&](const Expr& e) -> std::optional<ExprPtr> {
      if (e.op != ExprOp::ColumnRef || e.levels_up != 0) return std::nullopt;
      if (e.rti != rti || e.col < 0 || static_cast<size_t>(e.col) >= child.targets.size()) {
        ok = false;
        return std::nullopt;
      }
      return clone_expr(*child.targets[static_cast<size_t>(e.col)].expr);
    });
    if (!ok) continue;
    child.quals.push_back(make_predicate(std::move(pushed)));
    b.quals.erase(b.quals.begin() + static_cast<long>(qi));
    return true;
  }
  return false;
}

// ---- subquery merge (IN sublink -> join + DISTINCT) ----

bool plain_colref(const Expr& e) { return e.op == ExprOp::ColumnRef && e.levels_up == 0; }

int find_merge_candidate(const QueryBlock& root, const Catalog& cat) {
  if (!root.group_by.empty() || targets_have_aggs(root)) return -1;

  // Adding DISTINCT on top only preserves semantics when the output already
  // identifies each outer-row combination: either the query was DISTINCT to
  // begin with, or every rel contributes a unique column to the targets.
  if (!root.distinct) {
    for (size_t rti = 0; rti < root.rtes.size(); ++rti) {
      const RangeTableEntry& rte = root.rtes[rti];
      if (!rte.is_base()) return -1;
      const TableDef& t = cat.table_by_oid(rte.oid);
      bool keyed = false;
      for (const auto& te : root.targets)
        if (plain_colref(*te.expr) && te.expr->rti == static_cast<int>(rti) &&
            t.column_is_unique(te.expr->col))
          keyed = true;
      if (!keyed) return -1;
    }
  }

  for (size_t id = 0; id < root.sublinks.size(); ++id) {
    const Sublink& sl = root.sublinks[id];
    if (sl.kind != Sublink::Kind::In || sl.negated) continue;
    if (bare_sublink_qual(root, static_cast<int>(id)) < 0) continue;
    const QueryBlock& child = *sl.child;
    if (!child.group_by.empty() || child.distinct || child.limit) continue;
    if (child.targets.size() != 1 || targets_have_aggs(child)) continue;
    if (!child.sublinks.empty()) continue;
    if (root.rtes.size() + child.rtes.size() > 64) continue;
    return static_cast<int>(id);
  }
  return -1;
}

// ---- eager aggregation matching ----

struct EagerEdge {
  int s_rti = -1, s_col = -1;
  int c_rti = -1, c_col = -1;
};

struct EagerMatch {
  RelSet s_mask = 0;
  RelSet c_mask = 0;
  std::vector<EagerEdge> boundary;
};

// Simple cross-rel equality between two plain column references.
bool simple_equi(const Expr& e, int* lrti, int* lcol, int* rrti, int* rcol) {
  if (e.op != ExprOp::BinOp || e.bin != BinOpKind::Eq) return false;
  const Expr& l = *e.children[0];
  const Expr& r = *e.children[1];
  if (!plain_colref(l) || !plain_colref(r) || l.rti == r.rti) return false;
  *lrti = l.rti;
  *lcol = l.col;
  *rrti = r.rti;
  *rcol = r.col;
  return true;
}

std::vector<const Expr*> collect_agg_nodes(const QueryBlock& b) {
  std::vector<const Expr*> out;
  auto scan = [&](const Expr& root) {
    walk_expr(root, [&](const Expr& n) {
      if (n.op != ExprOp::AggCall) return;
      for (const Expr* seen : out)
        if (expr_equal(*seen, n)) return;
      out.push_back(&n);
    });
  };
  for (const auto& t : b.targets) scan(*t.expr);
  for (const auto& o : b.order_by) scan(*o.expr);
  return out;
}

std::optional<EagerMatch> match_eager_agg_impl(const QueryBlock& root, const Catalog& cat) {
  if (root.group_by.empty()) return std::nullopt;
  if (!root.sublinks.empty() || !root.sjinfos.empty() || !root.hints.empty()) return std::nullopt;
  if (root.rtes.size() < 2) return std::nullopt;
  for (const auto& rte : root.rtes)
    if (!rte.is_base()) return std::nullopt;
  for (const auto& g : root.group_by)
    if (!plain_colref(*g)) return std::nullopt;
  for (const auto& q : root.quals)
    if (q.has_sublink || q.rels == 0) return std::nullopt;

  auto shape_ok = [&](const Expr& e) {
    if (plain_colref(e)) return true;
    if (e.op != ExprOp::AggCall) return false;
    if (e.children.empty()) return true;  // count(*)
    return plain_colref(*e.children[0]);
  };
  for (const auto& t : root.targets)
    if (!shape_ok(*t.expr)) return std::nullopt;
  for (const auto& o : root.order_by)
    if (!shape_ok(*o.expr)) return std::nullopt;

  auto aggs = collect_agg_nodes(root);
  RelSet s_mask = 0;
  for (const Expr* a : aggs)
    if (!a->children.empty()) s_mask |= rel_set_of(a->children[0]->rti);
  if (rel_set_empty(s_mask)) return std::nullopt;

  RelSet nonagg_refs = 0;
  for (const auto& g : root.group_by) nonagg_refs = rel_set_add(nonagg_refs, g->rti);
  for (const auto& t : root.targets)
    if (plain_colref(*t.expr)) nonagg_refs = rel_set_add(nonagg_refs, t.expr->rti);
  for (const auto& o : root.order_by)
    if (plain_colref(*o.expr)) nonagg_refs = rel_set_add(nonagg_refs, o.expr->rti);

  // Absorb rels that join the aggregation side on their own unique key and
  // feed nothing but filters: the join cannot fan rows out, so it may run
  // below the aggregate.
  RelSet all = root.all_rels();
  bool grew = true;
  while (grew) {
    grew = false;
    rel_set_foreach(all & ~s_mask, [&](int r) {
      if (rel_set_has(nonagg_refs, r) || rel_set_has(s_mask, r)) return;
      for (const auto& q : root.quals) {
        int lrti, lcol, rrti, rcol;
        if (!simple_equi(*q.expr, &lrti, &lcol, &rrti, &rcol)) continue;
        int own_col = -1, other_rti = -1;
        if (lrti == r) {
          own_col = lcol;
          other_rti = rrti;
        } else if (rrti == r) {
          own_col = rcol;
          other_rti = lrti;
        } else {
          continue;
        }
        if (!rel_set_has(s_mask, other_rti)) continue;
        const TableDef& t = cat.table_by_oid(root.rte(r).oid);
        if (!t.column_is_unique(own_col)) continue;
        s_mask = rel_set_add(s_mask, r);
        grew = true;
        return;
      }
    });
  }

  RelSet c_mask = all & ~s_mask;
  if (rel_set_empty(c_mask)) return std::nullopt;

  EagerMatch m;
  m.s_mask = s_mask;
  m.c_mask = c_mask;
  for (const auto& q : root.quals) {
    if (!(q.rels & s_mask) || !(q.rels & c_mask)) continue;
    int lrti, lcol, rrti, rcol;
    if (!simple_equi(*q.expr, &lrti, &lcol, &rrti, &rcol)) return std::nullopt;
    EagerEdge e;
    if (rel_set_has(s_mask, lrti)) {
      e.s_rti = lrti;
      e.s_col = lcol;
      e.c_rti = rrti;
      e.c_col = rcol;
    } else {
      e.s_rti = rrti;
      e.s_col = rcol;
      e.c_rti = lrti;
      e.c_col = lcol;
    }
    m.boundary.push_back(e);
  }
  if (m.boundary.empty()) return std::nullopt;

  // Aggregation-side plain references must already be grouping keys, or the
  // pushed-down block could not reproduce them.
  auto s_ref_is_key = [&](const Expr& e) {
    if (!rel_set_has(s_mask, e.rti)) return true;
    for (const auto& g : root.group_by)
      if (g->rti == e.rti && g->col == e.col) return true;
    return false;
  };
  for (const auto& t : root.targets)
    if (plain_colref(*t.expr) && !s_ref_is_key(*t.expr)) return std::nullopt;
  for (const auto& o : root.order_by)
    if (plain_colref(*o.expr) && !s_ref_is_key(*o.expr)) return std::nullopt;

  return m;
}

// True when grouping keys pin every remaining rel to one row per group:
// a unique column in the keys anchors a rel, and unique-key equalities
// extend the property across the rest.
bool all_outer_rels_determined(const QueryBlock& root, const Catalog& cat, const EagerMatch& m) {
  RelSet determined = 0;
  rel_set_foreach(m.c_mask, [&](int r) {
    const TableDef& t = cat.table_by_oid(root.rte(r).oid);
    for (const auto& g : root.group_by)
      if (g->rti == r && t.column_is_unique(g->col)) {
        determined = rel_set_add(determined, r);
        return;
      }
  });
  bool grew = true;
  while (grew) {
    grew = false;
    rel_set_foreach(m.c_mask & ~determined, [&](int r) {
      for (const auto& q : root.quals) {
        int lrti, lcol, rrti, rcol;
        if (!simple_equi(*q.expr, &lrti, &lcol, &rrti, &rcol)) continue;
        int own_col = -1, other = -1;
        if (lrti == r) {
          own_col = lcol;
          other = rrti;
        } else if (rrti == r) {
          own_col = rcol;
          other = lrti;
        } else {
          continue;
        }
        if (!rel_set_has(determined, other)) continue;
        const TableDef& t = cat.table_by_oid(root.rte(r).oid);
        if (!t.column_is_unique(own_col)) continue;
        determined = rel_set_add(determined, r);
        grew = true;
        return;
      }
    });
  }
  return determined == m.c_mask;
}

QueryTree build_eager_agg(const QueryTree& tree, const Catalog& cat, const EagerMatch& m) {
  const QueryBlock& orig = *tree.root;
  bool simplify = all_outer_rels_determined(orig, cat, m);

  std::vector<int> s_members = rel_set_members(m.s_mask);
  std::vector<int> c_members = rel_set_members(m.c_mask);
  std::vector<int> s_map(orig.rtes.size(), -1);
  std::vector<int> c_map(orig.rtes.size(), -1);
  for (size_t i = 0; i < s_members.size(); ++i) s_map[static_cast<size_t>(s_members[i])] = static_cast<int>(i);
  for (size_t i = 0; i < c_members.size(); ++i) c_map[static_cast<size_t>(c_members[i])] = static_cast<int>(i);
  int t_rti = static_cast<int>(c_members.size());

  auto remap_expr = [](const Expr& e, const std::vector<int>& rel_map) {
    return clone_replacing(e, [&](const Expr& n) -> std::optional<ExprPtr> {
      if (n.op != ExprOp::ColumnRef || n.levels_up != 0) return std::nullopt;
      return make_column(rel_map[static_cast<size_t>(n.rti)], n.col);
    });
  };

  // Pushed-down aggregation block over the aggregation-side rels.
  auto t_block = std::make_unique<QueryBlock>();
  t_block->id = orig.id + 1;
  for (int r : s_members) {
    RangeTableEntry rte;
    rte.kind = RangeTableEntry::Kind::BaseTable;
    rte.oid = orig.rte(r).oid;
    rte.alias = orig.rte(r).alias;
    t_block->rtes.push_back(std::move(rte));
  }
  for (const auto& q : orig.quals)
    if (q.rels != 0 && rel_set_subset(q.rels, m.s_mask))
      t_block->quals.push_back(make_predicate(remap_expr(*q.expr, s_map)));

  // Grouping keys: boundary columns first, then original keys living on the
  // aggregation side.
  std::vector<std::pair<int, int>> keys;
  auto add_key = [&](int rti, int col) {
    for (const auto& k : keys)
      if (k.first == rti && k.second == col) return;
    keys.emplace_back(rti, col);
  };
  for (const auto& e : m.boundary) add_key(e.s_rti, e.s_col);
  for (const auto& g : orig.group_by)
    if (rel_set_has(m.s_mask, g->rti)) add_key(g->rti, g->col);

  for (size_t i = 0; i < keys.size(); ++i) {
    TargetEntry te;
    te.expr = make_column(s_map[static_cast<size_t>(keys[i].first)], keys[i].second);
    te.alias = "k" + std::to_string(i);
    te.type = expr_type(*te.expr, *t_block, cat);
    t_block->group_by.push_back(clone_expr(*te.expr));
    t_block->targets.push_back(std::move(te));
  }

  auto aggs = collect_agg_nodes(orig);
  std::vector<int> agg_ordinal(aggs.size(), -1);
  for (size_t i = 0; i < aggs.size(); ++i) {
    TargetEntry te;
    te.expr = remap_expr(*aggs[i], s_map);
    te.alias = "a" + std::to_string(i);
    te.type = expr_type(*te.expr, *t_block, cat);
    agg_ordinal[i] = static_cast<int>(t_block->targets.size());
    t_block->targets.push_back(std::move(te));
  }

  auto key_ordinal = [&](int rti, int col) {
    for (size_t i = 0; i < keys.size(); ++i)
      if (keys[i].first == rti && keys[i].second == col) return static_cast<int>(i);
    throw PlanError("eager aggregation lost a grouping key");
  };

  // Rewritten top block: outer rels plus the aggregated subquery.
  QueryTree out;
  out.root = std::make_unique<QueryBlock>();
  QueryBlock& top = *out.root;
  top.id = orig.id;
  for (int r : c_members) {
    RangeTableEntry rte;
    rte.kind = RangeTableEntry::Kind::BaseTable;
    rte.oid = orig.rte(r).oid;
    rte.alias = orig.rte(r).alias;
    top.rtes.push_back(std::move(rte));
  }
  {
    RangeTableEntry rte;
    rte.kind = RangeTableEntry::Kind::Subquery;
    rte.alias = "pushed_agg";
    t_block->parent = &top;
    rte.subquery = std::move(t_block);
    top.rtes.push_back(std::move(rte));
  }

  for (const auto& q : orig.quals)
    if (q.rels != 0 && rel_set_subset(q.rels, m.c_mask))
      top.quals.push_back(make_predicate(remap_expr(*q.expr, c_map)));
  for (const auto& e : m.boundary)
    top.quals.push_back(make_predicate(make_bin(BinOpKind::Eq, make_column(c_map[static_cast<size_t>(e.c_rti)], e.c_col),
                                                make_column(t_rti, key_ordinal(e.s_rti, e.s_col)))));

  auto substitute = [&](const Expr& e) {
    return clone_replacing(e, [&](const Expr& n) -> std::optional<ExprPtr> {
      if (n.op == ExprOp::AggCall) {
        int ord = -1;
        for (size_t i = 0; i < aggs.size(); ++i)
          if (expr_equal(*aggs[i], n)) ord = agg_ordinal[i];
        if (ord < 0) throw PlanError("eager aggregation lost an aggregate");
        auto part = make_column(t_rti, ord);
        if (simplify) return part;
        AggKind re = n.agg == AggKind::Count ? AggKind::Sum
                     : n.agg == AggKind::Min ? AggKind::Min
                     : n.agg == AggKind::Max ? AggKind::Max
                                             : AggKind::Sum;
        return make_agg(re, std::move(part));
      }
      if (n.op == ExprOp::ColumnRef && n.levels_up == 0) {
        if (rel_set_has(m.c_mask, n.rti)) return make_column(c_map[static_cast<size_t>(n.rti)], n.col);
        return make_column(t_rti, key_ordinal(n.rti, n.col));
      }
      return std::nullopt;
    });
  };

  for (const auto& t : orig.targets) {
    TargetEntry te;
    te.expr = substitute(*t.expr);
    te.alias = t.alias;
    te.type = expr_type(*te.expr, top, cat);
    top.targets.push_back(std::move(te));
  }
  if (!simplify)
    for (const auto& g : orig.group_by) top.group_by.push_back(substitute(*g));
  for (const auto& o : orig.order_by) {
    SortKey k;
    k.expr = substitute(*o.expr);
    k.desc = o.desc;
    top.order_by.push_back(std::move(k));
  }
  top.distinct = orig.distinct;
  top.limit = orig.limit;
  return out;
}

}  // namespace

void apply_heuristic_rules(QueryTree& tree, const Catalog& cat) {
  (void)cat;
  if (!tree.root) return;
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 32) {
    changed = false;
    for_each_block(*tree.root, [&](QueryBlock& b) {
      if (fold_block(b)) changed = true;
      if (flatten_one_exists(b)) changed = true;
      if (push_down_one(b)) changed = true;
    });
  }
}

std::optional<QueryTree> try_subquery_merge(const QueryTree& tree, const Catalog& cat) {
  if (!tree.root) return std::nullopt;
  int id = find_merge_candidate(*tree.root, cat);
  if (id < 0) return std::nullopt;

  QueryTree out = clone_tree(tree);
  QueryBlock& root = *out.root;
  int qual_idx = bare_sublink_qual(root, id);
  Sublink sl = std::move(root.sublinks[static_cast<size_t>(id)]);
  QueryBlock& child = *sl.child;

  int base = static_cast<int>(root.rtes.size());
  shift_for_merge(child, 0, base);

  root.quals.erase(root.quals.begin() + qual_idx);
  for (auto& q : child.quals) root.quals.push_back(std::move(q));
  for (auto& rte : child.rtes) {
    if (rte.subquery) rte.subquery->parent = &root;
    root.rtes.push_back(std::move(rte));
  }
  for (auto& j : child.sjinfos) {
    j.id = next_sjinfo_id(root);
    root.sjinfos.push_back(std::move(j));
  }
  for (auto& h : child.hints) root.hints.push_back(std::move(h));

  root.quals.push_back(make_predicate(
      make_bin(BinOpKind::Eq, clone_expr(*sl.test_expr), clone_expr(*child.targets[0].expr))));

  root.sublinks.erase(root.sublinks.begin() + id);
  remap_sublink_ids(root, id);
  root.distinct = true;
  return out;
}

std::optional<QueryTree> try_eager_agg(const QueryTree& tree, const Catalog& cat) {
  if (!tree.root) return std::nullopt;
  auto m = match_eager_agg_impl(*tree.root, cat);
  if (!m) return std::nullopt;
  return build_eager_agg(tree, cat, *m);
}

RewriteOutcome run_rewrite_phase(QueryTree tree, OptimizerSession& session) {
  apply_heuristic_rules(tree, session.catalog());
  const Catalog& cat = session.catalog();
  std::vector<RewriteDecision> decisions;

  for (int rule = 0; rule < 2; ++rule) {
    RewriteDecision d;
    d.rule_id = rule == 0 ? "subquery_merge_distinct" : "eager_aggregation";
    std::optional<QueryTree> rewritten =
        rule == 0 ? try_subquery_merge(tree, cat) : try_eager_agg(tree, cat);
    d.matched = rewritten.has_value();
    if (!d.matched) {
      decisions.push_back(std::move(d));
      continue;
    }

    auto compute_guess = [&]() -> std::optional<bool> {
      std::optional<bool> g;
      if (rule == 0) {
        int id = find_merge_candidate(*tree.root, cat);
        if (id >= 0)
          g = guess_subquery_merge(*tree.root, id, cat, session.params().work_mem_bytes);
      } else {
        auto match = match_eager_agg_impl(*tree.root, cat);
        if (match) {
          const EagerEdge& e = match->boundary.front();
          g = guess_eager_agg(*tree.root, e.s_rti, e.s_col, e.c_rti, e.c_col, cat);
        }
      }
      if (g && session.invert_guesses) g = !*g;
      return g;
    };

    int64_t invocations_before = session.counters().cbo_invocations;
    switch (session.mode()) {
      case Mode::Off:
        if (rule == 0) {
          d.applied = true;
        } else {
          d.guess = compute_guess();
          d.applied = d.guess.value_or(false);
        }
        break;
      case Mode::GuessOnly:
        d.guess = compute_guess();
        d.applied = d.guess.value_or(false);
        break;
      case Mode::Naive:
      case Mode::Cache: {
        session.in_qrw_phase = true;
        TreePlan orig = plan_tree(tree, session);
        TreePlan rew = plan_tree(*rewritten, session);
        session.in_qrw_phase = false;
        d.cost_original = orig.root->cost.total;
        d.cost_rewritten = rew.root->cost.total;
        d.applied = d.cost_rewritten < d.cost_original;
        break;
      }
      case Mode::CacheGuess: {
        session.begin_bound_scope();
        d.guess = compute_guess();
        bool predicted_rewrite = d.guess.value_or(false);
        const QueryTree& first = predicted_rewrite ? *rewritten : tree;
        const QueryTree& second = predicted_rewrite ? tree : *rewritten;
        session.in_qrw_phase = true;
        TreePlan winner = plan_tree(first, session);
        session.set_upper_bound(winner.root->cost.total);
        TreePlan loser = plan_tree(second, session);
        session.in_qrw_phase = false;
        double first_total = winner.root->cost.total;
        double second_total = loser.bound_exceeded ? *session.upper_bound() : loser.root->cost.total;
        d.cost_original = predicted_rewrite ? second_total : first_total;
        d.cost_rewritten = predicted_rewrite ? first_total : second_total;
        if (loser.bound_exceeded)
          d.applied = predicted_rewrite;
        else
          d.applied = d.cost_rewritten < d.cost_original;
        session.begin_bound_scope();
        break;
      }
    }
    d.cbo_invocations = static_cast<int>(session.counters().cbo_invocations - invocations_before);
    if (d.applied) tree = std::move(*rewritten);
    decisions.push_back(std::move(d));
  }

  return {std::move(tree), std::move(decisions)};
}

}  // namespace optlab
