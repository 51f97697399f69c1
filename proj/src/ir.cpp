#include "optlab/ir.hpp"

#include <algorithm>
#include <sstream>

namespace optlab {

const char* join_type_name(JoinType t) {
  switch (t) {
    case JoinType::Inner: return "inner";
    case JoinType::Left: return "left";
    case JoinType::Semi: return "semi";
    case JoinType::Anti: return "anti";
  }
  return "?";
}

Predicate make_predicate(ExprPtr expr) {
  Predicate p;
  p.expr = std::move(expr);
  refresh_predicate(p);
  return p;
}

void refresh_predicate(Predicate& p) {
  ExprRefs refs = collect_refs(*p.expr);
  p.rels = refs.rels;
  p.has_outer_ref = refs.has_outer_ref;
  p.has_sublink = refs.has_sublink;
}

Predicate clone_predicate(const Predicate& p) {
  Predicate out;
  out.expr = clone_expr(*p.expr);
  out.rels = p.rels;
  out.has_outer_ref = p.has_outer_ref;
  out.has_sublink = p.has_sublink;
  return out;
}

SpecialJoinInfo clone_sjinfo(const SpecialJoinInfo& j) {
  SpecialJoinInfo out;
  out.id = j.id;
  out.type = j.type;
  out.min_left = j.min_left;
  out.min_right = j.min_right;
  out.quals.reserve(j.quals.size());
  for (const auto& q : j.quals) out.quals.push_back(clone_predicate(q));
  return out;
}

RelSet QueryBlock::all_rels() const {
  RelSet s = 0;
  for (size_t i = 0; i < rtes.size(); ++i) s = rel_set_add(s, static_cast<int>(i));
  return s;
}

std::unique_ptr<QueryBlock> clone_block(const QueryBlock& b, QueryBlock* parent) {
  auto out = std::make_unique<QueryBlock>();
  out->id = b.id;
  out->parent = parent;
  out->rtes.reserve(b.rtes.size());
  for (const auto& rte : b.rtes) {
    RangeTableEntry copy;
    copy.kind = rte.kind;
    copy.oid = rte.oid;
    copy.alias = rte.alias;
    if (rte.subquery) copy.subquery = clone_block(*rte.subquery, out.get());
    out->rtes.push_back(std::move(copy));
  }
  for (const auto& q : b.quals) {
    Predicate p;
    p.expr = clone_expr(*q.expr);
    p.rels = q.rels;
    p.has_outer_ref = q.has_outer_ref;
    p.has_sublink = q.has_sublink;
    out->quals.push_back(std::move(p));
  }
  for (const auto& sj : b.sjinfos) {
    SpecialJoinInfo copy;
    copy.id = sj.id;
    copy.type = sj.type;
    copy.min_left = sj.min_left;
    copy.min_right = sj.min_right;
    for (const auto& q : sj.quals) {
      Predicate p;
      p.expr = clone_expr(*q.expr);
      p.rels = q.rels;
      p.has_outer_ref = q.has_outer_ref;
      p.has_sublink = q.has_sublink;
      copy.quals.push_back(std::move(p));
    }
    out->sjinfos.push_back(std::move(copy));
  }
  for (const auto& sl : b.sublinks) {
    Sublink copy;
    copy.kind = sl.kind;
    copy.negated = sl.negated;
    if (sl.test_expr) copy.test_expr = clone_expr(*sl.test_expr);
    if (sl.child) copy.child = clone_block(*sl.child, out.get());
    out->sublinks.push_back(std::move(copy));
  }
  for (const auto& t : b.targets) {
    TargetEntry copy;
    copy.expr = clone_expr(*t.expr);
    copy.alias = t.alias;
    copy.type = t.type;
    out->targets.push_back(std::move(copy));
  }
  out->distinct = b.distinct;
  for (const auto& g : b.group_by) out->group_by.push_back(clone_expr(*g));
  for (const auto& s : b.order_by) {
    SortKey copy;
    copy.expr = clone_expr(*s.expr);
    copy.desc = s.desc;
    out->order_by.push_back(std::move(copy));
  }
  out->limit = b.limit;
  out->hints = b.hints;
  return out;
}

QueryTree clone_tree(const QueryTree& t) {
  QueryTree out;
  if (t.root) out.root = clone_block(*t.root, nullptr);
  return out;
}

namespace {

bool preds_equal(const std::vector<Predicate>& a, const std::vector<Predicate>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!expr_equal(*a[i].expr, *b[i].expr)) return false;
  return true;
}

bool block_equal_impl(const QueryBlock& a, const QueryBlock& b, bool exact_targets,
                      std::vector<int>* out_map) {
  if (a.rtes.size() != b.rtes.size()) return false;
  for (size_t i = 0; i < a.rtes.size(); ++i) {
    const auto& ra = a.rtes[i];
    const auto& rb = b.rtes[i];
    if (ra.kind != rb.kind) return false;
    if (ra.kind == RangeTableEntry::Kind::BaseTable) {
      if (ra.oid != rb.oid) return false;
    } else {
      if (!block_equal(*ra.subquery, *rb.subquery)) return false;
    }
  }
  if (!preds_equal(a.quals, b.quals)) return false;
  if (a.sjinfos.size() != b.sjinfos.size()) return false;
  for (size_t i = 0; i < a.sjinfos.size(); ++i) {
    const auto& sa = a.sjinfos[i];
    const auto& sb = b.sjinfos[i];
    if (sa.type != sb.type || sa.min_left != sb.min_left || sa.min_right != sb.min_right) return false;
    if (!preds_equal(sa.quals, sb.quals)) return false;
  }
  if (a.sublinks.size() != b.sublinks.size()) return false;
  for (size_t i = 0; i < a.sublinks.size(); ++i) {
    const auto& la = a.sublinks[i];
    const auto& lb = b.sublinks[i];
    if (la.kind != lb.kind || la.negated != lb.negated) return false;
    if (static_cast<bool>(la.test_expr) != static_cast<bool>(lb.test_expr)) return false;
    if (la.test_expr && !expr_equal(*la.test_expr, *lb.test_expr)) return false;
    if (static_cast<bool>(la.child) != static_cast<bool>(lb.child)) return false;
    if (la.child && !block_equal(*la.child, *lb.child)) return false;
  }
  if (a.distinct != b.distinct || a.limit != b.limit) return false;
  if (a.group_by.size() != b.group_by.size()) return false;
  for (size_t i = 0; i < a.group_by.size(); ++i)
    if (!expr_equal(*a.group_by[i], *b.group_by[i])) return false;
  if (a.order_by.size() != b.order_by.size()) return false;
  for (size_t i = 0; i < a.order_by.size(); ++i) {
    if (a.order_by[i].desc != b.order_by[i].desc) return false;
    if (!expr_equal(*a.order_by[i].expr, *b.order_by[i].expr)) return false;
  }
  if (a.hints.size() != b.hints.size()) return false;
  for (size_t i = 0; i < a.hints.size(); ++i)
    if (a.hints[i].method != b.hints[i].method || a.hints[i].rels != b.hints[i].rels) return false;

  if (a.targets.size() != b.targets.size()) return false;
  if (exact_targets) {
    for (size_t i = 0; i < a.targets.size(); ++i) {
      if (a.targets[i].type != b.targets[i].type) return false;
      if (!expr_equal(*a.targets[i].expr, *b.targets[i].expr)) return false;
    }
    return true;
  }
  std::vector<int> map(a.targets.size(), -1);
  std::vector<bool> used(b.targets.size(), false);
  for (size_t i = 0; i < a.targets.size(); ++i) {
    for (size_t j = 0; j < b.targets.size(); ++j) {
      if (used[j] || a.targets[i].type != b.targets[j].type) continue;
      if (!expr_equal(*a.targets[i].expr, *b.targets[j].expr)) continue;
      map[i] = static_cast<int>(j);
      used[j] = true;
      break;
    }
    if (map[i] < 0) return false;
  }
  if (out_map) *out_map = std::move(map);
  return true;
}

}  // namespace

bool block_equal(const QueryBlock& a, const QueryBlock& b) {
  return block_equal_impl(a, b, /*exact_targets=*/true, nullptr);
}

bool block_equal_modulo_targets(const QueryBlock& a, const QueryBlock& b, std::vector<int>* out_map) {
  return block_equal_impl(a, b, /*exact_targets=*/false, out_map);
}

bool CecClass::has_member(int rti, int col) const {
  return std::find(members.begin(), members.end(), std::make_pair(rti, col)) != members.end();
}

std::vector<CecClass> derive_cecs(const QueryBlock& b) {
  // Union-find keyed by (rti, col); each qual that actually merges two
  // components is kept as a source predicate, giving a spanning subset.
  std::vector<std::pair<int, int>> nodes;
  std::vector<int> uf_parent;
  auto node_id = [&](int rti, int col) {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].first == rti && nodes[i].second == col) return static_cast<int>(i);
    nodes.emplace_back(rti, col);
    uf_parent.push_back(static_cast<int>(nodes.size()) - 1);
    return static_cast<int>(nodes.size()) - 1;
  };
  std::function<int(int)> find = [&](int x) {
    while (uf_parent[x] != x) {
      uf_parent[x] = uf_parent[uf_parent[x]];
      x = uf_parent[x];
    }
    return x;
  };
  std::vector<std::pair<int, int>> unions;  // (surviving root, qual id) per successful union
  for (size_t qi = 0; qi < b.quals.size(); ++qi) {
    const Predicate& q = b.quals[qi];
    if (q.has_sublink || q.has_outer_ref) continue;
    const Expr& e = *q.expr;
    if (e.op != ExprOp::BinOp || e.bin != BinOpKind::Eq) continue;
    const Expr& l = *e.children[0];
    const Expr& r = *e.children[1];
    if (l.op != ExprOp::ColumnRef || r.op != ExprOp::ColumnRef) continue;
    if (l.levels_up != 0 || r.levels_up != 0) continue;
    int a = node_id(l.rti, l.col);
    int c = node_id(r.rti, r.col);
    int ra = find(a), rc = find(c);
    if (ra == rc) continue;
    uf_parent[ra] = rc;
    unions.emplace_back(rc, static_cast<int>(qi));
  }

  // Group nodes by root.
  std::vector<CecClass> out;
  std::vector<int> root_of(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) root_of[i] = find(static_cast<int>(i));
  std::vector<int> root_class(nodes.size(), -1);
  for (size_t i = 0; i < nodes.size(); ++i) {
    int r = root_of[i];
    if (root_class[r] < 0) {
      root_class[r] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[root_class[r]].members.push_back(nodes[i]);
  }
  for (auto& [united_root, qual_id] : unions) {
    int r = find(united_root);
    out[root_class[r]].source_qual_ids.push_back(qual_id);
  }
  std::vector<CecClass> kept;
  for (auto& c : out) {
    if (c.members.size() < 2) continue;
    std::sort(c.members.begin(), c.members.end());
    std::sort(c.source_qual_ids.begin(), c.source_qual_ids.end());
    kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(),
            [](const CecClass& a, const CecClass& b) { return a.members < b.members; });
  return kept;
}

int count_lateral_rels(const QueryBlock& b) {
  RelSet lateral = 0;
  for (const auto& q : b.quals)
    if (q.has_outer_ref) lateral |= q.rels;
  return rel_set_count(lateral);
}

const QueryBlock* walk_up(const QueryBlock* b, int levels) {
  while (levels-- > 0) {
    if (!b->parent) throw PlanError("column reference walks past the outermost block");
    b = b->parent;
  }
  return b;
}

DataType block_column_type(const QueryBlock& b, const Catalog& cat, int rti, int col) {
  const RangeTableEntry& rte = b.rte(rti);
  if (rte.is_base()) return cat.table_by_oid(rte.oid).column(col).type;
  return rte.subquery->targets.at(static_cast<size_t>(col)).type;
}

std::string block_column_name(const QueryBlock& b, const Catalog& cat, int rti, int col) {
  const RangeTableEntry& rte = b.rte(rti);
  if (rte.is_base()) return cat.table_by_oid(rte.oid).column(col).name;
  return rte.subquery->targets.at(static_cast<size_t>(col)).alias;
}

int block_rel_column_count(const QueryBlock& b, const Catalog& cat, int rti) {
  const RangeTableEntry& rte = b.rte(rti);
  if (rte.is_base()) return static_cast<int>(cat.table_by_oid(rte.oid).columns.size());
  return static_cast<int>(rte.subquery->targets.size());
}

ColumnNamer block_namer(const QueryBlock& b, const Catalog& cat) {
  const QueryBlock* base = &b;
  return [base, &cat](int rti, int col, int levels_up) {
    const QueryBlock* blk = walk_up(base, levels_up);
    const RangeTableEntry& rte = blk->rte(rti);
    return rte.alias + "." + block_column_name(*blk, cat, rti, col);
  };
}

DataType expr_type(const Expr& e, const QueryBlock& b, const Catalog& cat) {
  switch (e.op) {
    case ExprOp::ColumnRef: {
      const QueryBlock* blk = walk_up(&b, e.levels_up);
      return block_column_type(*blk, cat, e.rti, e.col);
    }
    case ExprOp::Literal:
      switch (e.value.kind) {
        case Datum::Kind::Decimal: return DataType::Decimal;
        case Datum::Kind::Text: return DataType::Text;
        case Datum::Kind::Date: return DataType::Date;
        default: return DataType::Int;
      }
    case ExprOp::BinOp: {
      switch (e.bin) {
        case BinOpKind::Add:
        case BinOpKind::Sub:
        case BinOpKind::Mul: {
          DataType l = expr_type(*e.children[0], b, cat);
          DataType r = expr_type(*e.children[1], b, cat);
          if (l == DataType::Date || r == DataType::Date) return DataType::Date;
          if (l == DataType::Decimal || r == DataType::Decimal) return DataType::Decimal;
          return DataType::Int;
        }
        default: return DataType::Int;
      }
    }
    case ExprOp::InList: return DataType::Int;
    case ExprOp::AggCall:
      if (e.agg == AggKind::Count) return DataType::Int;
      return e.children.empty() ? DataType::Int : expr_type(*e.children[0], b, cat);
    case ExprOp::SublinkRef: return DataType::Int;
  }
  return DataType::Int;
}

namespace {

std::string rel_set_str(RelSet s) {
  std::string out = "{";
  bool first = true;
  rel_set_foreach(s, [&](int rti) {
    if (!first) out += ",";
    out += std::to_string(rti);
    first = false;
  });
  return out + "}";
}

ColumnNamer dump_namer(const QueryBlock& b, const Catalog& cat) {
  const QueryBlock* base = &b;
  return [base, &cat](int rti, int col, int levels_up) {
    const QueryBlock* blk = walk_up(base, levels_up);
    std::string name = blk->rte(rti).alias + "." + block_column_name(*blk, cat, rti, col);
    for (int i = 0; i < levels_up; ++i) name += "^";
    return name;
  };
}

}  // namespace

std::string dump_block(const QueryBlock& b, const Catalog& cat, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  std::ostringstream os;
  ColumnNamer namer = dump_namer(b, cat);
  os << pad << "block\n";
  for (size_t i = 0; i < b.rtes.size(); ++i) {
    const auto& rte = b.rtes[i];
    if (rte.is_base()) {
      os << pad << "  rte " << i << ": table oid=" << rte.oid << " alias=" << rte.alias << "\n";
    } else {
      os << pad << "  rte " << i << ": subquery alias=" << rte.alias << "\n";
      os << dump_block(*rte.subquery, cat, indent + 2);
    }
  }
  for (const auto& q : b.quals)
    os << pad << "  qual: " << expr_to_string(*q.expr, namer) << " rels=" << rel_set_str(q.rels) << "\n";
  for (const auto& sj : b.sjinfos) {
    os << pad << "  sjinfo " << join_type_name(sj.type) << " min_left=" << rel_set_str(sj.min_left)
       << " min_right=" << rel_set_str(sj.min_right);
    for (const auto& q : sj.quals) os << " qual: " << expr_to_string(*q.expr, namer);
    os << "\n";
  }
  for (size_t i = 0; i < b.sublinks.size(); ++i) {
    const auto& sl = b.sublinks[i];
    os << pad << "  sublink " << i << ": "
       << (sl.kind == Sublink::Kind::In ? "in" : sl.kind == Sublink::Kind::Exists ? "exists" : "scalar")
       << (sl.negated ? " negated" : "");
    if (sl.test_expr) os << " test=" << expr_to_string(*sl.test_expr, namer);
    os << "\n";
    if (sl.child) os << dump_block(*sl.child, cat, indent + 2);
  }
  for (size_t i = 0; i < b.targets.size(); ++i)
    os << pad << "  target " << i << ": " << expr_to_string(*b.targets[i].expr, namer) << " as "
       << b.targets[i].alias << " [" << data_type_name(b.targets[i].type) << "]\n";
  if (b.distinct) os << pad << "  distinct\n";
  for (const auto& g : b.group_by) os << pad << "  group by: " << expr_to_string(*g, namer) << "\n";
  for (const auto& s : b.order_by)
    os << pad << "  order by: " << expr_to_string(*s.expr, namer) << (s.desc ? " desc" : " asc") << "\n";
  if (b.limit) os << pad << "  limit " << *b.limit << "\n";
  for (const auto& h : b.hints)
    os << pad << "  hint: " << join_method_name(h.method) << " rels=" << rel_set_str(h.rels) << "\n";
  return os.str();
}

std::string dump_tree(const QueryTree& t, const Catalog& cat) {
  return t.root ? dump_block(*t.root, cat, 0) : std::string("empty\n");
}

namespace {

void validate_expr(const Expr& e, const QueryBlock& b, const Catalog& cat) {
  walk_expr(e, [&](const Expr& n) {
    if (n.op == ExprOp::ColumnRef) {
      const QueryBlock* blk = walk_up(&b, n.levels_up);
      if (n.rti < 0 || static_cast<size_t>(n.rti) >= blk->rtes.size())
        throw PlanError("column reference to rel " + std::to_string(n.rti) + " out of range");
      int ncols = block_rel_column_count(*blk, cat, n.rti);
      if (n.col < 0 || n.col >= ncols)
        throw PlanError("column ordinal " + std::to_string(n.col) + " out of range for rel " +
                        std::to_string(n.rti));
    } else if (n.op == ExprOp::SublinkRef) {
      if (n.sublink_id < 0 || static_cast<size_t>(n.sublink_id) >= b.sublinks.size())
        throw PlanError("dangling sublink reference " + std::to_string(n.sublink_id));
    }
  });
}

void validate_block(const QueryBlock& b, const Catalog& cat, const QueryBlock* expected_parent) {
  if (b.parent != expected_parent) throw PlanError("block parent pointer is stale");
  if (b.rtes.empty()) throw PlanError("block has no rels");
  if (b.rtes.size() > 64) throw PlanError("block exceeds 64 rels");
  if (b.targets.empty()) throw PlanError("block has no targets");
  for (const auto& rte : b.rtes) {
    if (rte.is_base()) {
      if (!cat.find_table_by_oid(rte.oid)) throw PlanError("rte names unknown oid " + std::to_string(rte.oid));
    } else {
      if (!rte.subquery) throw PlanError("subquery rte without child block");
      validate_block(*rte.subquery, cat, &b);
    }
  }
  for (const auto& q : b.quals) {
    validate_expr(*q.expr, b, cat);
    ExprRefs refs = collect_refs(*q.expr);
    if (refs.rels != q.rels || refs.has_outer_ref != q.has_outer_ref || refs.has_sublink != q.has_sublink)
      throw PlanError("predicate rel-set cache is stale");
  }
  for (const auto& sj : b.sjinfos) {
    if (!rel_set_subset(sj.min_left, b.all_rels()) || !rel_set_subset(sj.min_right, b.all_rels()))
      throw PlanError("sjinfo min sets out of range");
    if (rel_set_empty(sj.min_right)) throw PlanError("sjinfo with empty min_right");
    for (const auto& q : sj.quals) validate_expr(*q.expr, b, cat);
  }
  for (const auto& sl : b.sublinks) {
    if (sl.test_expr) validate_expr(*sl.test_expr, b, cat);
    if (sl.child) validate_block(*sl.child, cat, &b);
  }
  for (const auto& t : b.targets) validate_expr(*t.expr, b, cat);
  for (const auto& g : b.group_by) validate_expr(*g, b, cat);
  for (const auto& s : b.order_by) validate_expr(*s.expr, b, cat);
  for (const auto& h : b.hints)
    if (!rel_set_subset(h.rels, b.all_rels()) || rel_set_count(h.rels) < 2)
      throw PlanError("hint rel set invalid");
}

}  // namespace

void validate_tree(const QueryTree& t, const Catalog& cat) {
  if (!t.root) throw PlanError("tree has no root block");
  validate_block(*t.root, cat, nullptr);
}

}  // namespace optlab
