#include "optlab/resolver.hpp"

#include <algorithm>

namespace optlab {

namespace {

struct ColumnHit {
  int rti = -1;
  int col = -1;
  int levels_up = 0;
};

class Resolver {
 public:
  explicit Resolver(const Catalog& cat) : cat_(cat) {}

  QueryTree run(const AstSelect& ast) {
    QueryTree tree;
    std::vector<QueryBlock*> scopes;
    tree.root = resolve_select(ast, nullptr, scopes);
    return tree;
  }

 private:
  // `scopes` holds enclosing blocks, innermost last; the block under
  // construction is appended for its own expressions.
  std::unique_ptr<QueryBlock> resolve_select(const AstSelect& sel, QueryBlock* parent,
                                             std::vector<QueryBlock*>& scopes) {
    auto block = std::make_unique<QueryBlock>();
    block->id = next_block_id_++;
    block->parent = parent;

    for (const auto& ref : sel.from) add_table_ref(*block, *ref, scopes, nullptr);
    if (block->rtes.size() > 64) throw ResolveError("query block exceeds 64 rels");

    scopes.push_back(block.get());

    for (const auto& ref : sel.from)
      if (ref->is_join) resolve_join_quals(*block, *ref, scopes);

    if (sel.where) {
      std::vector<const AstExpr*> conjuncts;
      split_and(*sel.where, conjuncts);
      for (const AstExpr* c : conjuncts) {
        ExprPtr e = resolve_expr(*c, *block, scopes, /*allow_agg=*/false);
        block->quals.push_back(make_predicate(std::move(e)));
      }
    }

    for (const auto& item : sel.items) {
      if (item.expr->op == AstExprOp::Star) {
        expand_star(*block, item.expr->qualifier, item.expr->offset);
        continue;
      }
      TargetEntry t;
      t.expr = resolve_expr(*item.expr, *block, scopes, /*allow_agg=*/true);
      t.alias = item.alias.empty() ? default_alias(*item.expr, static_cast<int>(block->targets.size()))
                                   : item.alias;
      t.type = expr_type(*t.expr, *block, cat_);
      block->targets.push_back(std::move(t));
    }
    if (block->targets.empty()) throw ResolveError("select list is empty");

    for (const auto& g : sel.group_by)
      block->group_by.push_back(resolve_expr(*g, *block, scopes, /*allow_agg=*/false));

    for (const auto& o : sel.order_by) {
      SortKey key;
      key.desc = o.desc;
      key.expr = resolve_order_expr(*o.expr, *block, scopes);
      block->order_by.push_back(std::move(key));
    }

    block->distinct = sel.distinct;
    block->limit = sel.limit;

    for (const auto& h : sel.hints) {
      HintSpec spec;
      spec.method = h.method;
      spec.table_names = h.tables;
      for (const auto& name : h.tables) {
        int rti = find_rte(*block, name);
        if (rti < 0) throw ResolveError("hint references unknown table '" + name + "'");
        spec.rels = rel_set_add(spec.rels, rti);
      }
      if (rel_set_count(spec.rels) < 2)
        throw ResolveError("join method hint needs at least two distinct tables");
      block->hints.push_back(std::move(spec));
    }

    scopes.pop_back();
    return block;
  }

  static void split_and(const AstExpr& e, std::vector<const AstExpr*>& out) {
    if (e.op == AstExprOp::BinOp && e.bin == BinOpKind::And) {
      split_and(*e.children[0], out);
      split_and(*e.children[1], out);
      return;
    }
    out.push_back(&e);
  }

  void add_table_ref(QueryBlock& block, const AstTableRef& ref, std::vector<QueryBlock*>& scopes,
                     RelSet* rels_out) {
    if (ref.is_join) {
      RelSet left_rels = 0, right_rels = 0;
      add_table_ref(block, *ref.left, scopes, &left_rels);
      add_table_ref(block, *ref.right, scopes, &right_rels);
      if (rels_out) *rels_out |= left_rels | right_rels;
      // Join quals need the full range table; resolved in a second pass.
      join_sides_.push_back({&ref, left_rels, right_rels});
      return;
    }
    RangeTableEntry rte;
    rte.alias = ref.alias;
    if (find_rte(block, ref.alias) >= 0)
      throw ResolveError("duplicate table alias '" + ref.alias + "'");
    if (ref.subquery) {
      rte.kind = RangeTableEntry::Kind::Subquery;
      // Derived tables see only enclosing blocks, not siblings.
      rte.subquery = resolve_select(*ref.subquery, &block, scopes);
    } else {
      const TableDef* t = cat_.find_table(ref.table_name);
      if (!t) throw ResolveError("unknown table '" + ref.table_name + "'");
      rte.kind = RangeTableEntry::Kind::BaseTable;
      rte.oid = t->oid;
    }
    if (rels_out) *rels_out = rel_set_add(*rels_out, static_cast<int>(block.rtes.size()));
    block.rtes.push_back(std::move(rte));
  }

  void resolve_join_quals(QueryBlock& block, const AstTableRef& ref, std::vector<QueryBlock*>& scopes) {
    if (ref.left && ref.left->is_join) resolve_join_quals(block, *ref.left, scopes);
    if (ref.right && ref.right->is_join) resolve_join_quals(block, *ref.right, scopes);
    auto it = std::find_if(join_sides_.begin(), join_sides_.end(),
                           [&](const JoinSides& j) { return j.node == &ref; });
    if (it == join_sides_.end()) return;
    std::vector<const AstExpr*> conjuncts;
    split_and(*ref.on_qual, conjuncts);
    std::vector<Predicate> quals;
    RelSet qual_rels = 0;
    for (const AstExpr* c : conjuncts) {
      Predicate p = make_predicate(resolve_expr(*c, block, scopes, /*allow_agg=*/false));
      qual_rels |= p.rels;
      quals.push_back(std::move(p));
    }
    if (ref.join_kind == AstJoinKind::Inner) {
      for (auto& q : quals) block.quals.push_back(std::move(q));
      return;
    }
    SpecialJoinInfo sj;
    sj.id = static_cast<int>(block.sjinfos.size());
    sj.type = JoinType::Left;
    sj.min_left = qual_rels & it->left_rels;
    if (rel_set_empty(sj.min_left)) sj.min_left = it->left_rels;
    sj.min_right = it->right_rels;
    sj.quals = std::move(quals);
    block.sjinfos.push_back(std::move(sj));
  }

  int find_rte(const QueryBlock& block, const std::string& alias) const {
    for (size_t i = 0; i < block.rtes.size(); ++i)
      if (block.rtes[i].alias == alias) return static_cast<int>(i);
    return -1;
  }

  int find_column_in_rel(const QueryBlock& block, int rti, const std::string& name) const {
    const RangeTableEntry& rte = block.rte(rti);
    if (rte.is_base()) return cat_.table_by_oid(rte.oid).column_ordinal(name);
    const auto& targets = rte.subquery->targets;
    for (size_t i = 0; i < targets.size(); ++i)
      if (targets[i].alias == name) return static_cast<int>(i);
    return -1;
  }

  ColumnHit find_column(const std::string& qualifier, const std::string& name, QueryBlock& block,
                        std::vector<QueryBlock*>& scopes, size_t offset) const {
    // scopes has the current block last; walk outward.
    for (size_t depth = 0; depth < scopes.size(); ++depth) {
      QueryBlock& blk = *scopes[scopes.size() - 1 - depth];
      if (!qualifier.empty()) {
        int rti = find_rte(blk, qualifier);
        if (rti < 0) continue;
        int col = find_column_in_rel(blk, rti, name);
        if (col < 0)
          throw ResolveError("column '" + qualifier + "." + name + "' does not exist (offset " +
                             std::to_string(offset) + ")");
        return {rti, col, static_cast<int>(depth)};
      }
      ColumnHit hit;
      int found = 0;
      for (size_t rti = 0; rti < blk.rtes.size(); ++rti) {
        int col = find_column_in_rel(blk, static_cast<int>(rti), name);
        if (col >= 0) {
          ++found;
          hit = {static_cast<int>(rti), col, static_cast<int>(depth)};
        }
      }
      if (found > 1)
        throw ResolveError("column '" + name + "' is ambiguous (offset " + std::to_string(offset) + ")");
      if (found == 1) return hit;
    }
    (void)block;
    std::string shown = qualifier.empty() ? name : qualifier + "." + name;
    throw ResolveError("column '" + shown + "' does not exist (offset " + std::to_string(offset) + ")");
  }

  ExprPtr resolve_expr(const AstExpr& e, QueryBlock& block, std::vector<QueryBlock*>& scopes,
                       bool allow_agg) {
    switch (e.op) {
      case AstExprOp::ColumnName: {
        ColumnHit hit = find_column(e.qualifier, e.name, block, scopes, e.offset);
        return make_column(hit.rti, hit.col, hit.levels_up);
      }
      case AstExprOp::Star:
        throw ResolveError("'*' is only allowed as a select item");
      case AstExprOp::Literal:
        return make_literal(e.value);
      case AstExprOp::BinOp:
        return make_bin(e.bin, resolve_expr(*e.children[0], block, scopes, allow_agg),
                        resolve_expr(*e.children[1], block, scopes, allow_agg));
      case AstExprOp::InList: {
        ExprPtr needle = resolve_expr(*e.children[0], block, scopes, allow_agg);
        std::vector<ExprPtr> items;
        for (size_t i = 1; i < e.children.size(); ++i)
          items.push_back(resolve_expr(*e.children[i], block, scopes, allow_agg));
        ExprPtr in = make_in_list(std::move(needle), std::move(items));
        if (!e.negated) return in;
        // NOT IN (list) is not used by any rewrite; reject rather than
        // silently flipping semantics.
        throw ResolveError("NOT IN over a value list is not supported");
      }
      case AstExprOp::InSubquery: {
        Sublink sl;
        sl.kind = Sublink::Kind::In;
        sl.negated = e.negated;
        sl.test_expr = resolve_expr(*e.children[0], block, scopes, /*allow_agg=*/false);
        sl.child = resolve_select(*e.subquery, &block, scopes);
        if (sl.child->targets.size() != 1)
          throw ResolveError("IN subquery must produce exactly one column");
        block.sublinks.push_back(std::move(sl));
        return make_sublink_ref(static_cast<int>(block.sublinks.size()) - 1);
      }
      case AstExprOp::Exists: {
        Sublink sl;
        sl.kind = Sublink::Kind::Exists;
        sl.negated = e.negated;
        sl.child = resolve_select(*e.subquery, &block, scopes);
        block.sublinks.push_back(std::move(sl));
        return make_sublink_ref(static_cast<int>(block.sublinks.size()) - 1);
      }
      case AstExprOp::ScalarSubquery: {
        Sublink sl;
        sl.kind = Sublink::Kind::Scalar;
        sl.child = resolve_select(*e.subquery, &block, scopes);
        if (sl.child->targets.size() != 1)
          throw ResolveError("scalar subquery must produce exactly one column");
        block.sublinks.push_back(std::move(sl));
        return make_sublink_ref(static_cast<int>(block.sublinks.size()) - 1);
      }
      case AstExprOp::AggCall: {
        if (!allow_agg)
          throw ResolveError("aggregate calls are only allowed in the select and order lists");
        ExprPtr arg;
        if (!e.star_arg) arg = resolve_expr(*e.children[0], block, scopes, /*allow_agg=*/false);
        return make_agg(e.agg, std::move(arg));
      }
    }
    throw ResolveError("unexpected expression form");
  }

  // ORDER BY resolves select-list aliases first, then ordinary columns.
  ExprPtr resolve_order_expr(const AstExpr& e, QueryBlock& block, std::vector<QueryBlock*>& scopes) {
    if (e.op == AstExprOp::ColumnName && e.qualifier.empty()) {
      for (const auto& t : block.targets)
        if (t.alias == e.name) return clone_expr(*t.expr);
    }
    return resolve_expr(e, block, scopes, /*allow_agg=*/true);
  }

  void expand_star(QueryBlock& block, const std::string& qualifier, size_t offset) {
    auto expand_rel = [&](int rti) {
      int ncols = block_rel_column_count(block, cat_, rti);
      for (int col = 0; col < ncols; ++col) {
        TargetEntry t;
        t.expr = make_column(rti, col);
        t.alias = block_column_name(block, cat_, rti, col);
        t.type = block_column_type(block, cat_, rti, col);
        block.targets.push_back(std::move(t));
      }
    };
    if (qualifier.empty()) {
      for (size_t rti = 0; rti < block.rtes.size(); ++rti) expand_rel(static_cast<int>(rti));
      return;
    }
    int rti = find_rte(block, qualifier);
    if (rti < 0)
      throw ResolveError("unknown table '" + qualifier + "' in select item (offset " +
                         std::to_string(offset) + ")");
    expand_rel(rti);
  }

  static std::string default_alias(const AstExpr& e, int ordinal) {
    if (e.op == AstExprOp::ColumnName) return e.name;
    if (e.op == AstExprOp::AggCall) return agg_kind_name(e.agg);
    return "col" + std::to_string(ordinal);
  }

  struct JoinSides {
    const AstTableRef* node;
    RelSet left_rels;
    RelSet right_rels;
  };

  const Catalog& cat_;
  int next_block_id_ = 0;
  std::vector<JoinSides> join_sides_;
};

}  // namespace

QueryTree resolve(const AstSelect& ast, const Catalog& cat) { return Resolver(cat).run(ast); }

QueryTree analyze_query(const std::string& sql, const Catalog& cat) {
  AstSelectPtr ast = parse_query(sql);
  QueryTree tree = resolve(*ast, cat);
  validate_tree(tree, cat);
  return tree;
}

}  // namespace optlab
