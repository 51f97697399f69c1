#include "optlab/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "optlab/selectivity.hpp"

namespace optlab {

namespace {

bool is_block_level_qual(const Predicate& q) { return q.has_sublink || q.rels == 0; }

bool is_restriction_on(const Predicate& q, int rti) {
  return !is_block_level_qual(q) && q.rels == rel_set_of(rti);
}

// Visits the block's own expressions; nested blocks are not entered.
void for_each_block_expr(const QueryBlock& b, const std::function<void(const Expr&)>& fn) {
  for (const auto& q : b.quals) fn(*q.expr);
  for (const auto& j : b.sjinfos)
    for (const auto& q : j.quals) fn(*q.expr);
  for (const auto& sl : b.sublinks)
    if (sl.test_expr) fn(*sl.test_expr);
  for (const auto& t : b.targets) fn(*t.expr);
  for (const auto& g : b.group_by) fn(*g);
  for (const auto& o : b.order_by) fn(*o.expr);
}

// True when any expression in the block subtree references a rel above it.
bool has_escaping_refs(const QueryBlock& b, int depth) {
  bool found = false;
  for_each_block_expr(b, [&](const Expr& e) {
    walk_expr(e, [&](const Expr& n) {
      if (n.op == ExprOp::ColumnRef && n.levels_up > depth) found = true;
    });
  });
  if (found) return true;
  for (const auto& rte : b.rtes)
    if (!rte.is_base() && has_escaping_refs(*rte.subquery, depth + 1)) return true;
  for (const auto& sl : b.sublinks)
    if (has_escaping_refs(*sl.child, depth + 1)) return true;
  return false;
}

void collect_refs_at_depth(const QueryBlock& b, int depth, std::set<std::pair<int, int>>& out) {
  for_each_block_expr(b, [&](const Expr& e) {
    walk_expr(e, [&](const Expr& n) {
      if (n.op == ExprOp::ColumnRef && n.levels_up == depth) out.emplace(n.rti, n.col);
    });
  });
  for (const auto& rte : b.rtes)
    if (!rte.is_base()) collect_refs_at_depth(*rte.subquery, depth + 1, out);
  for (const auto& sl : b.sublinks) collect_refs_at_depth(*sl.child, depth + 1, out);
}

// Columns of each rel consumed anywhere in the block or by nested blocks.
std::vector<std::vector<int>> collect_referenced_cols(const QueryBlock& b) {
  std::set<std::pair<int, int>> refs;
  collect_refs_at_depth(b, 0, refs);
  std::vector<std::vector<int>> out(b.rtes.size());
  for (const auto& [rti, col] : refs)
    if (rti >= 0 && static_cast<size_t>(rti) < out.size()) out[static_cast<size_t>(rti)].push_back(col);
  return out;
}

// Per-row comparison work of one qual on a scan: list membership costs one
// probe per element, everything else one operation.
double qual_op_count(const Predicate& q) {
  if (q.expr->op == ExprOp::InList) return static_cast<double>(q.expr->children.size() - 1);
  return 1.0;
}

bool is_big_inlist(const Predicate& q) {
  return q.expr->op == ExprOp::InList && q.expr->children.size() - 1 >= 4;
}

int count_aggs(const QueryBlock& b) {
  int n = 0;
  auto counter = [&](const Expr& e) {
    walk_expr(e, [&](const Expr& node) {
      if (node.op == ExprOp::AggCall) ++n;
    });
  };
  for (const auto& t : b.targets) counter(*t.expr);
  for (const auto& o : b.order_by) counter(*o.expr);
  return n;
}

bool block_has_aggs(const QueryBlock& b) {
  for (const auto& t : b.targets)
    if (collect_refs(*t.expr).has_agg) return true;
  for (const auto& o : b.order_by)
    if (collect_refs(*o.expr).has_agg) return true;
  return false;
}

int block_output_width(const QueryBlock& b, const Catalog& cat) {
  int w = 0;
  for (const auto& t : b.targets) w += data_type_width(expr_type(*t.expr, b, cat));
  return w;
}

// Set-wise cardinality over one block, memoized; blooms stand in for joins
// whose source rel is outside the set.
class RowEstimator {
 public:
  RowEstimator(const QueryBlock& b, const Catalog& cat)
      : b_(b), cat_(cat), blooms_(identify_bloom_candidates(b, cat)), raw_memo_(b.rtes.size(), -1.0) {}

  const std::vector<BloomCandidate>& blooms() const { return blooms_; }

  double raw_rows(int rti) {
    double& memo = raw_memo_[static_cast<size_t>(rti)];
    if (memo >= 0.0) return memo;
    const RangeTableEntry& rte = b_.rte(rti);
    memo = rte.is_base() ? cat_.table_by_oid(rte.oid).row_count
                         : estimate_block_rows(*rte.subquery, cat_);
    return memo;
  }

  double scan_rows(int rti, RelSet set) {
    double r = raw_rows(rti);
    for (const auto& q : b_.quals)
      if (is_restriction_on(q, rti)) r *= estimate_selectivity(*q.expr, b_, cat_);
    for (const auto& bc : blooms_)
      if (bc.target_rti == rti && !rel_set_has(set, bc.source_rti)) r *= bc.est_sel;
    return std::max(1.0, r);
  }

  double rows(RelSet set) {
    auto it = memo_.find(set);
    if (it != memo_.end()) return it->second;

    for (const auto& j : b_.sjinfos) {
      if (j.type != JoinType::Semi && j.type != JoinType::Anti) continue;
      if (!rel_set_subset(j.min_left | j.min_right, set)) continue;
      RelSet left = set & ~j.min_right;
      double fac = rows(j.min_right);
      for (const auto& q : j.quals) fac *= estimate_selectivity(*q.expr, b_, cat_);
      fac = std::min(1.0, fac);
      double base = left ? rows(left) : 1.0;
      double r = j.type == JoinType::Semi ? base * fac : base * std::max(0.0, 1.0 - fac);
      r = std::max(1.0, r);
      memo_[set] = r;
      return r;
    }

    double r = 1.0;
    rel_set_foreach(set, [&](int rti) { r *= scan_rows(rti, set); });
    for (const auto& q : b_.quals)
      if (!is_block_level_qual(q) && rel_set_count(q.rels) >= 2 && rel_set_subset(q.rels, set))
        r *= estimate_selectivity(*q.expr, b_, cat_);
    for (const auto& j : b_.sjinfos)
      if (j.type == JoinType::Left && rel_set_subset(j.min_left | j.min_right, set))
        for (const auto& q : j.quals) r *= estimate_selectivity(*q.expr, b_, cat_);
    // Outer joins never drop left-side rows.
    for (const auto& j : b_.sjinfos)
      if (j.type == JoinType::Left && rel_set_subset(j.min_left | j.min_right, set))
        r = std::max(r, rows(set & ~j.min_right));
    r = std::max(1.0, r);
    memo_[set] = r;
    return r;
  }

 private:
  const QueryBlock& b_;
  const Catalog& cat_;
  std::vector<BloomCandidate> blooms_;
  std::vector<double> raw_memo_;
  std::unordered_map<RelSet, double> memo_;
};

// Stage-by-stage row counts of a block above its join tree.
struct BlockRows {
  double join_rows = 1.0;
  double after_quals = 1.0;
  double agg_rows = 1.0;
  double distinct_rows = 1.0;
  double final_rows = 1.0;
};

BlockRows block_rows_breakdown(const QueryBlock& b, const Catalog& cat, RowEstimator& est) {
  BlockRows out;
  double r = est.rows(b.all_rels());
  out.join_rows = r;
  for (const auto& q : b.quals) {
    if (!is_block_level_qual(q)) continue;
    r *= q.has_sublink ? kDefaultSelectivity : estimate_selectivity(*q.expr, b, cat);
  }
  out.after_quals = r;
  if (!b.group_by.empty()) {
    std::vector<const Expr*> keys;
    for (const auto& g : b.group_by) keys.push_back(g.get());
    r = estimate_groups(keys, b, cat, r);
  } else if (block_has_aggs(b)) {
    r = 1.0;
  }
  out.agg_rows = r;
  if (b.distinct) {
    std::vector<const Expr*> keys;
    for (const auto& t : b.targets) keys.push_back(t.expr.get());
    r = estimate_groups(keys, b, cat, r);
  }
  out.distinct_rows = r;
  if (b.limit) r = std::min(r, static_cast<double>(*b.limit));
  out.final_rows = r;
  return out;
}

struct SetState {
  std::vector<std::unique_ptr<PathNode>> paths;
  bool tainted = false;  // some candidate for this set (or a subset) was pruned
};

struct ChildPlan {
  std::unique_ptr<PathNode> path;
  double rows = 0.0;
  int width = 0;
};

struct BlockResult {
  std::unique_ptr<PathNode> best;
  double est_rows = 0.0;
  int width = 0;
  bool tainted = false;
  double witnessed = 0.0;
};

PathOp join_method_op(JoinMethod m) {
  switch (m) {
    case JoinMethod::NestLoop: return PathOp::NestLoop;
    case JoinMethod::HashJoin: return PathOp::HashJoin;
    case JoinMethod::MergeJoin: return PathOp::MergeJoin;
  }
  return PathOp::NestLoop;
}

class BlockPlanner {
 public:
  BlockPlanner(const QueryBlock& b, OptimizerSession& s, std::optional<double> bound)
      : b_(b),
        s_(s),
        cat_(s.catalog()),
        bound_(bound),
        est_(b, s.catalog()),
        cecs_(derive_cecs(b)),
        refcols_(collect_referenced_cols(b)) {
    // A limit stage shrinks run cost, so intermediate totals are not lower
    // bounds of the final total; pruning then only happens at the top.
    dp_bound_ = b_.limit ? std::nullopt : bound_;
  }

  BlockResult run();

 private:
  const QueryBlock& b_;
  OptimizerSession& s_;
  const Catalog& cat_;
  std::optional<double> bound_;
  std::optional<double> dp_bound_;
  RowEstimator est_;
  std::vector<CecClass> cecs_;
  std::vector<std::vector<int>> refcols_;
  std::unordered_map<RelSet, SetState> sets_;
  std::map<int, ChildPlan> subquery_plans_;
  std::map<int, ChildPlan> sublink_plans_;
  bool tainted_ = false;
  double witnessed_ = std::numeric_limits<double>::infinity();

  const CostParams& params() const { return s_.params(); }

  int rel_width(int rti) {
    const auto& cols = refcols_[static_cast<size_t>(rti)];
    const RangeTableEntry& rte = b_.rte(rti);
    if (cols.empty()) {
      if (rte.is_base()) return cat_.table_by_oid(rte.oid).row_width();
      int w = 0;
      for (size_t i = 0; i < rte.subquery->targets.size(); ++i)
        w += data_type_width(block_column_type(b_, cat_, rti, static_cast<int>(i)));
      return w;
    }
    int w = 0;
    for (int col : cols) w += data_type_width(block_column_type(b_, cat_, rti, col));
    return w;
  }

  std::vector<const Predicate*> restrictions_of(int rti) const {
    std::vector<const Predicate*> out;
    for (const auto& q : b_.quals)
      if (is_restriction_on(q, rti)) out.push_back(&q);
    return out;
  }

  std::vector<int> bloom_ids_targeting(int rti) const {
    std::vector<int> out;
    for (const auto& bc : est_.blooms())
      if (bc.target_rti == rti) out.push_back(bc.id);
    return out;
  }

  ChildPlan& subquery_plan(int rti) {
    auto it = subquery_plans_.find(rti);
    if (it != subquery_plans_.end()) return it->second;
    BlockResult r = plan_block_impl(*b_.rte(rti).subquery, s_, std::nullopt);
    if (!r.best) throw PlanError("subquery produced no plan");
    ChildPlan cp{std::move(r.best), r.est_rows, r.width};
    return subquery_plans_.emplace(rti, std::move(cp)).first->second;
  }

  ChildPlan& sublink_plan(int id) {
    auto it = sublink_plans_.find(id);
    if (it != sublink_plans_.end()) return it->second;
    BlockResult r = plan_block_impl(*b_.sublinks.at(static_cast<size_t>(id)).child, s_, std::nullopt);
    if (!r.best) throw PlanError("sublink subplan produced no plan");
    ChildPlan cp{std::move(r.best), r.est_rows, r.width};
    return sublink_plans_.emplace(id, std::move(cp)).first->second;
  }

  static BlockResult plan_block_impl(const QueryBlock& b, OptimizerSession& s,
                                     std::optional<double> bound);

  RelContext make_ctx(RelSet set, PlanLevel level) {
    RelContext ctx;
    ctx.level = level;
    ctx.relids = set;
    rel_set_foreach(set, [&](int rti) {
      const RangeTableEntry& rte = b_.rte(rti);
      ctx.rel_oids.emplace_back(rti, rte.is_base() ? rte.oid : 0u);
      if (!rte.is_base()) {
        ctx.subquery_count++;
        ctx.subquery_children.emplace_back(rti, rte.subquery.get());
      }
      if (level != PlanLevel::Block) {
        for (int col : refcols_[static_cast<size_t>(rti)]) {
          ctx.output_cols.emplace_back(rti, col);
          ctx.output_types.push_back(block_column_type(b_, cat_, rti, col));
        }
      }
      bool lateral = false;
      bool inlist = false;
      for (const auto& q : b_.quals) {
        if (!is_restriction_on(q, rti)) continue;
        if (q.has_outer_ref) lateral = true;
        if (is_big_inlist(q)) inlist = true;
      }
      if (lateral) ctx.lateral_rel_count++;
      if (inlist) ctx.inlist_variant = true;
    });
    // A block descriptor speaks for the whole block: its outputs are the
    // target list (order-free, so permuted targets can still match), its
    // sublink children count as subqueries, and block-level quals join the
    // restriction set. This also keeps one-rel blocks from pooling with
    // their own base rel.
    if (level == PlanLevel::Block) {
      ctx.subquery_count += static_cast<int>(b_.sublinks.size());
      for (size_t i = 0; i < b_.targets.size(); ++i) {
        ctx.output_cols.emplace_back(-1, 0);
        ctx.output_types.push_back(expr_type(*b_.targets[i].expr, b_, cat_));
      }
    }
    // Interior structure only: quals crossing the set boundary and hints
    // that cannot fire inside the set never influence the set's paths, so
    // a context that carried them would just block legitimate reuse across
    // rewrites. Exterior cost influence arrives solely through blooms.
    for (const auto& q : b_.quals) {
      if (is_block_level_qual(q)) {
        if (level == PlanLevel::Block) ctx.restrictions.push_back(clone_predicate(q));
        continue;
      }
      if (!rel_set_subset(q.rels, set)) continue;
      if (rel_set_count(q.rels) <= 1)
        ctx.restrictions.push_back(clone_predicate(q));
      else
        ctx.join_preds.push_back(clone_predicate(q));
    }
    for (const auto& bc : est_.blooms())
      if (rel_set_has(set, bc.target_rti)) ctx.blooms.push_back(bc);
    for (const auto& h : b_.hints)
      if (rel_set_subset(h.rels, set)) ctx.hints.push_back(h);
    for (const auto& j : b_.sjinfos)
      if ((j.min_left | j.min_right) & set) ctx.sjinfos.push_back(clone_sjinfo(j));
    for (const auto& cls : cecs_) {
      std::vector<std::pair<int, int>> restricted;
      for (const auto& [rti, col] : cls.members)
        if (rel_set_has(set, rti)) restricted.emplace_back(rti, col);
      if (restricted.size() >= 2) ctx.cecs.push_back(std::move(restricted));
    }
    return ctx;
  }

  void note_prune(RelSet set, double total) {
    s_.counters().prune_events++;
    tainted_ = true;
    sets_[set].tainted = true;
    witnessed_ = std::min(witnessed_, total);
  }

  // Pareto admission; existing entries win ties.
  void try_add(RelSet set, std::unique_ptr<PathNode> p) {
    auto& st = sets_[set];
    for (const auto& e : st.paths) {
      if (e->cost.total <= p->cost.total && e->cost.startup <= p->cost.startup &&
          ordering_satisfies(e->ordering, p->ordering))
        return;
    }
    st.paths.erase(std::remove_if(st.paths.begin(), st.paths.end(),
                                  [&](const std::unique_ptr<PathNode>& e) {
                                    return p->cost.total <= e->cost.total &&
                                           p->cost.startup <= e->cost.startup &&
                                           ordering_satisfies(p->ordering, e->ordering);
                                  }),
                   st.paths.end());
    st.paths.push_back(std::move(p));
  }

  // Offers a fully costed candidate to the set, honoring the bound.
  void offer(RelSet set, std::unique_ptr<PathNode> p) {
    s_.counters().cost_path_calls++;
    if (dp_bound_ && p->cost.total > *dp_bound_) {
      note_prune(set, p->cost.total);
      return;
    }
    s_.counters().paths_constructed++;
    try_add(set, std::move(p));
  }

  void build_base_paths(int rti);
  void build_join_paths(RelSet set);
  void process_set(RelSet set);
  std::unique_ptr<PathNode> finalize_candidate(const PathNode& joined, const BlockRows& rows);
};

void BlockPlanner::build_base_paths(int rti) {
  const RangeTableEntry& rte = b_.rte(rti);
  auto rs = restrictions_of(rti);
  std::vector<int> bloom_ids = bloom_ids_targeting(rti);
  double bloom_ops = static_cast<double>(bloom_ids.size());
  double total_ops = bloom_ops;
  for (const auto* q : rs) total_ops += qual_op_count(*q);
  double out_rows = est_.rows(rel_set_of(rti));
  int width = rel_width(rti);
  const CostParams& p = params();

  auto base_node = [&](PathOp op) {
    auto n = std::make_unique<PathNode>();
    n->op = op;
    n->relids = rel_set_of(rti);
    n->scan_rti = rti;
    n->est_rows = out_rows;
    n->width = width;
    n->blooms_applied = bloom_ids;
    return n;
  };

  if (!rte.is_base()) {
    ChildPlan& cp = subquery_plan(rti);
    auto n = base_node(PathOp::SubqueryScan);
    n->label = "sub@" + std::to_string(rti);
    double startup = cp.path->cost.startup;
    double run = (cp.path->cost.total - cp.path->cost.startup) + cp.rows * p.cpu_tuple_cost +
                 cp.rows * total_ops * p.cpu_operator_cost;
    n->cost = {startup, startup + run};
    n->children.push_back(clone_path(*cp.path));
    offer(rel_set_of(rti), std::move(n));
    return;
  }

  const TableDef& t = cat_.table_by_oid(rte.oid);
  double raw = t.row_count;
  double pages = t.page_count;

  {
    auto n = base_node(PathOp::SeqScan);
    n->label = t.name;
    double run = pages * p.seq_page_cost + raw * p.cpu_tuple_cost +
                 raw * total_ops * p.cpu_operator_cost;
    n->cost = {0.0, run};
    offer(rel_set_of(rti), std::move(n));
  }

  for (const auto& idx : t.indexes) {
    if (idx.column_ordinals.size() != 1) continue;
    int col = idx.column_ordinals[0];
    double sel_driver = 1.0;
    double driver_ops = 0.0;
    for (const auto* q : rs) {
      const Expr& e = *q->expr;
      if (e.op != ExprOp::BinOp) continue;
      if (e.bin != BinOpKind::Eq && e.bin != BinOpKind::Lt && e.bin != BinOpKind::Le &&
          e.bin != BinOpKind::Gt && e.bin != BinOpKind::Ge)
        continue;
      const Expr& l = *e.children[0];
      const Expr& r = *e.children[1];
      bool l_col = l.op == ExprOp::ColumnRef && l.levels_up == 0 && l.rti == rti && l.col == col;
      bool r_col = r.op == ExprOp::ColumnRef && r.levels_up == 0 && r.rti == rti && r.col == col;
      if ((l_col && r.op == ExprOp::Literal) || (r_col && l.op == ExprOp::Literal)) {
        sel_driver *= estimate_selectivity(e, b_, cat_);
        driver_ops += 1.0;
      }
    }
    if (driver_ops == 0.0) continue;

    auto n = base_node(PathOp::IndexScan);
    n->label = t.name + "." + idx.name;
    double fetched = std::max(1.0, pages * sel_driver);
    double other_ops = total_ops - driver_ops;
    double startup = std::ceil(log2_at_least_one(raw)) * p.cpu_operator_cost;
    double run = fetched * p.random_page_cost + raw * sel_driver * p.cpu_tuple_cost +
                 raw * sel_driver * other_ops * p.cpu_operator_cost;
    n->cost = {startup, startup + run};
    n->ordering = {{rti, col, false}};
    offer(rel_set_of(rti), std::move(n));
  }

  {
    double list_build_ops = 0.0;
    double list_probe_ops = 0.0;
    double replaced_ops = 0.0;
    for (const auto* q : rs) {
      if (!is_big_inlist(*q)) continue;
      double k = static_cast<double>(q->expr->children.size() - 1);
      list_build_ops += k;
      list_probe_ops += 2.0;
      replaced_ops += k;
    }
    if (list_build_ops > 0.0) {
      auto n = base_node(PathOp::InlistJoinScan);
      n->label = t.name;
      double other_ops = total_ops - replaced_ops;
      double startup = list_build_ops * p.cpu_operator_cost;
      double run = pages * p.seq_page_cost + raw * p.cpu_tuple_cost +
                   raw * (list_probe_ops + other_ops) * p.cpu_operator_cost;
      n->cost = {startup, startup + run};
      offer(rel_set_of(rti), std::move(n));
    }
  }
}

void BlockPlanner::build_join_paths(RelSet set) {
  const CostParams& p = params();
  double out_rows = est_.rows(set);

  for (RelSet left = (set - 1) & set; left; left = (left - 1) & set) {
    RelSet right = set & ~left;
    auto itl = sets_.find(left);
    auto itr = sets_.find(right);
    if (itl == sets_.end() || itl->second.paths.empty()) continue;
    if (itr == sets_.end() || itr->second.paths.empty()) continue;

    // Join order legality against every special join whose rels overlap.
    JoinType type = JoinType::Inner;
    int fired_id = std::numeric_limits<int>::max();
    std::vector<const Predicate*> quals;
    bool legal = true;
    for (const auto& j : b_.sjinfos) {
      RelSet joined = j.min_left | j.min_right;
      if (!(joined & set)) continue;
      if (rel_set_subset(j.min_left, left) && rel_set_subset(j.min_right, right)) {
        if (j.id < fired_id) {
          fired_id = j.id;
          type = j.type;
        }
        for (const auto& q : j.quals) quals.push_back(&q);
        continue;
      }
      if (rel_set_subset(joined, left) || rel_set_subset(joined, right)) continue;
      if (rel_set_subset(set, j.min_left) || rel_set_subset(set, j.min_right)) continue;
      legal = false;
      break;
    }
    if (!legal) continue;

    for (const auto& q : b_.quals)
      if (!is_block_level_qual(q) && rel_set_count(q.rels) >= 2 && rel_set_subset(q.rels, set) &&
          !rel_set_subset(q.rels, left) && !rel_set_subset(q.rels, right))
        quals.push_back(&q);

    sets_[set].tainted = sets_[set].tainted || itl->second.tainted || itr->second.tainted;

    // First simple cross-side equality drives hash and merge strategies.
    const Expr* equi = nullptr;
    int equi_lrti = -1, equi_lcol = -1, equi_rrti = -1, equi_rcol = -1;
    for (const auto* q : quals) {
      const Expr& e = *q->expr;
      if (e.op != ExprOp::BinOp || e.bin != BinOpKind::Eq) continue;
      const Expr& l = *e.children[0];
      const Expr& r = *e.children[1];
      if (l.op != ExprOp::ColumnRef || l.levels_up != 0) continue;
      if (r.op != ExprOp::ColumnRef || r.levels_up != 0) continue;
      if (rel_set_has(left, l.rti) && rel_set_has(right, r.rti)) {
        equi = &e;
        equi_lrti = l.rti;
        equi_lcol = l.col;
        equi_rrti = r.rti;
        equi_rcol = r.col;
        break;
      }
      if (rel_set_has(right, l.rti) && rel_set_has(left, r.rti)) {
        equi = &e;
        equi_lrti = r.rti;
        equi_lcol = r.col;
        equi_rrti = l.rti;
        equi_rcol = l.col;
        break;
      }
    }

    bool semi_or_anti = type == JoinType::Semi || type == JoinType::Anti;
    std::vector<JoinMethod> methods;
    methods.push_back(JoinMethod::NestLoop);
    if (equi) methods.push_back(JoinMethod::HashJoin);
    if (equi && !semi_or_anti) methods.push_back(JoinMethod::MergeJoin);

    for (const auto& h : b_.hints) {
      if (!rel_set_subset(h.rels, set)) continue;
      if (rel_set_subset(h.rels, left) || rel_set_subset(h.rels, right)) continue;
      methods.erase(std::remove_if(methods.begin(), methods.end(),
                                   [&](JoinMethod m) { return m != h.method; }),
                    methods.end());
    }
    if (methods.empty()) continue;

    double nquals = static_cast<double>(quals.size());
    int out_width = 0;

    for (const auto& lp : itl->second.paths) {
      for (const auto& rp : itr->second.paths) {
        out_width = semi_or_anti ? lp->width : lp->width + rp->width;
        for (JoinMethod m : methods) {
          auto n = std::make_unique<PathNode>();
          n->op = join_method_op(m);
          n->relids = set;
          n->join_type = type;
          n->est_rows = out_rows;
          n->width = out_width;
          n->label = join_type_name(type);

          if (m == JoinMethod::NestLoop) {
            double startup = lp->cost.startup + rp->cost.startup;
            double total = lp->cost.total + lp->est_rows * rp->cost.total +
                           lp->est_rows * rp->est_rows * std::max(1.0, nquals) *
                               p.cpu_operator_cost +
                           out_rows * p.cpu_tuple_cost;
            n->cost = {startup, total};
            n->ordering = lp->ordering;
            n->children.push_back(clone_path(*lp));
            n->children.push_back(clone_path(*rp));
          } else if (m == JoinMethod::HashJoin) {
            double spill =
                rp->est_rows * rp->width > p.work_mem_bytes ? 2.0 : 1.0;
            double startup = rp->cost.total +
                             rp->est_rows * p.hash_build_cost_per_row * spill +
                             lp->cost.startup;
            double total = startup + (lp->cost.total - lp->cost.startup) +
                           lp->est_rows * (1.0 + std::max(0.0, nquals - 1.0)) *
                               p.cpu_operator_cost * spill +
                           out_rows * p.cpu_tuple_cost;
            n->cost = {startup, total};
            n->children.push_back(clone_path(*lp));
            n->children.push_back(clone_path(*rp));
          } else {
            std::vector<OrderKeyRef> lkey{{equi_lrti, equi_lcol, false}};
            std::vector<OrderKeyRef> rkey{{equi_rrti, equi_rcol, false}};
            auto sorted_input = [&](const PathNode& src, const std::vector<OrderKeyRef>& key) {
              auto c = clone_path(src);
              if (ordering_satisfies(c->ordering, key)) return c;
              auto sort = std::make_unique<PathNode>();
              sort->op = PathOp::Sort;
              sort->relids = c->relids;
              sort->est_rows = c->est_rows;
              sort->width = c->width;
              sort->cost = cost_sort(p, c->cost, c->est_rows);
              sort->ordering = key;
              sort->children.push_back(std::move(c));
              return sort;
            };
            auto ls = sorted_input(*lp, lkey);
            auto rs2 = sorted_input(*rp, rkey);
            double startup = ls->cost.startup + rs2->cost.startup;
            double total = ls->cost.total + rs2->cost.total +
                           (lp->est_rows + rp->est_rows) * std::max(1.0, nquals) *
                               p.cpu_operator_cost +
                           out_rows * p.cpu_tuple_cost;
            n->cost = {startup, total};
            n->ordering = ls->ordering;
            n->children.push_back(std::move(ls));
            n->children.push_back(std::move(rs2));
          }
          offer(set, std::move(n));
        }
      }
    }
  }
}

void BlockPlanner::process_set(RelSet set) {
  bool base = rel_set_count(set) == 1;
  bool use_cache = s_.cache_enabled();
  std::optional<RelContext> ctx;
  if (use_cache) {
    ctx = make_ctx(set, base ? PlanLevel::Base : PlanLevel::Join);
    auto hit = s_.cache().lookup(*ctx, &b_);
    if (hit) {
      sets_[set].paths = std::move(hit->paths);
      return;
    }
  }

  if (base)
    build_base_paths(rel_set_lowest(set));
  else
    build_join_paths(set);

  auto& st = sets_[set];
  if (use_cache && !st.tainted && !st.paths.empty()) {
    std::vector<const PathNode*> ptrs;
    ptrs.reserve(st.paths.size());
    for (const auto& pp : st.paths) ptrs.push_back(pp.get());
    s_.cache().insert(*ctx, &b_, ptrs, est_.rows(set), st.paths[0]->width);
  }
}

std::unique_ptr<PathNode> BlockPlanner::finalize_candidate(const PathNode& joined,
                                                           const BlockRows& rows) {
  const CostParams& p = params();
  auto cur = clone_path(joined);

  std::vector<const Predicate*> block_quals;
  for (const auto& q : b_.quals)
    if (is_block_level_qual(q)) block_quals.push_back(&q);

  if (!block_quals.empty() || !b_.sublinks.empty()) {
    double in_rows = cur->est_rows;
    double startup = cur->cost.startup;
    double run = cur->cost.total - cur->cost.startup;
    std::vector<std::unique_ptr<PathNode>> kids;
    kids.push_back(std::move(cur));
    for (size_t id = 0; id < b_.sublinks.size(); ++id) {
      const Sublink& sl = b_.sublinks[id];
      ChildPlan& cp = sublink_plan(static_cast<int>(id));
      if (has_escaping_refs(*sl.child, 0)) {
        run += in_rows * cp.path->cost.total;
      } else if (sl.kind == Sublink::Kind::In || sl.kind == Sublink::Kind::Exists) {
        startup += cp.path->cost.total + cp.rows * p.hash_build_cost_per_row;
        run += in_rows * p.cpu_operator_cost;
      } else {
        startup += cp.path->cost.total;
        run += in_rows * p.cpu_operator_cost;
      }
      kids.push_back(clone_path(*cp.path));
    }
    run += in_rows * static_cast<double>(block_quals.size()) * p.cpu_operator_cost;

    auto n = std::make_unique<PathNode>();
    n->op = PathOp::SubqueryScan;
    n->relids = b_.all_rels();
    n->scan_rti = -1;
    n->label = "sublinks";
    n->est_rows = rows.after_quals;
    n->width = kids[0]->width;
    n->cost = {startup, startup + run};
    n->ordering = kids[0]->ordering;
    n->children = std::move(kids);
    s_.counters().cost_path_calls++;
    s_.counters().paths_constructed++;
    cur = std::move(n);
  }

  int out_width = block_output_width(b_, cat_);
  bool grouped = !b_.group_by.empty();
  bool plain_agg = !grouped && block_has_aggs(b_);
  if (grouped || plain_agg) {
    double in_rows = cur->est_rows;
    int n_aggs = count_aggs(b_);
    auto n = std::make_unique<PathNode>();
    n->op = PathOp::Agg;
    n->relids = b_.all_rels();
    n->width = out_width;
    if (grouped) {
      Cost c = cost_hash_groups(p, cur->cost, in_rows, rows.agg_rows, out_width);
      double agg_work = in_rows * static_cast<double>(n_aggs) * p.cpu_operator_cost;
      n->cost = {c.startup + agg_work, c.total + agg_work};
      n->est_rows = rows.agg_rows;
      n->label = "group";
    } else {
      n->cost = cost_plain_agg(p, cur->cost, in_rows, n_aggs);
      n->est_rows = 1.0;
      n->label = "plain";
    }
    n->children.push_back(std::move(cur));
    s_.counters().cost_path_calls++;
    s_.counters().paths_constructed++;
    cur = std::move(n);
  }

  if (b_.distinct) {
    double in_rows = cur->est_rows;
    auto n = std::make_unique<PathNode>();
    n->op = PathOp::Distinct;
    n->relids = b_.all_rels();
    n->width = out_width;
    n->cost = cost_hash_groups(p, cur->cost, in_rows, rows.distinct_rows, out_width);
    n->est_rows = rows.distinct_rows;
    n->children.push_back(std::move(cur));
    s_.counters().cost_path_calls++;
    s_.counters().paths_constructed++;
    cur = std::move(n);
  }

  if (!b_.order_by.empty()) {
    std::vector<OrderKeyRef> required;
    bool expressible = true;
    for (const auto& k : b_.order_by) {
      if (k.expr->op == ExprOp::ColumnRef && k.expr->levels_up == 0)
        required.push_back({k.expr->rti, k.expr->col, k.desc});
      else
        expressible = false;
    }
    bool satisfied = expressible && ordering_satisfies(cur->ordering, required);
    if (!satisfied) {
      auto n = std::make_unique<PathNode>();
      n->op = PathOp::Sort;
      n->relids = b_.all_rels();
      n->width = cur->width;
      n->est_rows = cur->est_rows;
      n->cost = cost_sort(p, cur->cost, cur->est_rows);
      n->ordering = expressible ? required : std::vector<OrderKeyRef>{};
      n->children.push_back(std::move(cur));
      s_.counters().cost_path_calls++;
      s_.counters().paths_constructed++;
      cur = std::move(n);
    }
  }

  if (b_.limit) {
    double in_rows = cur->est_rows;
    auto n = std::make_unique<PathNode>();
    n->op = PathOp::Limit;
    n->relids = b_.all_rels();
    n->width = cur->width;
    n->est_rows = std::min(in_rows, static_cast<double>(*b_.limit));
    n->cost = cost_limit(p, cur->cost, in_rows, static_cast<double>(*b_.limit));
    n->ordering = cur->ordering;
    n->children.push_back(std::move(cur));
    s_.counters().cost_path_calls++;
    s_.counters().paths_constructed++;
    cur = std::move(n);
  }

  return cur;
}

BlockResult BlockPlanner::run() {
  RelSet all = b_.all_rels();

  std::optional<RelContext> block_ctx;
  if (s_.cache_enabled()) {
    block_ctx = make_ctx(all, PlanLevel::Block);
    auto hit = s_.cache().lookup(*block_ctx, &b_);
    if (hit && !hit->paths.empty()) {
      BlockResult r;
      r.best = std::move(hit->paths[0]);
      r.est_rows = hit->est_rows;
      r.width = hit->width;
      return r;
    }
  }

  // Full bushy search space, cross products included: every subset gets
  // paths, ascending size then value, so exhaustive enumeration is matched
  // exactly. Block sizes stay small enough that connectivity filtering
  // would buy nothing but a mismatch against the oracle.
  std::vector<RelSet> order;
  for (RelSet s = all;; s = (s - 1) & all) {
    if (s) order.push_back(s);
    if (!s) break;
  }
  std::sort(order.begin(), order.end(), [](RelSet a, RelSet b) {
    int ca = rel_set_count(a), cb = rel_set_count(b);
    if (ca != cb) return ca < cb;
    return a < b;
  });
  for (RelSet set : order) process_set(set);

  auto root_it = sets_.find(all);
  if (root_it == sets_.end() || root_it->second.paths.empty()) {
    if (!tainted_) throw PlanError("join hints leave no legal join order");
    BlockResult r;
    r.tainted = true;
    r.witnessed = std::isfinite(witnessed_) ? witnessed_ : 0.0;
    return r;
  }
  tainted_ = tainted_ || root_it->second.tainted;

  BlockRows rows = block_rows_breakdown(b_, cat_, est_);
  std::unique_ptr<PathNode> best;
  for (const auto& joined : root_it->second.paths) {
    auto cand = finalize_candidate(*joined, rows);
    if (bound_ && cand->cost.total > *bound_) {
      note_prune(all, cand->cost.total);
      continue;
    }
    if (!best || cost_less(cand->cost, best->cost)) best = std::move(cand);
  }

  BlockResult r;
  if (!best) {
    r.tainted = true;
    r.witnessed = std::isfinite(witnessed_) ? witnessed_ : 0.0;
    return r;
  }
  r.est_rows = best->est_rows;
  r.width = block_output_width(b_, cat_);
  r.tainted = tainted_;
  r.witnessed = std::isfinite(witnessed_) ? witnessed_ : 0.0;

  // A block result that survived the bound is the true optimum: pruning is
  // strict and every operator costs at least its inputs, so nothing pruned
  // could have beaten it. Safe to cache even from a bounded pass.
  if (s_.cache_enabled() && block_ctx) {
    std::vector<const PathNode*> ptrs{best.get()};
    s_.cache().insert(*block_ctx, &b_, ptrs, r.est_rows, r.width);
  }
  r.best = std::move(best);
  return r;
}

BlockResult BlockPlanner::plan_block_impl(const QueryBlock& b, OptimizerSession& s,
                                          std::optional<double> bound) {
  BlockPlanner planner(b, s, bound);
  return planner.run();
}

}  // namespace

std::vector<BloomCandidate> identify_bloom_candidates(const QueryBlock& b, const Catalog& cat) {
  std::vector<BloomCandidate> out;

  auto raw_rows = [&](int rti) {
    const RangeTableEntry& rte = b.rte(rti);
    return rte.is_base() ? cat.table_by_oid(rte.oid).row_count
                         : estimate_block_rows(*rte.subquery, cat);
  };
  auto filtered_rows = [&](int rti) {
    double r = raw_rows(rti);
    for (const auto& q : b.quals)
      if (is_restriction_on(q, rti)) r *= estimate_selectivity(*q.expr, b, cat);
    return std::max(1.0, r);
  };

  for (const auto& q : b.quals) {
    if (q.has_sublink) continue;
    const Expr& e = *q.expr;
    if (e.op != ExprOp::BinOp || e.bin != BinOpKind::Eq) continue;
    const Expr& l = *e.children[0];
    const Expr& r = *e.children[1];
    if (l.op != ExprOp::ColumnRef || l.levels_up != 0) continue;
    if (r.op != ExprOp::ColumnRef || r.levels_up != 0) continue;
    if (l.rti == r.rti) continue;

    struct Side {
      int rti, col;
    };
    Side sides[2] = {{l.rti, l.col}, {r.rti, r.col}};
    for (int d = 0; d < 2; ++d) {
      const Side& target = sides[d];
      const Side& source = sides[1 - d];
      if (filtered_rows(source.rti) > 0.5 * raw_rows(target.rti)) continue;
      double ndv_s = column_info(b, cat, source.rti, source.col).ndv;
      double ndv_t = column_info(b, cat, target.rti, target.col).ndv;
      BloomCandidate bc;
      bc.id = static_cast<int>(out.size());
      bc.target_rti = target.rti;
      bc.source_rti = source.rti;
      bc.target_col = target.col;
      bc.source_col = source.col;
      bc.est_sel = std::min(1.0, ndv_s / std::max(1.0, ndv_t));
      out.push_back(bc);
    }
  }
  return out;
}

double estimate_rel_set_rows(const QueryBlock& b, const Catalog& cat, RelSet set) {
  RowEstimator est(b, cat);
  return est.rows(set);
}

double estimate_block_rows(const QueryBlock& b, const Catalog& cat) {
  RowEstimator est(b, cat);
  return block_rows_breakdown(b, cat, est).final_rows;
}

TreePlan plan_tree(const QueryTree& tree, OptimizerSession& session, std::optional<double> bound) {
  session.counters().cbo_invocations++;
  if (session.in_qrw_phase) session.counters().qrw_cbo_invocations++;

  std::optional<double> effective = bound ? bound : session.upper_bound();
  BlockPlanner planner(*tree.root, session, effective);
  BlockResult r = planner.run();

  TreePlan out;
  out.est_rows = r.est_rows;
  out.width = r.width;
  if (!r.best) {
    out.bound_exceeded = true;
    out.witnessed_cost = r.witnessed;
    return out;
  }
  out.root = std::move(r.best);
  return out;
}

}  // namespace optlab
