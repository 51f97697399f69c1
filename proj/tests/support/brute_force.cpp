#include "support/brute_force.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "optlab/planner.hpp"
#include "optlab/selectivity.hpp"

namespace optlab::testsupport {

namespace {

bool block_qual(const Predicate& q) { return q.has_sublink || q.rels == 0; }

bool restriction_on(const Predicate& q, int rti) {
  return !block_qual(q) && q.rels == rel_set_of(rti);
}

double qual_ops(const Predicate& q) {
  if (q.expr->op == ExprOp::InList) return static_cast<double>(q.expr->children.size() - 1);
  return 1.0;
}

bool big_inlist(const Predicate& q) {
  return q.expr->op == ExprOp::InList && q.expr->children.size() - 1 >= 4;
}

bool refs_outer(const QueryBlock& b, int depth) {
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
  if (found) return true;
  for (const auto& sl : b.sublinks) {
    if (sl.test_expr) check(*sl.test_expr);
    if (found || refs_outer(*sl.child, depth + 1)) return true;
  }
  for (const auto& rte : b.rtes)
    if (!rte.is_base() && refs_outer(*rte.subquery, depth + 1)) return true;
  return found;
}

void collect_cols(const QueryBlock& b, int depth, std::set<std::pair<int, int>>& out) {
  auto check = [&](const Expr& e) {
    walk_expr(e, [&](const Expr& n) {
      if (n.op == ExprOp::ColumnRef && n.levels_up == depth) out.insert({n.rti, n.col});
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
    collect_cols(*sl.child, depth + 1, out);
  }
  for (const auto& rte : b.rtes)
    if (!rte.is_base()) collect_cols(*rte.subquery, depth + 1, out);
}

int count_agg_nodes(const QueryBlock& b) {
  int n = 0;
  auto counter = [&](const Expr& e) {
    walk_expr(e, [&](const Expr& node) {
      if (node.op == ExprOp::AggCall) n++;
    });
  };
  for (const auto& t : b.targets) counter(*t.expr);
  for (const auto& o : b.order_by) counter(*o.expr);
  return n;
}

bool any_aggs(const QueryBlock& b) { return count_agg_nodes(b) > 0; }

class Enumerator {
 public:
  Enumerator(const QueryBlock& b, const Catalog& cat, const CostParams& p)
      : b_(b), cat_(cat), p_(p), blooms_(identify_bloom_candidates(b, cat)) {
    std::set<std::pair<int, int>> refs;
    collect_cols(b_, 0, refs);
    refcols_.resize(b_.rtes.size());
    for (const auto& [rti, col] : refs)
      if (rti >= 0 && static_cast<size_t>(rti) < refcols_.size()) refcols_[rti].push_back(col);
  }

  BruteForceResult run();

 private:
  const QueryBlock& b_;
  const Catalog& cat_;
  const CostParams& p_;
  std::vector<BloomCandidate> blooms_;
  std::vector<std::vector<int>> refcols_;
  std::unordered_map<RelSet, std::vector<std::unique_ptr<PathNode>>> cands_;
  std::map<int, BruteForceResult> subquery_plans_;
  std::map<int, BruteForceResult> sublink_plans_;

  double rows(RelSet set) const { return estimate_rel_set_rows(b_, cat_, set); }

  int rel_width(int rti) const {
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

  const BruteForceResult& child_plan(int rti) {
    auto it = subquery_plans_.find(rti);
    if (it != subquery_plans_.end()) return it->second;
    auto r = brute_force_plan(*b_.rte(rti).subquery, cat_, p_);
    return subquery_plans_.emplace(rti, std::move(r)).first->second;
  }

  const BruteForceResult& link_plan(int id) {
    auto it = sublink_plans_.find(id);
    if (it != sublink_plans_.end()) return it->second;
    auto r = brute_force_plan(*b_.sublinks.at(static_cast<size_t>(id)).child, cat_, p_);
    return sublink_plans_.emplace(id, std::move(r)).first->second;
  }

  // Same admission rule as the planner so tie outcomes align: existing
  // entries win, dominance needs no-worse total, startup and ordering.
  void admit(RelSet set, std::unique_ptr<PathNode> n) {
    auto& list = cands_[set];
    for (const auto& e : list)
      if (e->cost.total <= n->cost.total && e->cost.startup <= n->cost.startup &&
          ordering_satisfies(e->ordering, n->ordering))
        return;
    list.erase(std::remove_if(list.begin(), list.end(),
                              [&](const std::unique_ptr<PathNode>& e) {
                                return n->cost.total <= e->cost.total &&
                                       n->cost.startup <= e->cost.startup &&
                                       ordering_satisfies(n->ordering, e->ordering);
                              }),
               list.end());
    list.push_back(std::move(n));
  }

  void scan_paths(int rti);
  void join_paths(RelSet set);
  std::unique_ptr<PathNode> finalize(const PathNode& joined);
};

void Enumerator::scan_paths(int rti) {
  const RangeTableEntry& rte = b_.rte(rti);
  std::vector<const Predicate*> rs;
  for (const auto& q : b_.quals)
    if (restriction_on(q, rti)) rs.push_back(&q);
  std::vector<int> bloom_ids;
  for (const auto& bc : blooms_)
    if (bc.target_rti == rti) bloom_ids.push_back(bc.id);
  double total_ops = static_cast<double>(bloom_ids.size());
  for (const auto* q : rs) total_ops += qual_ops(*q);
  double out_rows = rows(rel_set_of(rti));
  int width = rel_width(rti);

  auto node = [&](PathOp op) {
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
    const BruteForceResult& cp = child_plan(rti);
    auto n = node(PathOp::SubqueryScan);
    n->label = "sub@" + std::to_string(rti);
    double startup = cp.best->cost.startup;
    double run = (cp.best->cost.total - cp.best->cost.startup) + cp.est_rows * p_.cpu_tuple_cost +
                 cp.est_rows * total_ops * p_.cpu_operator_cost;
    n->cost = {startup, startup + run};
    n->children.push_back(clone_path(*cp.best));
    admit(rel_set_of(rti), std::move(n));
    return;
  }

  const TableDef& t = cat_.table_by_oid(rte.oid);
  double raw = t.row_count;
  double pages = t.page_count;

  {
    auto n = node(PathOp::SeqScan);
    n->label = t.name;
    double run = pages * p_.seq_page_cost + raw * p_.cpu_tuple_cost +
                 raw * total_ops * p_.cpu_operator_cost;
    n->cost = {0.0, run};
    admit(rel_set_of(rti), std::move(n));
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

    auto n = node(PathOp::IndexScan);
    n->label = t.name + "." + idx.name;
    double fetched = std::max(1.0, pages * sel_driver);
    double other_ops = total_ops - driver_ops;
    double startup = std::ceil(log2_at_least_one(raw)) * p_.cpu_operator_cost;
    double run = fetched * p_.random_page_cost + raw * sel_driver * p_.cpu_tuple_cost +
                 raw * sel_driver * other_ops * p_.cpu_operator_cost;
    n->cost = {startup, startup + run};
    n->ordering = {{rti, col, false}};
    admit(rel_set_of(rti), std::move(n));
  }

  {
    double list_build_ops = 0.0;
    double list_probe_ops = 0.0;
    double replaced_ops = 0.0;
    for (const auto* q : rs) {
      if (!big_inlist(*q)) continue;
      double k = static_cast<double>(q->expr->children.size() - 1);
      list_build_ops += k;
      list_probe_ops += 2.0;
      replaced_ops += k;
    }
    if (list_build_ops > 0.0) {
      auto n = node(PathOp::InlistJoinScan);
      n->label = t.name;
      double other_ops = total_ops - replaced_ops;
      double startup = list_build_ops * p_.cpu_operator_cost;
      double run = pages * p_.seq_page_cost + raw * p_.cpu_tuple_cost +
                   raw * (list_probe_ops + other_ops) * p_.cpu_operator_cost;
      n->cost = {startup, startup + run};
      admit(rel_set_of(rti), std::move(n));
    }
  }
}

void Enumerator::join_paths(RelSet set) {
  double out_rows = rows(set);

  for (RelSet left = (set - 1) & set; left; left = (left - 1) & set) {
    RelSet right = set & ~left;
    auto itl = cands_.find(left);
    auto itr = cands_.find(right);
    if (itl == cands_.end() || itl->second.empty()) continue;
    if (itr == cands_.end() || itr->second.empty()) continue;

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
      if (!block_qual(q) && rel_set_count(q.rels) >= 2 && rel_set_subset(q.rels, set) &&
          !rel_set_subset(q.rels, left) && !rel_set_subset(q.rels, right))
        quals.push_back(&q);

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

    for (const auto& lp : itl->second) {
      for (const auto& rp : itr->second) {
        int out_width = semi_or_anti ? lp->width : lp->width + rp->width;
        for (JoinMethod m : methods) {
          auto n = std::make_unique<PathNode>();
          n->relids = set;
          n->join_type = type;
          n->est_rows = out_rows;
          n->width = out_width;
          n->label = join_type_name(type);

          if (m == JoinMethod::NestLoop) {
            n->op = PathOp::NestLoop;
            double startup = lp->cost.startup + rp->cost.startup;
            double total = lp->cost.total + lp->est_rows * rp->cost.total +
                           lp->est_rows * rp->est_rows * std::max(1.0, nquals) *
                               p_.cpu_operator_cost +
                           out_rows * p_.cpu_tuple_cost;
            n->cost = {startup, total};
            n->ordering = lp->ordering;
            n->children.push_back(clone_path(*lp));
            n->children.push_back(clone_path(*rp));
          } else if (m == JoinMethod::HashJoin) {
            n->op = PathOp::HashJoin;
            double spill = rp->est_rows * rp->width > p_.work_mem_bytes ? 2.0 : 1.0;
            double startup = rp->cost.total + rp->est_rows * p_.hash_build_cost_per_row * spill +
                             lp->cost.startup;
            double total = startup + (lp->cost.total - lp->cost.startup) +
                           lp->est_rows * (1.0 + std::max(0.0, nquals - 1.0)) *
                               p_.cpu_operator_cost * spill +
                           out_rows * p_.cpu_tuple_cost;
            n->cost = {startup, total};
            n->children.push_back(clone_path(*lp));
            n->children.push_back(clone_path(*rp));
          } else {
            n->op = PathOp::MergeJoin;
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
              sort->cost = cost_sort(p_, c->cost, c->est_rows);
              sort->ordering = key;
              sort->children.push_back(std::move(c));
              return sort;
            };
            auto ls = sorted_input(*lp, lkey);
            auto rs2 = sorted_input(*rp, rkey);
            double startup = ls->cost.startup + rs2->cost.startup;
            double total = ls->cost.total + rs2->cost.total +
                           (lp->est_rows + rp->est_rows) * std::max(1.0, nquals) *
                               p_.cpu_operator_cost +
                           out_rows * p_.cpu_tuple_cost;
            n->cost = {startup, total};
            n->ordering = ls->ordering;
            n->children.push_back(std::move(ls));
            n->children.push_back(std::move(rs2));
          }
          admit(set, std::move(n));
        }
      }
    }
  }
}

std::unique_ptr<PathNode> Enumerator::finalize(const PathNode& joined) {
  auto cur = clone_path(joined);

  double join_rows = rows(b_.all_rels());
  double after_quals = join_rows;
  for (const auto& q : b_.quals) {
    if (!block_qual(q)) continue;
    after_quals *= q.has_sublink ? kDefaultSelectivity : estimate_selectivity(*q.expr, b_, cat_);
  }
  double agg_rows = after_quals;
  if (!b_.group_by.empty()) {
    std::vector<const Expr*> keys;
    for (const auto& g : b_.group_by) keys.push_back(g.get());
    agg_rows = estimate_groups(keys, b_, cat_, after_quals);
  } else if (any_aggs(b_)) {
    agg_rows = 1.0;
  }
  double distinct_rows = agg_rows;
  if (b_.distinct) {
    std::vector<const Expr*> keys;
    for (const auto& t : b_.targets) keys.push_back(t.expr.get());
    distinct_rows = estimate_groups(keys, b_, cat_, agg_rows);
  }

  std::vector<const Predicate*> block_quals;
  for (const auto& q : b_.quals)
    if (block_qual(q)) block_quals.push_back(&q);

  if (!block_quals.empty() || !b_.sublinks.empty()) {
    double in_rows = cur->est_rows;
    double startup = cur->cost.startup;
    double run = cur->cost.total - cur->cost.startup;
    std::vector<std::unique_ptr<PathNode>> kids;
    kids.push_back(std::move(cur));
    for (size_t id = 0; id < b_.sublinks.size(); ++id) {
      const Sublink& sl = b_.sublinks[id];
      const BruteForceResult& cp = link_plan(static_cast<int>(id));
      if (refs_outer(*sl.child, 0)) {
        run += in_rows * cp.best->cost.total;
      } else if (sl.kind == Sublink::Kind::In || sl.kind == Sublink::Kind::Exists) {
        startup += cp.best->cost.total + cp.est_rows * p_.hash_build_cost_per_row;
        run += in_rows * p_.cpu_operator_cost;
      } else {
        startup += cp.best->cost.total;
        run += in_rows * p_.cpu_operator_cost;
      }
      kids.push_back(clone_path(*cp.best));
    }
    run += in_rows * static_cast<double>(block_quals.size()) * p_.cpu_operator_cost;

    auto n = std::make_unique<PathNode>();
    n->op = PathOp::SubqueryScan;
    n->relids = b_.all_rels();
    n->scan_rti = -1;
    n->label = "sublinks";
    n->est_rows = after_quals;
    n->width = kids[0]->width;
    n->cost = {startup, startup + run};
    n->ordering = kids[0]->ordering;
    n->children = std::move(kids);
    cur = std::move(n);
  }

  int out_width = 0;
  for (const auto& t : b_.targets) out_width += data_type_width(expr_type(*t.expr, b_, cat_));
  bool grouped = !b_.group_by.empty();
  bool plain_agg = !grouped && any_aggs(b_);
  if (grouped || plain_agg) {
    double in_rows = cur->est_rows;
    int n_aggs = count_agg_nodes(b_);
    auto n = std::make_unique<PathNode>();
    n->op = PathOp::Agg;
    n->relids = b_.all_rels();
    n->width = out_width;
    if (grouped) {
      Cost c = cost_hash_groups(p_, cur->cost, in_rows, agg_rows, out_width);
      double agg_work = in_rows * static_cast<double>(n_aggs) * p_.cpu_operator_cost;
      n->cost = {c.startup + agg_work, c.total + agg_work};
      n->est_rows = agg_rows;
      n->label = "group";
    } else {
      n->cost = cost_plain_agg(p_, cur->cost, in_rows, n_aggs);
      n->est_rows = 1.0;
      n->label = "plain";
    }
    n->children.push_back(std::move(cur));
    cur = std::move(n);
  }

  if (b_.distinct) {
    double in_rows = cur->est_rows;
    auto n = std::make_unique<PathNode>();
    n->op = PathOp::Distinct;
    n->relids = b_.all_rels();
    n->width = out_width;
    n->cost = cost_hash_groups(p_, cur->cost, in_rows, distinct_rows, out_width);
    n->est_rows = distinct_rows;
    n->children.push_back(std::move(cur));
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
      n->cost = cost_sort(p_, cur->cost, cur->est_rows);
      n->ordering = expressible ? required : std::vector<OrderKeyRef>{};
      n->children.push_back(std::move(cur));
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
    n->cost = cost_limit(p_, cur->cost, in_rows, static_cast<double>(*b_.limit));
    n->ordering = cur->ordering;
    n->children.push_back(std::move(cur));
    cur = std::move(n);
  }

  return cur;
}

BruteForceResult Enumerator::run() {
  RelSet all = b_.all_rels();

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
  for (RelSet set : order) {
    if (rel_set_count(set) == 1)
      scan_paths(rel_set_lowest(set));
    else
      join_paths(set);
  }

  auto it = cands_.find(all);
  if (it == cands_.end() || it->second.empty())
    throw PlanError("join hints leave no legal join order");

  std::unique_ptr<PathNode> best;
  for (const auto& joined : it->second) {
    auto cand = finalize(*joined);
    if (!best || cost_less(cand->cost, best->cost)) best = std::move(cand);
  }

  BruteForceResult r;
  r.est_rows = best->est_rows;
  int out_width = 0;
  for (const auto& t : b_.targets) out_width += data_type_width(expr_type(*t.expr, b_, cat_));
  r.width = out_width;
  r.best = std::move(best);
  return r;
}

}  // namespace

BruteForceResult brute_force_plan(const QueryBlock& b, const Catalog& cat,
                                  const CostParams& params) {
  Enumerator e(b, cat, params);
  return e.run();
}

}  // namespace optlab::testsupport
