#include "optlab/driver.hpp"

#include "optlab/plan.hpp"
#include "optlab/planner.hpp"

namespace optlab {

OptimizeResult optimize_tree(QueryTree tree, OptimizerSession& session) {
  RewriteOutcome outcome = run_rewrite_phase(std::move(tree), session);
  TreePlan plan = plan_tree(outcome.tree, session);
  if (!plan.root) throw PlanError("final planning produced no plan");

  OptimizeResult result;
  result.final_tree = std::move(outcome.tree);
  result.plan = std::move(plan.root);
  result.est_rows = plan.est_rows;
  result.decisions = std::move(outcome.decisions);
  result.counters = session.counters();
  result.explain_text = explain_path(*result.plan);
  result.digest = plan_digest(*result.plan);
  result.cache_report = session.cache().report();
  return result;
}

OptimizeResult optimize_sql(const std::string& sql, const Catalog& cat, Mode mode) {
  QueryTree tree = analyze_query(sql, cat);
  OptimizerSession session(cat, mode);
  return optimize_tree(std::move(tree), session);
}

}  // namespace optlab
