#pragma once

#include <optional>
#include <string>
#include <vector>

#include "optlab/session.hpp"

namespace optlab {

// Outcome of evaluating one rewrite rule on one query.
struct RewriteDecision {
  std::string rule_id;
  bool matched = false;
  std::optional<bool> guess;  // predicted: rewritten form wins
  bool applied = false;
  // Planner costs when the mode planned the alternatives; negative = not
  // planned. A bound-exceeded alternative records the bound it lost to.
  double cost_original = -1.0;
  double cost_rewritten = -1.0;
  int cbo_invocations = 0;
};

// Tab-separated decision log, one row per decision plus a header.
std::string decision_log_tsv(const std::vector<RewriteDecision>& decisions);

// Always-beneficial tree simplifications, applied to a fixed point:
// constant folding, EXISTS flattening into semi/anti joins, and pushdown of
// single-rel predicates into subquery rels.
void apply_heuristic_rules(QueryTree& tree, const Catalog& cat);

// Cost-based rules. Each returns the rewritten tree when the query matches.
std::optional<QueryTree> try_subquery_merge(const QueryTree& tree, const Catalog& cat);
std::optional<QueryTree> try_eager_agg(const QueryTree& tree, const Catalog& cat);

struct RewriteOutcome {
  QueryTree tree;
  std::vector<RewriteDecision> decisions;
};

// Runs heuristics, then the cost-based rules in fixed order on the current
// winner, settling each per the session mode.
RewriteOutcome run_rewrite_phase(QueryTree tree, OptimizerSession& session);

}  // namespace optlab
