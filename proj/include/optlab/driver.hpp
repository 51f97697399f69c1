#pragma once

#include <memory>
#include <string>

#include "optlab/resolver.hpp"
#include "optlab/rules.hpp"

namespace optlab {

struct OptimizeResult {
  QueryTree final_tree;
  std::unique_ptr<PathNode> plan;
  double est_rows = 0.0;
  std::vector<RewriteDecision> decisions;
  Counters counters;
  std::string explain_text;
  std::string digest;
  std::string cache_report;
};

// Full pipeline on an already-resolved tree: heuristics, rewrite phase,
// final planning. The tree is consumed.
OptimizeResult optimize_tree(QueryTree tree, OptimizerSession& session);

// Parse + resolve + optimize with a fresh session.
OptimizeResult optimize_sql(const std::string& sql, const Catalog& cat, Mode mode);

}  // namespace optlab
