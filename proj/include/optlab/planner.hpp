#pragma once

#include <memory>
#include <optional>

#include "optlab/session.hpp"

namespace optlab {

struct TreePlan {
  std::unique_ptr<PathNode> root;
  double est_rows = 0.0;
  int width = 0;
  // Set when the bound pruned every candidate; cheapest fully-built
  // candidate cost observed, when any finished.
  bool bound_exceeded = false;
  double witnessed_cost = 0.0;
};

// Plans the whole tree bottom-up through the session cache (when the mode
// enables it). When `bound` is set, any candidate strictly above it is
// discarded; rel-set entries whose construction saw pruning are never
// cached, while a completed block caches its best plan regardless.
TreePlan plan_tree(const QueryTree& tree, OptimizerSession& session,
                   std::optional<double> bound = std::nullopt);

// Equi-join edges of a block whose filtered source side is at most half the
// target's raw row count; deterministic id order.
std::vector<BloomCandidate> identify_bloom_candidates(const QueryBlock& b, const Catalog& cat);

// Set-wise cardinality of a rel subset within a block; pure function of the
// subset so that join order never changes the estimate.
double estimate_rel_set_rows(const QueryBlock& b, const Catalog& cat, RelSet set);

// Estimated output rows of a whole block after grouping, distinct and limit;
// pure estimation, no planning.
double estimate_block_rows(const QueryBlock& b, const Catalog& cat);

}  // namespace optlab
