#pragma once

#include <memory>
#include <string>
#include <vector>

#include "optlab/cost.hpp"
#include "optlab/ir.hpp"

namespace optlab {

enum class PathOp {
  SeqScan,
  IndexScan,
  InlistJoinScan,
  SubqueryScan,
  NestLoop,
  HashJoin,
  MergeJoin,
  Agg,
  Sort,
  Limit,
  Distinct,
};

const char* path_op_name(PathOp op);

// Sort order delivered by a path, as base columns of the owning block.
struct OrderKeyRef {
  int rti = -1;
  int col = -1;
  bool desc = false;

  bool operator==(const OrderKeyRef& o) const = default;
};

// Physical plan node. Trees are self-contained: subquery scans and sublink
// stages embed copies of their child block plans as extra children.
struct PathNode {
  PathOp op = PathOp::SeqScan;
  RelSet relids = 0;
  int scan_rti = -1;
  std::string label;  // scans: table name; subquery scans: stable child tag
  JoinType join_type = JoinType::Inner;
  double est_rows = 0.0;
  int width = 0;
  Cost cost;
  bool required_hint_ok = true;
  std::vector<int> blooms_applied;  // bloom candidate ids, ascending
  std::vector<OrderKeyRef> ordering;
  std::vector<std::unique_ptr<PathNode>> children;
};

std::unique_ptr<PathNode> clone_path(const PathNode& p);

// True when `required` is a prefix of `delivered`.
bool ordering_satisfies(const std::vector<OrderKeyRef>& delivered,
                        const std::vector<OrderKeyRef>& required);

// One node per line, two-space indentation per depth:
//   op(label) (cost=startup..total rows=N)
std::string explain_path(const PathNode& root);

// Stable fingerprint of plan shape and full-precision cost.
std::string plan_digest(const PathNode& root);

}  // namespace optlab
