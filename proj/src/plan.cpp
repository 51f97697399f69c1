#include "optlab/plan.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace optlab {

const char* path_op_name(PathOp op) {
  switch (op) {
    case PathOp::SeqScan: return "seqscan";
    case PathOp::IndexScan: return "indexscan";
    case PathOp::InlistJoinScan: return "inlist_join_scan";
    case PathOp::SubqueryScan: return "subquery_scan";
    case PathOp::NestLoop: return "nestloop";
    case PathOp::HashJoin: return "hashjoin";
    case PathOp::MergeJoin: return "mergejoin";
    case PathOp::Agg: return "agg";
    case PathOp::Sort: return "sort";
    case PathOp::Limit: return "limit";
    case PathOp::Distinct: return "distinct";
  }
  return "?";
}

std::unique_ptr<PathNode> clone_path(const PathNode& p) {
  auto out = std::make_unique<PathNode>();
  out->op = p.op;
  out->relids = p.relids;
  out->scan_rti = p.scan_rti;
  out->label = p.label;
  out->join_type = p.join_type;
  out->est_rows = p.est_rows;
  out->width = p.width;
  out->cost = p.cost;
  out->required_hint_ok = p.required_hint_ok;
  out->blooms_applied = p.blooms_applied;
  out->ordering = p.ordering;
  out->children.reserve(p.children.size());
  for (const auto& c : p.children) out->children.push_back(clone_path(*c));
  return out;
}

bool ordering_satisfies(const std::vector<OrderKeyRef>& delivered,
                        const std::vector<OrderKeyRef>& required) {
  if (required.size() > delivered.size()) return false;
  for (size_t i = 0; i < required.size(); ++i)
    if (!(delivered[i] == required[i])) return false;
  return true;
}

namespace {

void render(const PathNode& n, int depth, std::ostringstream& os) {
  for (int i = 0; i < depth; ++i) os << "  ";
  os << path_op_name(n.op);
  if (!n.label.empty()) os << "(" << n.label << ")";
  char buf[96];
  std::snprintf(buf, sizeof buf, " (cost=%.2f..%.2f rows=%lld)", n.cost.startup, n.cost.total,
                static_cast<long long>(std::llround(n.est_rows)));
  os << buf << "\n";
  for (const auto& c : n.children) render(*c, depth + 1, os);
}

uint64_t double_bits(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

}  // namespace

std::string explain_path(const PathNode& root) {
  std::ostringstream os;
  render(root, 0, os);
  return os.str();
}

std::string plan_digest(const PathNode& root) {
  uint64_t h = hash_string(explain_path(root));
  h = hash_combine(h, double_bits(root.cost.startup));
  h = hash_combine(h, double_bits(root.cost.total));
  h = hash_combine(h, double_bits(root.est_rows));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace optlab
