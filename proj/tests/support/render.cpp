#include "support/render.hpp"

#include <algorithm>

namespace optlab::testsupport {

std::string plan_shape(const PathNode& p) {
  std::string out = path_op_name(p.op);
  bool join = p.children.size() == 2 && p.op != PathOp::SubqueryScan;
  if (join && p.join_type != JoinType::Inner) {
    out += "[";
    out += join_type_name(p.join_type);
    out += "]";
  } else if (!p.label.empty() && !join) {
    out += "[" + p.label + "]";
  }
  if (p.children.empty()) return out;
  out += "(";
  for (size_t i = 0; i < p.children.size(); ++i) {
    if (i) out += ",";
    out += plan_shape(*p.children[i]);
  }
  out += ")";
  return out;
}

std::string rows_canonical(const std::vector<std::vector<Datum>>& rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& r : rows) {
    std::string line;
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) line += "\t";
      line += r[i].to_string();
    }
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += "\n";
  }
  return out;
}

}  // namespace optlab::testsupport
