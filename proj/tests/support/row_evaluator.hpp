#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "optlab/catalog.hpp"
#include "optlab/ir.hpp"

namespace optlab::testsupport {

using Row = std::vector<Datum>;
using TableData = std::vector<Row>;

// Deterministic synthetic rows honoring the column domains from the stats:
// unique-key columns get sequential distinct values, columns with a raw
// value list draw from it, and everything else is hashed into [min, max].
TableData generate_rows(const TableDef& table, size_t n, uint64_t seed);

// Column bindings for expression evaluation: (rti, col) -> value, with an
// optional chain of enclosing environments for outer references.
class RowEnv {
 public:
  explicit RowEnv(const RowEnv* outer = nullptr) : outer_(outer) {}

  void set(int rti, int col, Datum v);
  // Throws PlanError on an unbound reference.
  const Datum& get(int rti, int col, int levels_up = 0) const;
  const RowEnv* outer() const { return outer_; }

 private:
  const RowEnv* outer_;
  std::unordered_map<uint64_t, Datum> values_;
};

// Evaluates a scalar expression; booleans come back as Int 0/1 and unknown
// as a null datum (three-valued logic). AggCall and SublinkRef nodes are
// rejected; the block executor handles those itself.
Datum eval_scalar(const Expr& e, const RowEnv& env);

// Predicate view of eval_scalar: nullopt = unknown.
std::optional<bool> eval_predicate(const Expr& e, const RowEnv& env);

// Executes one resolved block with logical semantics (joins as filtered
// cross products staged through the special-join infos, then sublinks,
// grouping, distinct, order, limit). Base-rel rows come from data_by_oid;
// subquery rels and sublink children recurse. outer supplies bindings for
// correlated references.
std::vector<Row> execute_block(const QueryBlock& b, const Catalog& cat,
                               const std::unordered_map<uint32_t, TableData>& data_by_oid,
                               const RowEnv* outer = nullptr);

std::vector<Row> execute_tree(const QueryTree& t, const Catalog& cat,
                              const std::unordered_map<uint32_t, TableData>& data_by_oid);

}  // namespace optlab::testsupport
