#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optlab/datum.hpp"
#include "optlab/expr.hpp"

namespace optlab {

// Name-based syntax tree. Catalog binding happens later in the resolver;
// nothing here knows about oids or range-table indexes.

struct AstSelect;
using AstSelectPtr = std::unique_ptr<AstSelect>;

struct AstExpr;
using AstExprPtr = std::unique_ptr<AstExpr>;

enum class AstExprOp {
  ColumnName,   // qualifier (optional) + name
  Star,
  Literal,
  BinOp,
  InList,
  InSubquery,
  Exists,
  ScalarSubquery,
  AggCall,
};

struct AstExpr {
  AstExprOp op = AstExprOp::Literal;
  size_t offset = 0;  // byte offset in the source text

  std::string qualifier;
  std::string name;
  Datum value;
  BinOpKind bin = BinOpKind::Eq;
  AggKind agg = AggKind::Count;
  bool negated = false;  // NOT IN / NOT EXISTS
  bool star_arg = false; // count(*)

  std::vector<AstExprPtr> children;
  AstSelectPtr subquery;
};

enum class AstJoinKind { Inner, Left };

struct AstTableRef {
  size_t offset = 0;
  // Leaf: table or derived table.
  std::string table_name;
  std::string alias;
  AstSelectPtr subquery;
  // Join node.
  bool is_join = false;
  AstJoinKind join_kind = AstJoinKind::Inner;
  std::unique_ptr<AstTableRef> left;
  std::unique_ptr<AstTableRef> right;
  AstExprPtr on_qual;
};

struct AstSelectItem {
  AstExprPtr expr;
  std::string alias;
};

struct AstOrderItem {
  AstExprPtr expr;
  bool desc = false;
};

enum class JoinMethod { NestLoop, HashJoin, MergeJoin };

const char* join_method_name(JoinMethod m);

struct AstHint {
  JoinMethod method = JoinMethod::NestLoop;
  std::vector<std::string> tables;
};

struct AstSelect {
  bool distinct = false;
  std::vector<AstSelectItem> items;
  std::vector<std::unique_ptr<AstTableRef>> from;
  AstExprPtr where;
  std::vector<AstExprPtr> group_by;
  std::vector<AstOrderItem> order_by;
  std::optional<int64_t> limit;
  std::vector<AstHint> hints;  // from a leading /*+ ... */ comment
};

// Parses one SELECT statement; throws ParseError with the byte offset and
// the token set that would have been accepted.
AstSelectPtr parse_query(const std::string& text);

}  // namespace optlab
