#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "optlab/common.hpp"
#include "optlab/datum.hpp"

namespace optlab {

enum class ExprOp { ColumnRef, Literal, BinOp, InList, AggCall, SublinkRef };

enum class BinOpKind { Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, And, Or };

enum class AggKind { Sum, Count, Min, Max };

const char* bin_op_token(BinOpKind k);
const char* agg_kind_name(AggKind k);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// Single node type for all expressions; `op` selects which fields apply.
// ColumnRef addresses a range-table entry by index and a column by ordinal;
// levels_up > 0 makes it a correlated reference into an enclosing block.
struct Expr {
  ExprOp op = ExprOp::Literal;

  int rti = 0;
  int col = 0;
  int levels_up = 0;

  Datum value;

  BinOpKind bin = BinOpKind::Eq;
  AggKind agg = AggKind::Count;

  int sublink_id = -1;

  // BinOp: [lhs, rhs]; InList: [needle, item...]; AggCall: [arg] or empty.
  std::vector<ExprPtr> children;
};

ExprPtr make_column(int rti, int col, int levels_up = 0);
ExprPtr make_literal(Datum v);
ExprPtr make_bin(BinOpKind k, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_in_list(ExprPtr needle, std::vector<ExprPtr> items);
ExprPtr make_agg(AggKind k, ExprPtr arg);
ExprPtr make_sublink_ref(int sublink_id);

ExprPtr clone_expr(const Expr& e);
bool expr_equal(const Expr& a, const Expr& b);
uint64_t expr_hash(const Expr& e, uint64_t seed);

struct ExprRefs {
  RelSet rels = 0;          // rtis referenced at levels_up == 0
  bool has_outer_ref = false;
  bool has_sublink = false;
  bool has_agg = false;
};
ExprRefs collect_refs(const Expr& e);

// Applies fn to every node, pre-order. fn may mutate the node.
void walk_expr(Expr& e, const std::function<void(Expr&)>& fn);
void walk_expr(const Expr& e, const std::function<void(const Expr&)>& fn);

// Remaps level-0 column references: rti through rel_map, and ordinals
// through col_maps for rtis present there. Outer references and references
// to rels absent from rel_map are untouched (exterior refs keep identity).
void translate_expr(Expr& e, const std::vector<int>& rel_map,
                    const std::vector<std::vector<int>>& col_maps);

// Renders the expression; column names come from the namer callback.
using ColumnNamer = std::function<std::string(int rti, int col, int levels_up)>;
std::string expr_to_string(const Expr& e, const ColumnNamer& namer);

// Evaluates literal arithmetic subtrees in place (date + interval, numeric
// + - *). Returns true when anything was folded.
bool fold_constants(Expr& e);

}  // namespace optlab
