#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optlab/catalog.hpp"
#include "optlab/expr.hpp"
#include "optlab/parser.hpp"

namespace optlab {

struct QueryBlock;

enum class JoinType { Inner, Left, Semi, Anti };

const char* join_type_name(JoinType t);

struct RangeTableEntry {
  enum class Kind { BaseTable, Subquery } kind = Kind::BaseTable;
  uint32_t oid = 0;                      // BaseTable
  std::unique_ptr<QueryBlock> subquery;  // Subquery
  std::string alias;

  bool is_base() const { return kind == Kind::BaseTable; }
};

// One WHERE conjunct. `rels` caches the level-0 rtis the expression touches;
// refresh_predicate keeps it consistent after any expression surgery.
struct Predicate {
  ExprPtr expr;
  RelSet rels = 0;
  bool has_outer_ref = false;
  bool has_sublink = false;
};

Predicate make_predicate(ExprPtr expr);
void refresh_predicate(Predicate& p);
Predicate clone_predicate(const Predicate& p);

// Join order constraint from an outer/semi/anti join: the join's own quals
// plus the minimal rel sets that must sit on each side when it is formed.
struct SpecialJoinInfo {
  int id = 0;
  JoinType type = JoinType::Inner;
  RelSet min_left = 0;
  RelSet min_right = 0;
  std::vector<Predicate> quals;
};

SpecialJoinInfo clone_sjinfo(const SpecialJoinInfo& j);

struct TargetEntry {
  ExprPtr expr;
  std::string alias;
  DataType type = DataType::Int;
};

struct SortKey {
  ExprPtr expr;
  bool desc = false;
};

struct HintSpec {
  JoinMethod method = JoinMethod::NestLoop;
  std::vector<std::string> table_names;
  RelSet rels = 0;  // resolved against the owning block's range table
};

// Subquery expression hanging off a predicate; SublinkRef nodes in the
// owning block's expressions point at these by index.
struct Sublink {
  enum class Kind { In, Exists, Scalar } kind = Kind::In;
  bool negated = false;
  ExprPtr test_expr;  // IN: the outer-side needle; empty otherwise
  std::unique_ptr<QueryBlock> child;
};

struct QueryBlock {
  int id = 0;
  QueryBlock* parent = nullptr;  // enclosing block; set by the resolver

  std::vector<RangeTableEntry> rtes;
  std::vector<Predicate> quals;
  std::vector<SpecialJoinInfo> sjinfos;
  std::vector<Sublink> sublinks;
  std::vector<TargetEntry> targets;
  bool distinct = false;
  std::vector<ExprPtr> group_by;
  std::vector<SortKey> order_by;
  std::optional<int64_t> limit;
  std::vector<HintSpec> hints;

  RelSet all_rels() const;
  const RangeTableEntry& rte(int rti) const { return rtes.at(static_cast<size_t>(rti)); }
};

struct QueryTree {
  std::unique_ptr<QueryBlock> root;
};

std::unique_ptr<QueryBlock> clone_block(const QueryBlock& b, QueryBlock* parent);
QueryTree clone_tree(const QueryTree& t);

// Structural equality: oids, ordinals, literals, shapes. Aliases and hint
// table spellings are cosmetic and ignored.
bool block_equal(const QueryBlock& a, const QueryBlock& b);

// Like block_equal but tolerates a permuted target list; on success,
// out_map[ordinal in a] = matching ordinal in b.
bool block_equal_modulo_targets(const QueryBlock& a, const QueryBlock& b, std::vector<int>* out_map);

// Candidate equivalence class: columns connected by inner equi-join quals.
struct CecClass {
  std::vector<std::pair<int, int>> members;  // (rti, col), sorted, deduped
  std::vector<int> source_qual_ids;          // spanning subset of block.quals

  bool has_member(int rti, int col) const;
};

std::vector<CecClass> derive_cecs(const QueryBlock& b);

// Number of distinct rels whose restrictions reference an enclosing block.
int count_lateral_rels(const QueryBlock& b);

// Column metadata helpers; subquery rels draw from their child's targets.
DataType block_column_type(const QueryBlock& b, const Catalog& cat, int rti, int col);
std::string block_column_name(const QueryBlock& b, const Catalog& cat, int rti, int col);
int block_rel_column_count(const QueryBlock& b, const Catalog& cat, int rti);

// Renders `rti.col` references with their catalog names, outer levels marked.
ColumnNamer block_namer(const QueryBlock& b, const Catalog& cat);

DataType expr_type(const Expr& e, const QueryBlock& b, const Catalog& cat);

// Deterministic multi-line description of the whole tree, for debugging and
// golden tests.
std::string dump_tree(const QueryTree& t, const Catalog& cat);
std::string dump_block(const QueryBlock& b, const Catalog& cat, int indent = 0);

// Consistency checks (cached rel sets, ordinal bounds, sublink indexes);
// throws PlanError on violation.
void validate_tree(const QueryTree& t, const Catalog& cat);

}  // namespace optlab
