#include "optlab/parser.hpp"

#include "doctest.h"
#include "optlab/common.hpp"

using namespace optlab;

TEST_SUITE("parser") {

TEST_CASE("select structure lands in the expected slots") {
  auto sel = parse_query(
      "select distinct c_custkey, c_acctbal as bal "
      "from customer, orders "
      "where c_custkey = o_custkey and o_totalprice > 100.5 "
      "group by c_custkey, c_acctbal "
      "order by c_acctbal desc, c_custkey "
      "limit 10");
  CHECK(sel->distinct);
  REQUIRE(sel->items.size() == 2);
  CHECK(sel->items[0].alias.empty());
  CHECK(sel->items[1].alias == "bal");
  CHECK(sel->items[1].expr->op == AstExprOp::ColumnName);
  CHECK(sel->items[1].expr->name == "c_acctbal");
  REQUIRE(sel->from.size() == 2);
  CHECK(sel->from[0]->table_name == "customer");
  CHECK(sel->from[1]->table_name == "orders");
  REQUIRE(sel->where != nullptr);
  CHECK(sel->where->op == AstExprOp::BinOp);
  CHECK(sel->where->bin == BinOpKind::And);
  CHECK(sel->group_by.size() == 2);
  REQUIRE(sel->order_by.size() == 2);
  CHECK(sel->order_by[0].desc);
  CHECK(!sel->order_by[1].desc);
  REQUIRE(sel->limit.has_value());
  CHECK(*sel->limit == 10);
}

TEST_CASE("identifiers fold to lower case, string literals do not") {
  auto sel = parse_query("SELECT C_CUSTKEY FROM Customer WHERE c_mktsegment = 'BUILDING'");
  CHECK(sel->items[0].expr->name == "c_custkey");
  CHECK(sel->from[0]->table_name == "customer");
  const AstExpr& cmp = *sel->where;
  CHECK(cmp.children[1]->value == Datum::from_text("BUILDING"));
}

TEST_CASE("string literals unescape doubled quotes") {
  auto sel = parse_query("select c_custkey from customer where c_mktsegment = 'O''Brien'");
  CHECK(sel->where->children[1]->value == Datum::from_text("O'Brien"));
}

TEST_CASE("numbers parse as ints or decimals, with unary minus") {
  auto sel = parse_query("select 1, 2.5, -3, -4.25 from region");
  CHECK(sel->items[0].expr->value == Datum::from_int(1));
  CHECK(sel->items[1].expr->value == Datum::from_decimal(2.5));
  CHECK(sel->items[2].expr->value == Datum::from_int(-3));
  CHECK(sel->items[3].expr->value == Datum::from_decimal(-4.25));
}

TEST_CASE("date and interval literals") {
  auto sel = parse_query(
      "select o_orderkey from orders "
      "where o_orderdate < date '1995-03-15' + interval '2' month");
  const AstExpr& cmp = *sel->where;
  CHECK(cmp.bin == BinOpKind::Lt);
  const AstExpr& rhs = *cmp.children[1];
  CHECK(rhs.bin == BinOpKind::Add);
  CHECK(rhs.children[0]->value == Datum::from_date_days(parse_date_iso("1995-03-15")));
  CHECK(rhs.children[1]->value == Datum::from_interval(2, IntervalUnit::Month));
  CHECK_THROWS_AS(parse_query("select 1 from region where r_regionkey < date 'bogus'"),
                  ParseError);
  CHECK_THROWS_AS(parse_query("select 1 from region where r_regionkey < interval '2' week"),
                  ParseError);
}

TEST_CASE("in-list, in-subquery, exists, and their negations") {
  auto in_list = parse_query("select 1 from nation where n_nationkey in (1, 2, 3)");
  const AstExpr& lst = *in_list->where;
  CHECK(lst.op == AstExprOp::InList);
  CHECK(!lst.negated);
  CHECK(lst.children.size() == 4);  // needle + 3 items

  auto not_in = parse_query(
      "select 1 from customer where c_custkey not in (select o_custkey from orders)");
  CHECK(not_in->where->op == AstExprOp::InSubquery);
  CHECK(not_in->where->negated);
  REQUIRE(not_in->where->subquery != nullptr);
  CHECK(not_in->where->subquery->from[0]->table_name == "orders");

  auto anti = parse_query(
      "select 1 from customer where not exists (select 1 from orders where o_custkey = c_custkey)");
  CHECK(anti->where->op == AstExprOp::Exists);
  CHECK(anti->where->negated);

  auto semi = parse_query("select 1 from customer where exists (select 1 from orders)");
  CHECK(!semi->where->negated);
}

TEST_CASE("scalar subqueries parse inside comparisons") {
  auto sel = parse_query(
      "select c_custkey from customer where c_acctbal > (select max(o_totalprice) from orders)");
  const AstExpr& cmp = *sel->where;
  CHECK(cmp.children[1]->op == AstExprOp::ScalarSubquery);
  CHECK(cmp.children[1]->subquery->items[0].expr->op == AstExprOp::AggCall);
  CHECK(cmp.children[1]->subquery->items[0].expr->agg == AggKind::Max);
}

TEST_CASE("aggregate calls accept a star only for count") {
  auto sel = parse_query("select count(*), sum(o_totalprice) from orders");
  CHECK(sel->items[0].expr->op == AstExprOp::AggCall);
  CHECK(sel->items[0].expr->agg == AggKind::Count);
  CHECK(sel->items[0].expr->star_arg);
  CHECK(sel->items[0].expr->children.empty());
  CHECK(sel->items[1].expr->agg == AggKind::Sum);
  CHECK(sel->items[1].expr->children.size() == 1);
  CHECK_THROWS_AS(parse_query("select sum(*) from orders"), ParseError);
}

TEST_CASE("qualified columns and explicit joins") {
  auto sel = parse_query(
      "select c.c_custkey from customer c left join orders o on c.c_custkey = o.o_custkey");
  REQUIRE(sel->from.size() == 1);
  const AstTableRef& j = *sel->from[0];
  CHECK(j.is_join);
  CHECK(j.join_kind == AstJoinKind::Left);
  CHECK(j.left->table_name == "customer");
  CHECK(j.left->alias == "c");
  CHECK(j.right->alias == "o");
  REQUIRE(j.on_qual != nullptr);
  CHECK(j.on_qual->children[0]->qualifier == "c");
  CHECK(j.on_qual->children[0]->name == "c_custkey");
}

TEST_CASE("leading hint comments become hint specs") {
  auto sel = parse_query(
      "/*+ HASHJOIN(customer orders) mergejoin(a b) */ select 1 from customer, orders");
  REQUIRE(sel->hints.size() == 2);
  CHECK(sel->hints[0].method == JoinMethod::HashJoin);
  CHECK(sel->hints[0].tables == std::vector<std::string>{"customer", "orders"});
  CHECK(sel->hints[1].method == JoinMethod::MergeJoin);

  CHECK_THROWS_AS(parse_query("/*+ sortmerge(a b) */ select 1 from region"), ParseError);
  CHECK_THROWS_AS(parse_query("/*+ hashjoin() */ select 1 from region"), ParseError);
  CHECK_THROWS_AS(parse_query("/*+ hashjoin(a b) select 1 from region"), ParseError);
}

TEST_CASE("plain comments are skipped") {
  auto sel = parse_query(
      "select 1 -- trailing words\n"
      "from region /* block comment */ where r_regionkey = 0");
  CHECK(sel->from[0]->table_name == "region");
  REQUIRE(sel->where != nullptr);
}

TEST_CASE("errors carry the byte offset and the acceptable tokens") {
  std::string text = "select c_custkey frm customer";
  try {
    parse_query(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(text.substr(e.offset(), 3) == "frm");
    CHECK(!e.expected().empty());
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_query("select"), ParseError);
  CHECK_THROWS_AS(parse_query("select 1 from region limit 2.5"), ParseError);
  CHECK_THROWS_AS(parse_query("select 1 from region where"), ParseError);
  CHECK_THROWS_AS(parse_query("select 1 from region trailing garbage"), ParseError);
  CHECK_THROWS_AS(parse_query("select 1 from region where not c_acctbal"), ParseError);
}

TEST_CASE("a trailing semicolon is tolerated") {
  CHECK_NOTHROW(parse_query("select 1 from region;"));
  CHECK_THROWS_AS(parse_query("select 1 from region;;"), ParseError);
}

}  // TEST_SUITE
