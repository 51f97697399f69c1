#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

using nlohmann::json;

namespace {

json int_range(int lo, int hi) {
  json arr = json::array();
  for (int v = lo; v <= hi; ++v) arr.push_back(v);
  return arr;
}

json column(const std::string& name, const std::string& type, double ndv) {
  return json{{"name", name}, {"type", type}, {"ndv", ndv}, {"null_frac", 0.0}};
}

json int_column(const std::string& name, double ndv, int lo, int hi, bool hll = false) {
  json c = column(name, "int", ndv);
  c["min"] = lo;
  c["max"] = hi;
  if (hll) c["hll_values"] = int_range(lo, hi);
  return c;
}

json dec_column(const std::string& name, double ndv, double lo, double hi) {
  json c = column(name, "decimal", ndv);
  c["min"] = lo;
  c["max"] = hi;
  return c;
}

json date_column(const std::string& name, double ndv, const std::string& lo, const std::string& hi) {
  json c = column(name, "date", ndv);
  c["min"] = lo;
  c["max"] = hi;
  return c;
}

json text_column(const std::string& name, double ndv) { return column(name, "text", ndv); }

json index(const std::string& name, std::vector<std::string> cols, bool unique = false) {
  json ix{{"name", name}, {"columns", json::array()}};
  for (auto& c : cols) ix["columns"].push_back(c);
  if (unique) ix["unique"] = true;
  return ix;
}

json table(const std::string& name, uint32_t oid, double rows, double pages, json columns,
           json indexes, std::vector<std::string> pk = {}) {
  json t{{"name", name}, {"oid", oid},     {"row_count", rows},
         {"page_count", pages}, {"columns", std::move(columns)}, {"indexes", std::move(indexes)}};
  if (!pk.empty()) {
    t["primary_key"] = json::array();
    for (auto& c : pk) t["primary_key"].push_back(c);
  }
  return t;
}

json build_catalog() {
  json tables = json::array();

  tables.push_back(table(
      "region", 1001, 5, 1,
      json::array({int_column("r_regionkey", 5, 0, 4), text_column("r_name", 5)}),
      json::array({index("region_pk", {"r_regionkey"}, true)}), {"r_regionkey"}));

  tables.push_back(table(
      "nation", 1002, 25, 1,
      json::array({int_column("n_nationkey", 25, 0, 24), int_column("n_regionkey", 5, 0, 4),
                   text_column("n_name", 25)}),
      json::array({index("nation_pk", {"n_nationkey"}, true), index("nation_region_idx", {"n_regionkey"})}),
      {"n_nationkey"}));

  tables.push_back(table(
      "supplier", 1003, 500, 10,
      json::array({int_column("s_suppkey", 500, 1, 500, true), int_column("s_nationkey", 25, 0, 24),
                   dec_column("s_acctbal", 450, -900.0, 9900.0)}),
      json::array({index("supplier_pk", {"s_suppkey"}, true), index("supplier_nation_idx", {"s_nationkey"})}),
      {"s_suppkey"}));

  tables.push_back(table(
      "customer", 1004, 2000, 50,
      json::array({int_column("c_custkey", 2000, 1, 2000, true), int_column("c_nationkey", 25, 0, 24),
                   text_column("c_mktsegment", 5), dec_column("c_acctbal", 1800, -999.0, 9999.0)}),
      json::array({index("customer_pk", {"c_custkey"}, true), index("customer_nation_idx", {"c_nationkey"})}),
      {"c_custkey"}));

  tables.push_back(table(
      "orders", 1005, 6000, 120,
      json::array({int_column("o_orderkey", 6000, 1, 6000, true),
                   int_column("o_custkey", 1500, 1, 1500, true),
                   date_column("o_orderdate", 1200, "1992-01-01", "1998-08-02"),
                   dec_column("o_totalprice", 5500, 850.0, 480000.0), text_column("o_orderstatus", 3)}),
      json::array({index("orders_pk", {"o_orderkey"}, true), index("orders_cust_idx", {"o_custkey"}),
                   index("orders_date_idx", {"o_orderdate"})}),
      {"o_orderkey"}));

  tables.push_back(table(
      "lineitem", 1006, 24000, 480,
      json::array({int_column("l_orderkey", 6000, 1, 6000, true),
                   int_column("l_partkey", 1000, 1, 1000, true),
                   int_column("l_suppkey", 500, 1, 500, true),
                   dec_column("l_quantity", 50, 1.0, 50.0),
                   dec_column("l_extendedprice", 20000, 900.0, 100000.0),
                   date_column("l_shipdate", 1400, "1992-01-03", "1998-12-01"),
                   text_column("l_returnflag", 3)}),
      json::array({index("lineitem_order_idx", {"l_orderkey"}), index("lineitem_part_idx", {"l_partkey"}),
                   index("lineitem_ship_idx", {"l_shipdate"})})));

  tables.push_back(table(
      "part", 1007, 1000, 25,
      json::array({int_column("p_partkey", 1000, 1, 1000, true), text_column("p_brand", 25),
                   int_column("p_size", 50, 1, 50), dec_column("p_retailprice", 900, 900.0, 2000.0)}),
      json::array({index("part_pk", {"p_partkey"}, true)}), {"p_partkey"}));

  tables.push_back(table(
      "partsupp", 1008, 4000, 80,
      json::array({int_column("ps_partkey", 1000, 1, 1000, true),
                   int_column("ps_suppkey", 500, 1, 500, true),
                   int_column("ps_availqty", 999, 1, 9999),
                   dec_column("ps_supplycost", 950, 1.0, 1000.0)}),
      json::array({index("partsupp_part_idx", {"ps_partkey"}), index("partsupp_supp_idx", {"ps_suppkey"})})));

  tables.push_back(table(
      "events", 1009, 30000, 600,
      json::array({int_column("e_id", 30000, 1, 30000), int_column("e_user", 10000, 1, 10000, true),
                   dec_column("e_amount", 5000, 0.0, 100000.0),
                   date_column("e_day", 365, "2023-01-01", "2023-12-31"), text_column("e_kind", 8)}),
      json::array({index("events_pk", {"e_id"}, true), index("events_user_idx", {"e_user"}),
                   index("events_day_idx", {"e_day"})}),
      {"e_id"}));

  tables.push_back(table(
      "active_users", 1010, 3000, 40,
      json::array({int_column("u_id", 3000, 1, 3000, true), text_column("u_tier", 4),
                   dec_column("u_score", 2500, 0.0, 1000.0)}),
      json::array({index("active_users_pk", {"u_id"}, true)}), {"u_id"}));

  tables.push_back(table(
      "big_archive", 1011, 200000, 4000,
      json::array({int_column("a_id", 200000, 1, 200000), int_column("a_custkey", 2000, 1, 2000),
                   text_column("a_payload", 150000)}),
      json::array({index("big_archive_pk", {"a_id"}, true), index("big_archive_cust_idx", {"a_custkey"})}),
      {"a_id"}));

  return json{{"tables", std::move(tables)}};
}

struct Gen {
  std::mt19937_64 rng;

  int ri(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  std::string dec(double lo, double hi) {
    double v = std::uniform_real_distribution<double>(lo, hi)(rng);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }

  std::string date(int year_lo, int year_hi) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", ri(year_lo, year_hi), ri(1, 12), ri(1, 28));
    return buf;
  }
};

std::vector<std::pair<std::string, std::string>> build_corpus(Gen& g) {
  std::vector<std::pair<std::string, std::string>> qs;
  auto add = [&](const std::string& name, const std::string& sql) { qs.emplace_back(name, sql + "\n"); };

  // Plain scans and joins; no cost-based rule matches.
  add("q01_scan_filter",
      "select l_orderkey, l_extendedprice from lineitem where l_shipdate > date '" + g.date(1994, 1997) +
          "' and l_quantity > " + g.dec(25, 45) + " order by l_extendedprice desc limit 20");
  add("q02_scan_range",
      "select o_orderkey, o_totalprice from orders where o_totalprice > " + g.dec(200000, 400000) +
          " and o_orderdate > date '" + g.date(1995, 1997) + "'");
  add("q03_scan_inlist",
      "select p_partkey from part where p_size in (" + std::to_string(g.ri(1, 10)) + ", " +
          std::to_string(g.ri(11, 20)) + ", " + std::to_string(g.ri(21, 30)) + ", " +
          std::to_string(g.ri(31, 40)) + ", " + std::to_string(g.ri(41, 50)) +
          ") and p_retailprice > " + g.dec(1000, 1500));
  add("q04_join_cust_orders",
      "select c_custkey, o_orderkey from customer, orders where c_custkey = o_custkey and o_totalprice > " +
          g.dec(100000, 300000) + " and c_acctbal > " + g.dec(0, 5000));
  add("q05_join_supp_nation",
      "select s_suppkey, n_name from supplier, nation where s_nationkey = n_nationkey and n_regionkey = " +
          std::to_string(g.ri(0, 4)));
  add("q06_join_part_line",
      "select p_partkey, l_extendedprice from part, lineitem where p_partkey = l_partkey and l_shipdate > date '" +
          g.date(1995, 1997) + "' order by l_extendedprice desc limit 50");
  add("q07_chain3",
      "select c_custkey, l_extendedprice from customer, orders, lineitem where c_custkey = o_custkey "
      "and o_orderkey = l_orderkey and o_orderdate > date '" +
          g.date(1994, 1996) + "' and l_quantity > " + g.dec(20, 40));
  add("q08_chain3_dims",
      "select n_name, c_acctbal from region, nation, customer where r_regionkey = n_regionkey "
      "and n_nationkey = c_nationkey and r_regionkey = " +
          std::to_string(g.ri(0, 4)));
  add("q09_star4",
      "select c_custkey, o_totalprice from customer, orders, nation, region where c_custkey = o_custkey "
      "and c_nationkey = n_nationkey and n_regionkey = r_regionkey and o_totalprice > " +
          g.dec(150000, 350000));
  add("q10_eager_archive5",
      "select n_name, c_mktsegment, count(a_id) from big_archive, customer, nation, region, supplier "
      "where a_custkey = c_custkey and c_nationkey = n_nationkey and n_regionkey = r_regionkey "
      "and s_nationkey = n_nationkey group by n_name, c_mktsegment");
  add("q11_hint_hash",
      "/*+ HASHJOIN(customer orders) */ select c_custkey, o_orderkey from customer, orders "
      "where c_custkey = o_custkey and o_totalprice > " +
          g.dec(100000, 250000));
  add("q12_hint_nestloop",
      "/*+ NESTLOOP(supplier nation) */ select s_suppkey, n_name from supplier, nation "
      "where s_nationkey = n_nationkey");
  add("q13_left_join",
      "select c_custkey, o_orderkey from customer left join orders on c_custkey = o_custkey "
      "where c_acctbal > " +
          g.dec(2000, 8000));
  add("q14_exists_semi",
      "select s_suppkey from supplier where exists (select ps_suppkey from partsupp "
      "where ps_suppkey = s_suppkey and ps_availqty > " +
          std::to_string(g.ri(4000, 9000)) + ")");
  add("q15_not_exists_anti",
      "select c_custkey from customer where not exists (select o_custkey from orders "
      "where o_custkey = c_custkey and o_totalprice > " +
          g.dec(300000, 450000) + ")");

  // IN-subquery shapes the merge rule settles.
  add("q16_in_merge_basic",
      "select c_custkey, c_acctbal from customer where c_custkey in (select o_custkey from orders "
      "where o_totalprice > " +
          g.dec(100000, 300000) + ")");
  add("q17_in_merge_filter",
      "select c_custkey, c_mktsegment from customer where c_acctbal > " + g.dec(0, 4000) +
          " and c_custkey in (select o_custkey from orders where o_orderdate > date '" +
          g.date(1994, 1997) + "')");
  add("q18_in_merge_parts",
      "select p_partkey, p_retailprice from part where p_partkey in (select l_partkey from lineitem "
      "where l_shipdate > date '" +
          g.date(1995, 1997) + "')");
  add("q19_in_merge_supp",
      "select s_suppkey, s_acctbal from supplier where s_suppkey in (select ps_suppkey from partsupp "
      "where ps_supplycost > " +
          g.dec(300, 800) + ")");
  add("q20_in_merge_orders",
      "select o_orderkey, o_totalprice from orders where o_orderkey in (select l_orderkey from lineitem "
      "where l_quantity > " +
          g.dec(30, 48) + ")");
  add("q21_in_merge_distinct",
      "select distinct c_mktsegment from customer where c_custkey in (select o_custkey from orders "
      "where o_totalprice > " +
          g.dec(150000, 350000) + ")");
  add("q22_in_merge_distinct_join",
      "select distinct n_name from nation, customer where n_nationkey = c_nationkey and c_custkey in "
      "(select o_custkey from orders where o_orderdate > date '" +
          g.date(1995, 1997) + "')");
  add("q23_in_merge_join",
      "select c_custkey, o_orderkey from customer, orders where c_custkey = o_custkey and o_orderkey in "
      "(select l_orderkey from lineitem where l_extendedprice > " +
          g.dec(40000, 90000) + ")");
  add("q24_in_merge_corr",
      "select s_suppkey, s_acctbal from supplier where s_suppkey in (select ps_suppkey from partsupp "
      "where ps_availqty > s_suppkey)");
  add("q25_in_merge_corr2",
      "select c_custkey, c_acctbal from customer where c_custkey in (select o_custkey from orders "
      "where o_totalprice > c_acctbal)");
  add("q26_in_merge_spill",
      "select a_id, a_payload from big_archive where a_custkey in (select c_custkey from customer)");
  add("q27_in_merge_spill2",
      "select a_id, a_payload from big_archive where a_custkey in (select c_custkey from customer "
      "where c_acctbal > " +
          g.dec(-500, 500) + ")");
  add("q28_in_merge_spill3",
      "select a_id, a_payload, a_custkey from big_archive where a_custkey in (select o_custkey from orders "
      "where o_totalprice > " +
          g.dec(50000, 150000) + ")");
  add("q29_in_merge_status",
      "select distinct c_nationkey from customer where c_custkey in (select o_custkey from orders "
      "where o_orderstatus = 'F')");
  add("q30_in_merge_child_join",
      "select c_custkey, c_acctbal from customer where c_custkey in (select o_custkey from orders, lineitem "
      "where o_orderkey = l_orderkey and l_quantity > " +
          g.dec(35, 48) + ")");
  add("q31_in_merge_events",
      "select u_id, u_tier from active_users where u_id in (select e_user from events where e_amount > " +
          g.dec(30000, 80000) + ")");
  add("q32_in_merge_limit",
      "select c_custkey, c_acctbal from customer where c_custkey in (select o_custkey from orders "
      "where o_totalprice > " +
          g.dec(100000, 250000) + ") order by c_custkey limit 25");
  add("q33_in_merge_archive",
      "select a_id, a_payload from big_archive where a_id in (select e_id from events where e_day > date '" +
          g.date(2023, 2023) + "')");

  // Aggregation-over-join shapes the eager aggregation rule settles.
  add("q34_eager_segment",
      "select c_mktsegment, sum(o_totalprice) from customer, orders where o_custkey = c_custkey "
      "group by c_mktsegment");
  add("q35_eager_segment_filter",
      "select c_mktsegment, sum(o_totalprice) from customer, orders where o_custkey = c_custkey "
      "and o_orderdate > date '" +
          g.date(1994, 1996) + "' and c_acctbal > " + g.dec(0, 3000) + " group by c_mktsegment");
  add("q36_eager_nation",
      "select c_nationkey, count(o_orderkey), max(o_totalprice) from customer, orders "
      "where o_custkey = c_custkey group by c_nationkey");
  add("q37_eager_unique_key",
      "select c_custkey, sum(o_totalprice) from customer, orders where o_custkey = c_custkey "
      "group by c_custkey");
  add("q38_eager_unique_key2",
      "select c_custkey, c_acctbal, count(o_orderkey) from customer, orders where o_custkey = c_custkey "
      "and c_mktsegment = 'BUILDING' group by c_custkey, c_acctbal");
  add("q39_eager_status",
      "select o_orderstatus, sum(l_extendedprice) from orders, lineitem where l_orderkey = o_orderkey "
      "group by o_orderstatus");
  add("q40_eager_status_filter",
      "select o_orderstatus, sum(l_extendedprice), count(l_suppkey) from orders, lineitem "
      "where l_orderkey = o_orderkey and o_totalprice > " +
          g.dec(100000, 250000) + " and l_shipdate > date '" + g.date(1994, 1996) +
          "' group by o_orderstatus");
  add("q41_eager_absorb_part",
      "select o_orderstatus, sum(l_extendedprice) from orders, lineitem, part "
      "where l_orderkey = o_orderkey and l_partkey = p_partkey and p_size > " +
          std::to_string(g.ri(10, 40)) + " group by o_orderstatus");
  add("q42_eager_chain",
      "select n_name, sum(o_totalprice) from nation, customer, orders where o_custkey = c_custkey "
      "and c_nationkey = n_nationkey group by n_name");
  add("q43_eager_minmax",
      "select c_mktsegment, min(o_totalprice), max(o_totalprice) from customer, orders "
      "where o_custkey = c_custkey and o_orderstatus = 'O' group by c_mktsegment");
  add("q44_eager_order_by_agg",
      "select c_nationkey, sum(o_totalprice) from customer, orders where o_custkey = c_custkey "
      "group by c_nationkey order by sum(o_totalprice) desc limit 10");
  add("q45_eager_sparse_overlap",
      "select u_tier, sum(e_amount) from events, active_users where e_user = u_id group by u_tier");
  add("q46_eager_sparse_overlap2",
      "select u_tier, count(e_id) from events, active_users where e_user = u_id and e_day > date '" +
          g.date(2023, 2023) + "' group by u_tier");
  add("q47_eager_no_sketch",
      "select n_name, sum(s_acctbal) from supplier, nation where s_nationkey = n_nationkey "
      "group by n_name");
  add("q48_eager_no_sketch2",
      "select c_mktsegment, count(a_id) from customer, big_archive where a_custkey = c_custkey "
      "group by c_mktsegment");
  add("q49_eager_partsupp",
      "select p_brand, sum(ps_supplycost) from part, partsupp where ps_partkey = p_partkey "
      "group by p_brand");
  add("q50_eager_returnflag",
      "select p_brand, count(l_orderkey) from part, lineitem where l_partkey = p_partkey "
      "and l_returnflag = 'R' group by p_brand");
  add("q51_eager_chain6",
      "select n_name, c_mktsegment, sum(o_totalprice) from orders, customer, nation, region, "
      "supplier, partsupp where o_custkey = c_custkey and c_nationkey = n_nationkey "
      "and n_regionkey = r_regionkey and s_nationkey = n_nationkey and ps_suppkey = s_suppkey "
      "group by n_name, c_mktsegment");

  return qs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fixture catalog and query corpus generator"};
  std::string out_dir = "tests/fixtures";
  app.add_option("--out", out_dir, "output directory (catalog.json and corpus/ go here)");
  CLI11_PARSE(app, argc, argv);

  uint64_t seed = 42;
  if (const char* env = std::getenv("OPTLAB_SEED")) seed = std::strtoull(env, nullptr, 10);

  try {
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir + "/corpus");

    {
      std::ofstream out(out_dir + "/catalog.json", std::ios::binary);
      if (!out) throw std::runtime_error("cannot write catalog.json");
      out << build_catalog().dump(1) << "\n";
    }

    Gen g{std::mt19937_64(seed)};
    auto corpus = build_corpus(g);
    for (const auto& [name, sql] : corpus) {
      std::ofstream out(out_dir + "/corpus/" + name + ".sql", std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + name);
      out << sql;
    }
    std::printf("wrote catalog.json and %zu corpus queries to %s (seed %llu)\n", corpus.size(),
                out_dir.c_str(), static_cast<unsigned long long>(seed));
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
