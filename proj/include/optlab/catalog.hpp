#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "optlab/datum.hpp"
#include "optlab/hll.hpp"

namespace optlab {

// Hash seed used for sketches built from catalog value lists. Fixed so that
// sketches from separate loads of the same catalog are identical.
constexpr uint64_t kCatalogSketchSeed = 0x5eed5eed5eed5eedULL;

struct ColumnStats {
  std::string name;
  DataType type = DataType::Int;
  double ndv = 1.0;
  double null_frac = 0.0;
  std::optional<Datum> min_value;
  std::optional<Datum> max_value;
  // Raw value list from the catalog file, kept for round-tripping; the
  // sketch is built from it at load time.
  std::optional<std::vector<Datum>> hll_values;
  std::optional<HllSketch> sketch;

  bool operator==(const ColumnStats& o) const;
};

struct IndexDef {
  std::string name;
  std::vector<int> column_ordinals;
  bool unique = false;

  bool operator==(const IndexDef& o) const = default;
};

struct TableDef {
  uint32_t oid = 0;
  std::string name;
  double row_count = 0;
  double page_count = 0;
  std::vector<ColumnStats> columns;
  std::vector<IndexDef> indexes;
  std::optional<std::vector<int>> primary_key;  // column ordinals

  int column_ordinal(const std::string& col_name) const;  // -1 when absent
  const ColumnStats& column(int ordinal) const { return columns.at(static_cast<size_t>(ordinal)); }
  int row_width() const;
  // True when the column alone is a key: single-column pk or unique index.
  bool column_is_unique(int ordinal) const;

  bool operator==(const TableDef& o) const;
};

class Catalog {
 public:
  const std::vector<TableDef>& tables() const { return tables_; }
  void add_table(TableDef t);

  const TableDef* find_table(const std::string& name) const;
  const TableDef* find_table_by_oid(uint32_t oid) const;
  const TableDef& table_by_oid(uint32_t oid) const;

  bool operator==(const Catalog& o) const { return tables_ == o.tables_; }

 private:
  std::vector<TableDef> tables_;
  std::unordered_map<std::string, size_t> by_name_;
  std::unordered_map<uint32_t, size_t> by_oid_;
};

Catalog load_catalog(const std::string& path);
Catalog load_catalog_text(const std::string& json_text);
void save_catalog(const Catalog& cat, const std::string& path);
std::string catalog_to_text(const Catalog& cat);

}  // namespace optlab
