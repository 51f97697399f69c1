#include "optlab/catalog.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace optlab {

using nlohmann::json;

bool ColumnStats::operator==(const ColumnStats& o) const {
  return name == o.name && type == o.type && ndv == o.ndv && null_frac == o.null_frac &&
         min_value == o.min_value && max_value == o.max_value && hll_values == o.hll_values &&
         sketch == o.sketch;
}

bool TableDef::operator==(const TableDef& o) const {
  return oid == o.oid && name == o.name && row_count == o.row_count && page_count == o.page_count &&
         columns == o.columns && indexes == o.indexes && primary_key == o.primary_key;
}

int TableDef::column_ordinal(const std::string& col_name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == col_name) return static_cast<int>(i);
  return -1;
}

int TableDef::row_width() const {
  int w = 0;
  for (const auto& c : columns) w += data_type_width(c.type);
  return w;
}

bool TableDef::column_is_unique(int ordinal) const {
  if (primary_key && primary_key->size() == 1 && (*primary_key)[0] == ordinal) return true;
  for (const auto& ix : indexes)
    if (ix.unique && ix.column_ordinals.size() == 1 && ix.column_ordinals[0] == ordinal) return true;
  return false;
}

void Catalog::add_table(TableDef t) {
  if (by_name_.count(t.name)) throw CatalogError("duplicate table name '" + t.name + "'");
  if (by_oid_.count(t.oid)) throw CatalogError("duplicate table oid " + std::to_string(t.oid));
  by_name_[t.name] = tables_.size();
  by_oid_[t.oid] = tables_.size();
  tables_.push_back(std::move(t));
}

const TableDef* Catalog::find_table(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &tables_[it->second];
}

const TableDef* Catalog::find_table_by_oid(uint32_t oid) const {
  auto it = by_oid_.find(oid);
  return it == by_oid_.end() ? nullptr : &tables_[it->second];
}

const TableDef& Catalog::table_by_oid(uint32_t oid) const {
  const TableDef* t = find_table_by_oid(oid);
  if (!t) throw CatalogError("no table with oid " + std::to_string(oid));
  return *t;
}

namespace {

// Line/column of a byte offset, both 1-based, for parse diagnostics.
std::pair<int, int> line_col_at(const std::string& text, size_t offset) {
  int line = 1, col = 1;
  for (size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Datum datum_from_json(const json& v, DataType type, const std::string& where) {
  switch (type) {
    case DataType::Int:
      if (!v.is_number_integer()) throw CatalogError(where + ": expected integer");
      return Datum::from_int(v.get<int64_t>());
    case DataType::Decimal:
      if (!v.is_number()) throw CatalogError(where + ": expected number");
      return Datum::from_decimal(v.get<double>());
    case DataType::Date:
      if (!v.is_string()) throw CatalogError(where + ": expected date string");
      return Datum::from_date_days(parse_date_iso(v.get<std::string>()));
    case DataType::Text:
      if (!v.is_string()) throw CatalogError(where + ": expected string");
      return Datum::from_text(v.get<std::string>());
  }
  throw CatalogError(where + ": unsupported type");
}

json datum_to_json(const Datum& d) {
  switch (d.kind) {
    case Datum::Kind::Int: return d.int_v;
    case Datum::Kind::Decimal: return d.decimal_v;
    case Datum::Kind::Date: return format_date_iso(d.int_v);
    case Datum::Kind::Text: return d.text_v;
    default: return nullptr;
  }
}

ColumnStats parse_column(const json& jc, const std::string& table_name) {
  ColumnStats col;
  if (!jc.is_object()) throw CatalogError("table '" + table_name + "': column entry must be an object");
  if (!jc.contains("name") || !jc["name"].is_string())
    throw CatalogError("table '" + table_name + "': column missing string 'name'");
  col.name = jc["name"].get<std::string>();
  const std::string where = "table '" + table_name + "' column '" + col.name + "'";
  if (!jc.contains("type") || !jc["type"].is_string()) throw CatalogError(where + ": missing string 'type'");
  col.type = data_type_from_name(jc["type"].get<std::string>());
  if (!jc.contains("ndv") || !jc["ndv"].is_number()) throw CatalogError(where + ": missing numeric 'ndv'");
  col.ndv = jc["ndv"].get<double>();
  if (col.ndv <= 0) throw CatalogError(where + ": ndv must be positive");
  if (!jc.contains("null_frac") || !jc["null_frac"].is_number())
    throw CatalogError(where + ": missing numeric 'null_frac'");
  col.null_frac = jc["null_frac"].get<double>();
  if (col.null_frac < 0 || col.null_frac > 1) throw CatalogError(where + ": null_frac must be in [0,1]");
  if (jc.contains("min")) col.min_value = datum_from_json(jc["min"], col.type, where + " 'min'");
  if (jc.contains("max")) col.max_value = datum_from_json(jc["max"], col.type, where + " 'max'");
  if (col.min_value && col.max_value && datum_compare(*col.min_value, *col.max_value) > 0)
    throw CatalogError(where + ": min exceeds max");
  if (jc.contains("hll_values")) {
    if (!jc["hll_values"].is_array()) throw CatalogError(where + ": hll_values must be an array");
    std::vector<Datum> values;
    values.reserve(jc["hll_values"].size());
    for (const auto& v : jc["hll_values"]) values.push_back(datum_from_json(v, col.type, where + " 'hll_values'"));
    HllSketch sketch(HllSketch::kDefaultPrecision, kCatalogSketchSeed);
    for (const auto& d : values) sketch.add(d);
    col.hll_values = std::move(values);
    col.sketch = std::move(sketch);
  }
  return col;
}

TableDef parse_table(const json& jt) {
  TableDef t;
  if (!jt.is_object()) throw CatalogError("table entry must be an object");
  if (!jt.contains("name") || !jt["name"].is_string()) throw CatalogError("table missing string 'name'");
  t.name = jt["name"].get<std::string>();
  const std::string where = "table '" + t.name + "'";
  if (!jt.contains("oid") || !jt["oid"].is_number_unsigned())
    throw CatalogError(where + ": missing unsigned 'oid'");
  t.oid = jt["oid"].get<uint32_t>();
  if (t.oid == 0) throw CatalogError(where + ": oid must be nonzero");
  if (!jt.contains("row_count") || !jt["row_count"].is_number())
    throw CatalogError(where + ": missing numeric 'row_count'");
  t.row_count = jt["row_count"].get<double>();
  if (t.row_count < 0) throw CatalogError(where + ": row_count must be nonnegative");
  if (!jt.contains("page_count") || !jt["page_count"].is_number())
    throw CatalogError(where + ": missing numeric 'page_count'");
  t.page_count = jt["page_count"].get<double>();
  if (t.page_count < 0) throw CatalogError(where + ": page_count must be nonnegative");
  if (!jt.contains("columns") || !jt["columns"].is_array() || jt["columns"].empty())
    throw CatalogError(where + ": missing non-empty 'columns' array");
  for (const auto& jc : jt["columns"]) {
    ColumnStats col = parse_column(jc, t.name);
    if (t.column_ordinal(col.name) >= 0)
      throw CatalogError(where + ": duplicate column '" + col.name + "'");
    t.columns.push_back(std::move(col));
  }
  if (jt.contains("indexes")) {
    if (!jt["indexes"].is_array()) throw CatalogError(where + ": indexes must be an array");
    for (const auto& ji : jt["indexes"]) {
      IndexDef ix;
      if (!ji.contains("name") || !ji["name"].is_string())
        throw CatalogError(where + ": index missing string 'name'");
      ix.name = ji["name"].get<std::string>();
      if (!ji.contains("columns") || !ji["columns"].is_array() || ji["columns"].empty())
        throw CatalogError(where + " index '" + ix.name + "': missing non-empty 'columns'");
      for (const auto& jcol : ji["columns"]) {
        if (!jcol.is_string()) throw CatalogError(where + " index '" + ix.name + "': column names must be strings");
        int ord = t.column_ordinal(jcol.get<std::string>());
        if (ord < 0)
          throw CatalogError(where + " index '" + ix.name + "': unknown column '" + jcol.get<std::string>() + "'");
        ix.column_ordinals.push_back(ord);
      }
      if (ji.contains("unique")) {
        if (!ji["unique"].is_boolean()) throw CatalogError(where + " index '" + ix.name + "': unique must be boolean");
        ix.unique = ji["unique"].get<bool>();
      }
      t.indexes.push_back(std::move(ix));
    }
  }
  if (jt.contains("primary_key")) {
    if (!jt["primary_key"].is_array() || jt["primary_key"].empty())
      throw CatalogError(where + ": primary_key must be a non-empty array");
    std::vector<int> pk;
    for (const auto& jcol : jt["primary_key"]) {
      if (!jcol.is_string()) throw CatalogError(where + ": primary_key entries must be column names");
      int ord = t.column_ordinal(jcol.get<std::string>());
      if (ord < 0) throw CatalogError(where + ": primary_key references unknown column '" + jcol.get<std::string>() + "'");
      pk.push_back(ord);
    }
    t.primary_key = std::move(pk);
  }
  return t;
}

}  // namespace

Catalog load_catalog_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_col_at(json_text, e.byte);
    throw CatalogError("catalog JSON syntax error at line " + std::to_string(line) + ", column " +
                       std::to_string(col) + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("tables") || !root["tables"].is_array())
    throw CatalogError("catalog root must be an object with a 'tables' array");
  Catalog cat;
  for (const auto& jt : root["tables"]) cat.add_table(parse_table(jt));
  return cat;
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open catalog file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_catalog_text(ss.str());
}

std::string catalog_to_text(const Catalog& cat) {
  json root;
  root["tables"] = json::array();
  for (const auto& t : cat.tables()) {
    json jt;
    jt["oid"] = t.oid;
    jt["name"] = t.name;
    jt["row_count"] = t.row_count;
    jt["page_count"] = t.page_count;
    jt["columns"] = json::array();
    for (const auto& c : t.columns) {
      json jc;
      jc["name"] = c.name;
      jc["type"] = data_type_name(c.type);
      jc["ndv"] = c.ndv;
      jc["null_frac"] = c.null_frac;
      if (c.min_value) jc["min"] = datum_to_json(*c.min_value);
      if (c.max_value) jc["max"] = datum_to_json(*c.max_value);
      if (c.hll_values) {
        json arr = json::array();
        for (const auto& d : *c.hll_values) arr.push_back(datum_to_json(d));
        jc["hll_values"] = std::move(arr);
      }
      jt["columns"].push_back(std::move(jc));
    }
    if (!t.indexes.empty()) {
      jt["indexes"] = json::array();
      for (const auto& ix : t.indexes) {
        json ji;
        ji["name"] = ix.name;
        ji["columns"] = json::array();
        for (int ord : ix.column_ordinals) ji["columns"].push_back(t.columns[static_cast<size_t>(ord)].name);
        ji["unique"] = ix.unique;
        jt["indexes"].push_back(std::move(ji));
      }
    }
    if (t.primary_key) {
      json jpk = json::array();
      for (int ord : *t.primary_key) jpk.push_back(t.columns[static_cast<size_t>(ord)].name);
      jt["primary_key"] = std::move(jpk);
    }
    root["tables"].push_back(std::move(jt));
  }
  return root.dump(2) + "\n";
}

void save_catalog(const Catalog& cat, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CatalogError("cannot write catalog file '" + path + "'");
  out << catalog_to_text(cat);
}

}  // namespace optlab
