#include "optlab/datum.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace optlab {

const char* data_type_name(DataType t) {
  switch (t) {
    case DataType::Int: return "int";
    case DataType::Decimal: return "decimal";
    case DataType::Text: return "text";
    case DataType::Date: return "date";
  }
  return "int";
}

DataType data_type_from_name(const std::string& name) {
  if (name == "int") return DataType::Int;
  if (name == "decimal") return DataType::Decimal;
  if (name == "text") return DataType::Text;
  if (name == "date") return DataType::Date;
  throw CatalogError("unknown column type '" + name + "'");
}

int data_type_width(DataType t) {
  switch (t) {
    case DataType::Int: return 4;
    case DataType::Decimal: return 8;
    case DataType::Date: return 4;
    case DataType::Text: return 32;
  }
  return 4;
}

double Datum::as_double() const {
  switch (kind) {
    case Kind::Int:
    case Kind::Date:
    case Kind::Interval: return static_cast<double>(int_v);
    case Kind::Decimal: return decimal_v;
    case Kind::Text:
    case Kind::Null: return 0.0;
  }
  return 0.0;
}

bool Datum::operator==(const Datum& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::Null: return true;
    case Kind::Int:
    case Kind::Date: return int_v == o.int_v;
    case Kind::Interval: return int_v == o.int_v && unit == o.unit;
    case Kind::Decimal: return decimal_v == o.decimal_v;
    case Kind::Text: return text_v == o.text_v;
  }
  return false;
}

std::string Datum::to_string() const {
  switch (kind) {
    case Kind::Null: return "null";
    case Kind::Int: return std::to_string(int_v);
    case Kind::Decimal: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%g", decimal_v);
      return buf;
    }
    case Kind::Text: return "'" + text_v + "'";
    case Kind::Date: return "date '" + format_date_iso(int_v) + "'";
    case Kind::Interval: {
      const char* u = unit == IntervalUnit::Day ? "day" : unit == IntervalUnit::Month ? "month" : "year";
      return "interval '" + std::to_string(int_v) + "' " + u;
    }
  }
  return "null";
}

int datum_compare(const Datum& a, const Datum& b) {
  if (a.is_null() || b.is_null()) {
    if (a.is_null() && b.is_null()) return 0;
    return a.is_null() ? -1 : 1;
  }
  if (a.kind == Datum::Kind::Text && b.kind == Datum::Kind::Text) {
    int c = a.text_v.compare(b.text_v);
    return c < 0 ? -1 : c > 0 ? 1 : 0;
  }
  double x = a.as_double(), y = b.as_double();
  return x < y ? -1 : x > y ? 1 : 0;
}

uint64_t datum_hash(const Datum& d, uint64_t seed) {
  switch (d.kind) {
    case Datum::Kind::Null: return mix64(seed ^ 0x6e756c6cULL);
    case Datum::Kind::Int:
    case Datum::Kind::Date:
    case Datum::Kind::Interval: {
      uint64_t v = static_cast<uint64_t>(d.int_v);
      return mix64(mix64(seed ^ 0x696e74ULL) ^ v);
    }
    case Datum::Kind::Decimal: {
      // Integral decimals hash like ints so mixed-type keys agree.
      double v = d.decimal_v;
      if (v == std::floor(v) && std::fabs(v) < 9e15) {
        uint64_t iv = static_cast<uint64_t>(static_cast<int64_t>(v));
        return mix64(mix64(seed ^ 0x696e74ULL) ^ iv);
      }
      uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      return mix64(mix64(seed ^ 0x646563ULL) ^ bits);
    }
    case Datum::Kind::Text: return hash_bytes(d.text_v.data(), d.text_v.size(), seed ^ 0x747874ULL);
  }
  return mix64(seed);
}

int64_t parse_date_iso(const std::string& text) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
    throw ParseError("invalid date literal '" + text + "'", 0, {"YYYY-MM-DD"});
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError("invalid date literal '" + text + "'", 0, {"YYYY-MM-DD"});
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_date_iso(int64_t days) {
  std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int64_t date_add_interval(int64_t days, int64_t count, IntervalUnit unit) {
  if (unit == IntervalUnit::Day) return days + count;
  std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  int64_t months = unit == IntervalUnit::Month ? count : count * 12;
  ymd += std::chrono::months{months};
  if (!ymd.ok()) ymd = ymd.year() / ymd.month() / std::chrono::last;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace optlab
