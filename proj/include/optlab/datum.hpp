#pragma once

#include <cstdint>
#include <string>

#include "optlab/common.hpp"

namespace optlab {

enum class DataType { Int, Decimal, Text, Date };

const char* data_type_name(DataType t);
DataType data_type_from_name(const std::string& name);

// Bytes a column of this type contributes to a row width estimate.
int data_type_width(DataType t);

enum class IntervalUnit { Day, Month, Year };

// Runtime value. Dates are days since 1970-01-01; intervals keep their
// original count/unit so rendering round-trips.
struct Datum {
  enum class Kind { Null, Int, Decimal, Text, Date, Interval } kind = Kind::Null;
  int64_t int_v = 0;        // Int, Date (days), Interval (count)
  double decimal_v = 0.0;   // Decimal
  std::string text_v;       // Text
  IntervalUnit unit = IntervalUnit::Day;

  static Datum null() { return Datum{}; }
  static Datum from_int(int64_t v) {
    Datum d;
    d.kind = Kind::Int;
    d.int_v = v;
    return d;
  }
  static Datum from_decimal(double v) {
    Datum d;
    d.kind = Kind::Decimal;
    d.decimal_v = v;
    return d;
  }
  static Datum from_text(std::string v) {
    Datum d;
    d.kind = Kind::Text;
    d.text_v = std::move(v);
    return d;
  }
  static Datum from_date_days(int64_t days) {
    Datum d;
    d.kind = Kind::Date;
    d.int_v = days;
    return d;
  }
  static Datum from_interval(int64_t count, IntervalUnit u) {
    Datum d;
    d.kind = Kind::Interval;
    d.int_v = count;
    d.unit = u;
    return d;
  }

  bool is_null() const { return kind == Kind::Null; }

  // Numeric view for comparisons and range interpolation.
  double as_double() const;

  bool operator==(const Datum& o) const;
  bool operator!=(const Datum& o) const { return !(*this == o); }

  std::string to_string() const;
};

// Three-way compare for order predicates; null sorts before everything.
int datum_compare(const Datum& a, const Datum& b);

// Seeded content hash; equal datums hash equal under the same seed.
uint64_t datum_hash(const Datum& d, uint64_t seed);

// Calendar helpers. parse_date_iso accepts YYYY-MM-DD.
int64_t parse_date_iso(const std::string& text);
std::string format_date_iso(int64_t days);
int64_t date_add_interval(int64_t days, int64_t count, IntervalUnit unit);

}  // namespace optlab
