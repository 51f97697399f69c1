#pragma once

#include <cstdint>
#include <vector>

#include "optlab/datum.hpp"

namespace optlab {

// HyperLogLog distinct-count sketch. Precision p fixes 2^p registers;
// two sketches merge only when built with the same p and hash seed.
class HllSketch {
 public:
  static constexpr int kDefaultPrecision = 12;

  explicit HllSketch(int p = kDefaultPrecision, uint64_t seed = 0);

  int precision() const { return p_; }
  uint64_t seed() const { return seed_; }
  size_t register_count() const { return registers_.size(); }
  const std::vector<uint8_t>& registers() const { return registers_; }

  void add(const Datum& d);
  void add_int(int64_t v) { add(Datum::from_int(v)); }

  // Register-wise max; commutative, associative, idempotent.
  void merge(const HllSketch& other);

  // Raw HLL estimate with linear-counting correction in the small range.
  double estimate() const;

  std::vector<uint8_t> to_bytes() const;
  static HllSketch from_bytes(const std::vector<uint8_t>& bytes);

  bool operator==(const HllSketch& o) const {
    return p_ == o.p_ && seed_ == o.seed_ && registers_ == o.registers_;
  }

 private:
  int p_;
  uint64_t seed_;
  std::vector<uint8_t> registers_;
};

}  // namespace optlab
