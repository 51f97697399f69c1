#include "optlab/hll.hpp"

#include <bit>
#include <cmath>
#include <cstring>

#include "optlab/common.hpp"

namespace optlab {

HllSketch::HllSketch(int p, uint64_t seed) : p_(p), seed_(seed) {
  if (p < 4 || p > 16) throw OptError("hll precision must be in [4,16]");
  registers_.assign(size_t{1} << p, 0);
}

void HllSketch::add(const Datum& d) {
  uint64_t h = datum_hash(d, seed_);
  size_t idx = h >> (64 - p_);
  uint64_t rest = h << p_;
  int rank = rest == 0 ? (64 - p_ + 1) : std::countl_zero(rest) + 1;
  if (rank > 64 - p_ + 1) rank = 64 - p_ + 1;
  if (registers_[idx] < rank) registers_[idx] = static_cast<uint8_t>(rank);
}

void HllSketch::merge(const HllSketch& other) {
  if (p_ != other.p_) throw OptError("hll merge requires equal precision");
  if (seed_ != other.seed_) throw OptError("hll merge requires equal hash seed");
  for (size_t i = 0; i < registers_.size(); ++i)
    if (registers_[i] < other.registers_[i]) registers_[i] = other.registers_[i];
}

static double alpha_for(size_t m) {
  if (m == 16) return 0.673;
  if (m == 32) return 0.697;
  if (m == 64) return 0.709;
  return 0.7213 / (1.0 + 1.079 / static_cast<double>(m));
}

double HllSketch::estimate() const {
  const double m = static_cast<double>(registers_.size());
  double sum = 0.0;
  size_t zeros = 0;
  for (uint8_t r : registers_) {
    sum += std::ldexp(1.0, -static_cast<int>(r));
    if (r == 0) ++zeros;
  }
  double e = alpha_for(registers_.size()) * m * m / sum;
  if (e <= 2.5 * m && zeros > 0) e = m * std::log(m / static_cast<double>(zeros));
  return e;
}

std::vector<uint8_t> HllSketch::to_bytes() const {
  std::vector<uint8_t> out;
  out.reserve(9 + registers_.size());
  out.push_back(static_cast<uint8_t>(p_));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(seed_ >> (8 * i)));
  out.insert(out.end(), registers_.begin(), registers_.end());
  return out;
}

HllSketch HllSketch::from_bytes(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 9) throw OptError("hll byte image too short");
  int p = bytes[0];
  uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed |= static_cast<uint64_t>(bytes[1 + i]) << (8 * i);
  HllSketch s(p, seed);
  if (bytes.size() != 9 + s.registers_.size()) throw OptError("hll byte image has wrong register count");
  std::memcpy(s.registers_.data(), bytes.data() + 9, s.registers_.size());
  for (uint8_t r : s.registers_)
    if (r > 64 - p + 1) throw OptError("hll byte image has out-of-range register");
  return s;
}

}  // namespace optlab
