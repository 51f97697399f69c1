#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace optlab {

// Error hierarchy. Every user-facing failure is one of these; the CLI maps
// them to exit code 1 (verification mismatches use a dedicated code).
class OptError : public std::runtime_error {
 public:
  explicit OptError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public OptError {
 public:
  ParseError(const std::string& msg, size_t offset, std::vector<std::string> expected)
      : OptError(msg), offset_(offset), expected_(std::move(expected)) {}
  size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  size_t offset_;
  std::vector<std::string> expected_;
};

class CatalogError : public OptError {
 public:
  using OptError::OptError;
};

class ResolveError : public OptError {
 public:
  using OptError::OptError;
};

class PlanError : public OptError {
 public:
  using OptError::OptError;
};

// Set of range-table indexes, capped at 64 rels per block.
using RelSet = uint64_t;

inline RelSet rel_set_of(int rti) { return RelSet{1} << rti; }
inline bool rel_set_has(RelSet s, int rti) { return (s >> rti) & 1; }
inline RelSet rel_set_add(RelSet s, int rti) { return s | rel_set_of(rti); }
inline bool rel_set_subset(RelSet a, RelSet b) { return (a & ~b) == 0; }
inline int rel_set_count(RelSet s) { return __builtin_popcountll(s); }
inline bool rel_set_empty(RelSet s) { return s == 0; }
inline int rel_set_lowest(RelSet s) { return __builtin_ctzll(s); }

// Iterates set members in ascending rti order.
template <typename Fn>
inline void rel_set_foreach(RelSet s, Fn&& fn) {
  while (s) {
    int rti = __builtin_ctzll(s);
    fn(rti);
    s &= s - 1;
  }
}

inline std::vector<int> rel_set_members(RelSet s) {
  std::vector<int> out;
  rel_set_foreach(s, [&](int rti) { out.push_back(rti); });
  return out;
}

// 64-bit finalizer used for hashing and the deterministic RNG.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t hash_bytes(const void* data, size_t len, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

inline uint64_t hash_string(const std::string& s, uint64_t seed = 0) {
  return hash_bytes(s.data(), s.size(), seed);
}

// Deterministic splitmix64 stream; seeded explicitly everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n).
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  int range(int lo, int hi) { return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1))); }

  double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

 private:
  uint64_t state_;
};

}  // namespace optlab
