#include "optlab/hll.hpp"

#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "optlab/common.hpp"

using namespace optlab;

namespace {

HllSketch sketch_of_range(int64_t lo, int64_t hi, int p = HllSketch::kDefaultPrecision,
                          uint64_t seed = 0) {
  HllSketch s(p, seed);
  for (int64_t v = lo; v < hi; ++v) s.add_int(v);
  return s;
}

double rel_error(double estimate, double truth) { return std::fabs(estimate - truth) / truth; }

}  // namespace

TEST_SUITE("hll") {

TEST_CASE("empty sketch estimates zero") {
  HllSketch s;
  CHECK(s.estimate() == 0.0);
  CHECK(s.precision() == 12);
  CHECK(s.register_count() == 4096);
}

TEST_CASE("precision outside [4,16] is rejected") {
  CHECK_THROWS_AS(HllSketch(3), OptError);
  CHECK_THROWS_AS(HllSketch(17), OptError);
  CHECK_NOTHROW(HllSketch(4));
  CHECK_NOTHROW(HllSketch(16));
}

TEST_CASE("estimates track the true distinct count") {
  CHECK(rel_error(sketch_of_range(0, 100).estimate(), 100.0) <= 0.05);
  CHECK(rel_error(sketch_of_range(0, 2000).estimate(), 2000.0) <= 0.05);
  CHECK(rel_error(sketch_of_range(0, 10000).estimate(), 10000.0) <= 0.05);
}

TEST_CASE("duplicate inserts do not move the estimate") {
  HllSketch once = sketch_of_range(0, 500);
  HllSketch thrice = sketch_of_range(0, 500);
  for (int rep = 0; rep < 2; ++rep)
    for (int64_t v = 0; v < 500; ++v) thrice.add_int(v);
  CHECK(once == thrice);
}

TEST_CASE("merge is the register-wise union") {
  HllSketch a = sketch_of_range(0, 1000);
  HllSketch b = sketch_of_range(1000, 2000);

  HllSketch ab = a;
  ab.merge(b);
  HllSketch ba = b;
  ba.merge(a);
  CHECK(ab == ba);
  CHECK(rel_error(ab.estimate(), 2000.0) <= 0.05);

  // Idempotent: merging a sketch into itself changes nothing.
  HllSketch aa = a;
  aa.merge(a);
  CHECK(aa == a);

  // Overlap does not double count.
  HllSketch c = sketch_of_range(500, 1500);
  HllSketch ac = a;
  ac.merge(c);
  CHECK(rel_error(ac.estimate(), 1500.0) <= 0.06);
}

TEST_CASE("merge rejects mismatched precision or seed") {
  HllSketch a(12, 0);
  HllSketch p_mismatch(11, 0);
  HllSketch seed_mismatch(12, 1);
  CHECK_THROWS_AS(a.merge(p_mismatch), OptError);
  CHECK_THROWS_AS(a.merge(seed_mismatch), OptError);
}

TEST_CASE("byte images round-trip") {
  HllSketch s = sketch_of_range(0, 1234, 10, 0xfeedULL);
  HllSketch back = HllSketch::from_bytes(s.to_bytes());
  CHECK(back == s);
  CHECK(back.precision() == 10);
  CHECK(back.seed() == 0xfeedULL);
  CHECK(back.estimate() == s.estimate());
}

TEST_CASE("corrupt byte images are rejected") {
  CHECK_THROWS_AS(HllSketch::from_bytes({}), OptError);
  CHECK_THROWS_AS(HllSketch::from_bytes({12, 0, 0, 0}), OptError);

  auto bytes = HllSketch(12, 0).to_bytes();
  bytes.pop_back();
  CHECK_THROWS_AS(HllSketch::from_bytes(bytes), OptError);

  auto bad_reg = HllSketch(12, 0).to_bytes();
  bad_reg[9] = 0xff;  // register rank above the 64-p+1 ceiling
  CHECK_THROWS_AS(HllSketch::from_bytes(bad_reg), OptError);
}

TEST_CASE("seed changes the register pattern but not accuracy") {
  HllSketch a = sketch_of_range(0, 5000, 12, 1);
  HllSketch b = sketch_of_range(0, 5000, 12, 2);
  CHECK(!(a == b));
  CHECK(rel_error(a.estimate(), 5000.0) <= 0.05);
  CHECK(rel_error(b.estimate(), 5000.0) <= 0.05);
}

}  // TEST_SUITE
