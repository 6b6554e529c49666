#include <doctest.h>

#include <set>

#include "organic/rng.hpp"

using organic::CounterStream;

TEST_CASE("counter stream is a pure function of (seed, id, slot)") {
  const CounterStream a(42, 7);
  const CounterStream b(42, 7);
  for (std::uint64_t slot = 0; slot < 20; ++slot) {
    CHECK(a.bits(slot) == b.bits(slot));
  }
  // order of access is irrelevant
  CHECK(a.bits(13) == b.bits(13));
  CHECK(a.bits(2) == b.bits(2));
}

TEST_CASE("distinct streams and slots decorrelate") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    for (std::uint64_t id = 0; id < 16; ++id) {
      const CounterStream s(seed, id);
      for (std::uint64_t slot = 0; slot < 8; ++slot) seen.insert(s.bits(slot));
    }
  }
  CHECK(seen.size() == 4 * 16 * 8);
}

TEST_CASE("uniforms stay inside the open unit interval") {
  const CounterStream s(123, 456);
  double lo = 1.0, hi = 0.0;
  for (std::uint64_t slot = 0; slot < 100000; ++slot) {
    const double u = s.uniform(slot);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}
