#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "pimpgp/rng.hpp"

using pimpgp::Rng;
using pimpgp::mix64;

TEST_CASE("mix64 matches the splitmix64 reference sequence", "[rng]") {
  // First three outputs of splitmix64 seeded with 0.
  CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6E789E6AA1B965F4ULL);
  CHECK(mix64(2 * 0x9e3779b97f4a7c15ULL) == 0x06C45D188009454FULL);
}

TEST_CASE("equal seeds and streams replay identically", "[rng]") {
  Rng a(42, 1), b(42, 1);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams of one seed are decorrelated", "[rng]") {
  Rng a(42, 1), b(42, 2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64() ? 1 : 0;
  CHECK(equal == 0);
}

TEST_CASE("uniform_index stays in range and covers small ranges", "[rng]") {
  Rng rng(7);
  for (const std::size_t n : {1u, 2u, 3u, 7u, 100u}) {
    std::set<std::size_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const std::size_t v = rng.uniform_index(n);
      REQUIRE(v < n);
      seen.insert(v);
    }
    if (n <= 7) CHECK(seen.size() == n);
  }
}

TEST_CASE("uniform_int is inclusive on both ends", "[rng]") {
  Rng rng(9);
  bool lo_hit = false, hi_hit = false;
  for (int i = 0; i < 5000; ++i) {
    const int v = rng.uniform_int(-10, 10);
    REQUIRE(v >= -10);
    REQUIRE(v <= 10);
    lo_hit |= v == -10;
    hi_hit |= v == 10;
  }
  CHECK(lo_hit);
  CHECK(hi_hit);
}

TEST_CASE("uniform_real lies in the half-open unit interval", "[rng]") {
  Rng rng(11);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.uniform_real();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(sum / 10000.0 == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("bernoulli endpoints are certain", "[rng]") {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(rng.bernoulli(0.0));
    CHECK(rng.bernoulli(1.0));
  }
}

TEST_CASE("uniform_index of one element is always zero", "[rng]") {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) CHECK(rng.uniform_index(1) == 0);
}
