#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "lsl/rng.hpp"

using namespace lsl;

TEST_CASE("splitmix64 reference outputs") {
  rng::SplitMix64 g{0};
  CHECK(g.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(g.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(g.next_u64() == 0x06c45d188009454fULL);

  rng::SplitMix64 g42{42};
  CHECK(g42.next_u64() == 0xbdd732262feb6e95ULL);
  CHECK(g42.next_u64() == 0x28efe333b266f103ULL);
  CHECK(g42.next_u64() == 0x47526757130f9f52ULL);

  rng::SplitMix64 gmax{0xFFFFFFFFFFFFFFFFULL};
  CHECK(gmax.next_u64() == 0xe4d971771b652c20ULL);
  CHECK(gmax.next_u64() == 0xe99ff867dbf682c9ULL);
}

TEST_CASE("unit doubles live in [0,1) with 53-bit granularity") {
  rng::SplitMix64 g{7};
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = g.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("stream derivation is deterministic and decorrelates indices") {
  CHECK(rng::derive_stream(0, 0).gen.state == 0x48218226ff3cd4bfULL);
  CHECK(rng::derive_stream(7, 3).gen.state == 0x59f0a990a364d3fdULL);

  std::set<std::uint64_t> states;
  for (std::uint64_t t = 0; t < 4096; ++t) states.insert(rng::derive_stream(11, t).gen.state);
  CHECK(states.size() == 4096);

  rng::Stream fresh = rng::derive_stream(5, 9);
  CHECK_FALSE(fresh.has_spare);
}

TEST_CASE("hash64 has no collisions on a small range") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t x = 0; x < 10000; ++x) seen.insert(rng::hash64(x));
  CHECK(seen.size() == 10000);
}

TEST_CASE("polar normal: golden first draws and copied-state replay") {
  rng::Stream s = rng::derive_stream(1, 0);
  const double n1 = rng::normal(s);
  const double n2 = rng::normal(s);
  const double n3 = rng::normal(s);
  CHECK(n1 == doctest::Approx(0.19307435297585929).epsilon(1e-15));
  CHECK(n2 == doctest::Approx(-1.8283632971971544).epsilon(1e-15));
  CHECK(n3 == doctest::Approx(-0.69736748615375499).epsilon(1e-15));

  rng::Stream a = rng::derive_stream(123, 456);
  rng::Stream b = a;  // full state incl. the cached spare
  std::vector<double> da, db;
  for (int i = 0; i < 64; ++i) da.push_back(rng::normal(a));
  for (int i = 0; i < 64; ++i) db.push_back(rng::normal(b));
  CHECK(da == db);
}

TEST_CASE("polar normal moments") {
  rng::Stream s = rng::derive_stream(2024, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0, sum4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng::normal(s);
    sum += x;
    sumsq += x * x;
    sum4 += x * x * x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double m4 = sum4 / n;
  // z-test margins at 4 sigma: se(mean) = 1/sqrt(n), se(var) ~ sqrt(2/n)
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}
