#pragma once
#include <cmath>
#include <cstdint>

namespace lsl::rng {

// SplitMix64: 64-bit counter state, one avalanche mix per output.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 random bits
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

// One application of the SplitMix64 finalizer, used as a seed hash.
inline std::uint64_t hash64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// A sampling stream: the generator plus the cached second variate of the
// polar Gaussian method. The full state is {state, has_spare, spare}.
struct Stream {
  SplitMix64 gen{};
  bool has_spare = false;
  double spare = 0.0;
};

// stream_t = hash(master, t). Double hashing keeps nearby (master, t) pairs
// decorrelated even though SplitMix64 seeds are just counters.
inline Stream derive_stream(std::uint64_t master, std::uint64_t index) {
  Stream s;
  s.gen.state = hash64(master ^ hash64(index + 0x9E3779B97F4A7C15ULL));
  return s;
}

inline double uniform_unit(Stream& s) { return s.gen.next_unit(); }

// Standard normal via the Marsaglia polar method.
inline double normal(Stream& s) {
  if (s.has_spare) {
    s.has_spare = false;
    return s.spare;
  }
  double u, v, q;
  do {
    u = 2.0 * s.gen.next_unit() - 1.0;
    v = 2.0 * s.gen.next_unit() - 1.0;
    q = u * u + v * v;
  } while (q >= 1.0 || q == 0.0);
  const double f = std::sqrt(-2.0 * std::log(q) / q);
  s.spare = v * f;
  s.has_spare = true;
  return u * f;
}

}  // namespace lsl::rng
