#pragma once

#include <concepts>
#include <cstdint>
#include <random>

namespace pimpgp {

// Source of random draws used throughout the library.  Everything that
// consumes randomness is templated on this concept so tests can inject
// scripted sources with predetermined answers.
template <class R>
concept RandomSource = requires(R r, std::size_t n, int lo, int hi, double p) {
  { r.uniform_index(n) } -> std::convertible_to<std::size_t>;
  { r.uniform_int(lo, hi) } -> std::convertible_to<int>;
  { r.uniform_real() } -> std::convertible_to<double>;
  { r.bernoulli(p) } -> std::convertible_to<bool>;
};

// splitmix64 finalizer; spreads seed/stream ids into engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic generator over mt19937_64.  The distribution mappings are
// implemented here rather than with <random> distribution objects because
// those are implementation-defined; this class yields identical draw
// sequences on every platform, which the byte-for-byte run reproducibility
// contract depends on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix64(mix64(seed) ^ mix64(~stream))) {}

  std::uint64_t next_u64() { return engine_(); }

  // Unbiased index in [0, n); n must be positive.  Rejection sampling on the
  // raw 64-bit output (arc4random_uniform construction).
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

  // Inclusive range [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_index(
                    static_cast<std::size_t>(hi) - static_cast<std::size_t>(lo) + 1));
  }

  // [0, 1) with 53-bit resolution.
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform_real() < p; }

 private:
  std::mt19937_64 engine_;
};

static_assert(RandomSource<Rng>);

}  // namespace pimpgp
