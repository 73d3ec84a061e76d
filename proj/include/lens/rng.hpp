#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace lens {

// Every stream of randomness in the benchmark is keyed by a 64-bit seed
// derived from (master seed, ids..., purpose tag) with the fixed mixing
// function below, so results are independent of evaluation order and worker
// count, and alternate-language ports can reproduce the streams.
//
//   mix64(x):   splitmix64 finalizer
//               x += 0x9E3779B97F4A7C15
//               x  = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
//               x  = (x ^ (x >> 27)) * 0x94D049BB133111EB
//               return x ^ (x >> 31)
//   combine(b, p): mix64(b ^ mix64(p))
//   derive(b, p1, p2, ...): left fold of combine
//   string ids enter as FNV-1a 64 hashes of their UTF-8 bytes.

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t base, std::uint64_t part) {
  return mix64(base ^ mix64(part));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  for (std::uint64_t p : parts) base = combine_seed(base, p);
  return base;
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : s) h = (h ^ static_cast<std::uint8_t>(c)) * 1099511628211ull;
  return h;
}

// Purpose tags keep unrelated streams decorrelated even when ids collide.
enum class SeedPurpose : std::uint64_t {
  kTemplate = 1,      // class base patterns
  kJitter = 2,        // per-sample pattern jitter
  kCapture = 3,       // per-(scene, light, param) sensor noise
  kTrainCapture = 4,  // training-session sensor noise
  kTrainInit = 5,     // classifier weight init
  kPlan = 6,          // CSA candidate sampling
};

constexpr std::uint64_t tag(SeedPurpose p) { return static_cast<std::uint64_t>(p); }

// splitmix64. Small, portable, and fully specified; the benchmark needs
// reproducible streams more than statistical heft.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; the spare is cached.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double radius = std::sqrt(-2.0 * std::log1p(-u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  // Unbiased uniform integer in [0, n) by rejection.
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// k distinct indices drawn uniformly from [0, n), returned in ascending order.
inline std::vector<int> sample_without_replacement(Rng& rng, int n, int k) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace lens
