#pragma once

// Reproducible RNG: xoshiro256++ seeded through splitmix64, with per-replica
// substreams derived from (seed, replica). Identical (seed, replica) pairs
// produce identical streams regardless of thread scheduling, which is what
// makes experiment CSVs byte-stable.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ccl {

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  uint64_t state_;
};

class Rng {
 public:
  // Substream `stream` of the master seed. Stream 0 is the master itself.
  explicit Rng(uint64_t seed, uint64_t stream = 0) {
    SplitMix64 sm(seed ^ (0xd1342543de82ef95ULL * (stream + 1)));
    for (auto& w : s_) w = sm.next();
    // An all-zero state is invalid for xoshiro; splitmix cannot emit four
    // zeros in a row, but keep the guard explicit.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased (Lemire rejection).
  uint64_t next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n == 0");
    uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t lo = static_cast<uint64_t>(m);
    if (lo < n) {
      const uint64_t floor = (0 - n) % n;
      while (lo < floor) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Exponential with the given rate.
  double next_exponential(double rate) {
    if (!(rate > 0)) throw std::invalid_argument("next_exponential: rate <= 0");
    return -std::log1p(-next_double()) / rate;
  }

  // Standard normal (Marsaglia polar, spare cached).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // Poisson. Exact: product method for small means, split-and-sum above.
  int64_t next_poisson(double mean) {
    if (!(mean >= 0)) throw std::invalid_argument("next_poisson: mean < 0");
    if (mean == 0) return 0;
    int64_t total = 0;
    while (mean > 30.0) {
      total += poisson_small(15.0);
      mean -= 15.0;
    }
    return total + poisson_small(mean);
  }

  // Index in [0, w.size()) with probability w[i]/sum(w). Weights must be
  // nonnegative with positive sum.
  size_t next_categorical(const std::vector<double>& w) {
    double total = 0;
    for (double x : w) {
      if (!(x >= 0)) throw std::invalid_argument("next_categorical: w < 0");
      total += x;
    }
    if (!(total > 0))
      throw std::invalid_argument("next_categorical: zero total weight");
    double u = next_double() * total;
    for (size_t i = 0; i + 1 < w.size(); ++i) {
      u -= w[i];
      if (u < 0) return i;
    }
    return w.size() - 1;
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  int64_t poisson_small(double mean) {
    const double limit = std::exp(-mean);
    int64_t k = 0;
    double prod = next_double();
    while (prod > limit) {
      ++k;
      prod *= next_double();
    }
    return k;
  }

  uint64_t s_[4];
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace ccl
