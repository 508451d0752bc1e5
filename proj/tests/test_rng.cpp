#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ccl/rng.hpp"

using namespace ccl;

TEST_CASE("identical seed and stream reproduce the sequence", "[rng]") {
  Rng a(12345, 7), b(12345, 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams decorrelate", "[rng]") {
  Rng a(12345, 0), b(12345, 1);
  int agree = 0;
  for (int i = 0; i < 64; ++i) agree += (a.next_u64() == b.next_u64());
  CHECK(agree == 0);
}

TEST_CASE("next_below stays in range and is roughly uniform", "[rng]") {
  Rng r(99, 0);
  std::vector<int> counts(6, 0);
  const int n = 120000;
  for (int i = 0; i < n; ++i) {
    const uint64_t v = r.next_below(6);
    REQUIRE(v < 6);
    ++counts[v];
  }
  // 4 sigma band around n/6 with sigma = sqrt(n p (1-p)).
  const double mean = n / 6.0;
  const double sigma = std::sqrt(n * (1.0 / 6.0) * (5.0 / 6.0));
  for (int c : counts) CHECK(std::abs(c - mean) < 4 * sigma);
}

TEST_CASE("next_double is in [0,1) with mean 1/2", "[rng]") {
  Rng r(5, 3);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sigma of the mean = 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}

TEST_CASE("exponential sampler has the right mean and rate scaling",
          "[rng]") {
  Rng r(17, 0);
  const int n = 200000;
  double s1 = 0, s3 = 0;
  for (int i = 0; i < n; ++i) {
    s1 += r.next_exponential(1.0);
    s3 += r.next_exponential(3.0);
  }
  CHECK(std::abs(s1 / n - 1.0) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(s3 / n - 1.0 / 3) < 4.0 / (3 * std::sqrt(static_cast<double>(n))));
}

TEST_CASE("normal sampler has mean 0, variance 1", "[rng]") {
  Rng r(23, 1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.next_normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(static_cast<double>(n)));
  // var of sample second moment ~ 2/n for normal
  CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("poisson sampler matches mean, variance, and P(0)", "[rng]") {
  Rng r(31, 2);
  for (const double lambda : {0.3, 2.0, 5.0, 47.5}) {
    const int n = 100000;
    double s = 0, s2 = 0;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
      const uint64_t k = r.next_poisson(lambda);
      s += static_cast<double>(k);
      s2 += static_cast<double>(k) * k;
      zeros += (k == 0);
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CAPTURE(lambda);
    CHECK(std::abs(mean - lambda) < 4 * std::sqrt(lambda / n));
    CHECK(std::abs(var / lambda - 1.0) < 0.05);
    if (lambda <= 5.0) {
      const double p0 = std::exp(-lambda);
      CHECK(std::abs(zeros / static_cast<double>(n) - p0) <
            4 * std::sqrt(p0 * (1 - p0) / n) + 1e-12);
    }
  }
}

TEST_CASE("categorical sampler follows the weight vector", "[rng]") {
  Rng r(41, 0);
  const std::vector<double> w = {0.5, 0.25, 0.125, 0.125};
  std::vector<int> counts(4, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++counts[r.next_categorical(w)];
  for (size_t k = 0; k < w.size(); ++k) {
    const double p = w[k];
    CHECK(std::abs(counts[k] / static_cast<double>(n) - p) <
          4 * std::sqrt(p * (1 - p) / n));
  }
}
