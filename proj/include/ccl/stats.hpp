#pragma once

// Distribution functions and the small statistical toolkit the experiment
// verdicts are built from: Gumbel and inverse-local-time CDFs, ECDF and
// two-sided KS distance, binomial/Wilson intervals, Poisson dispersion.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ccl::stats {

// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse standard normal. Acklam's rational approximation polished with two
// Newton steps; absolute error well below 1e-12 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p outside (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double e[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1);
  } else if (p <= 1 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((e[0] * q + e[1]) * q + e[2]) * q + e[3]) * q + 1);
  }
  for (int it = 0; it < 2; ++it) {
    const double err = normal_cdf(x) - p;
    const double pdf =
        std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
    if (pdf > 0) x -= err / pdf;
  }
  return x;
}

inline double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

inline double gumbel_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("gumbel_quantile: p outside (0,1)");
  return -std::log(-std::log(p));
}

// CDF of the inverse-local-time limit with scale parameter tau:
// F(z) = 2(1 - Phi(tau / sqrt(z))) for z > 0, 0 otherwise. Satisfies the
// exact scaling F(z; u*tau) = F(z/u^2; tau).
inline double zeta_cdf(double z, double tau) {
  if (!(tau > 0)) throw std::invalid_argument("zeta_cdf: tau <= 0");
  if (!(z > 0)) return 0.0;
  return 2.0 * (1.0 - normal_cdf(tau / std::sqrt(z)));
}

inline double zeta_quantile(double p, double tau) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("zeta_quantile: p outside (0,1)");
  const double q = normal_quantile(1.0 - 0.5 * p);  // tau/sqrt(z)
  return tau * tau / (q * q);
}

// Empirical CDF of a sorted sample at z: #{x_i <= z} / weight_total.
// weight_total defaults to the sample size; passing a larger total treats
// the difference as mass at +infinity (right-censored observations).
inline double ecdf(const std::vector<double>& sorted, double z,
                   size_t weight_total = 0) {
  const size_t n = weight_total ? weight_total : sorted.size();
  if (n == 0) throw std::invalid_argument("ecdf: empty sample");
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), z);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(n);
}

struct KsResult {
  double distance = 0;   // sup |ECDF - F|
  double band95 = 0;     // 1.36 / sqrt(n), the conventional 95% band
  size_t n = 0;          // total observations including censored
  size_t censored = 0;
};

// Two-sided KS distance between a sample and a target CDF. `censored` extra
// observations are treated as +infinity: they cap the upper reach of the
// ECDF, so the distance picks up at least censored/n near the right tail.
inline KsResult ks_distance(std::vector<double> sample,
                            const std::function<double(double)>& cdf,
                            size_t censored = 0) {
  if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(sample.begin(), sample.end());
  const size_t n = sample.size() + censored;
  const double dn = static_cast<double>(n);
  double dist = 0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    dist = std::max(dist, f - static_cast<double>(i) / dn);
    dist = std::max(dist, static_cast<double>(i + 1) / dn - f);
  }
  if (censored > 0) {
    // Just below the censored mass the ECDF is stuck at (n - censored)/n
    // while F tends to 1.
    dist = std::max(dist, static_cast<double>(censored) / dn);
  }
  KsResult r;
  r.distance = dist;
  r.band95 = 1.36 / std::sqrt(dn);
  r.n = n;
  r.censored = censored;
  return r;
}

struct Interval {
  double lo = 0;
  double hi = 0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(int64_t successes, int64_t trials,
                                double zcrit = 1.96) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: bad counts");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = zcrit * zcrit;
  const double denom = 1 + z2 / n;
  const double center = (p + z2 / (2 * n)) / denom;
  const double half =
      zcrit * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {center - half, center + half};
}

// z-score of an observed binomial count against a null proportion.
inline double binomial_z(int64_t successes, int64_t trials, double p0) {
  if (trials <= 0) throw std::invalid_argument("binomial_z: trials <= 0");
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("binomial_z: p0 outside (0,1)");
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  return (phat - p0) / std::sqrt(p0 * (1 - p0) / n);
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("variance: n < 2");
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Index of dispersion (sample variance over mean) for count data; 1 under a
// Poisson law.
inline double poisson_dispersion(const std::vector<double>& counts) {
  const double m = mean(counts);
  if (!(m > 0)) throw std::invalid_argument("poisson_dispersion: mean <= 0");
  return sample_variance(counts) / m;
}

}  // namespace ccl::stats
