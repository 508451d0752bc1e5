#pragma once

// Free-space Green function of simple random walk on Z^D, D >= 3, plus
// equilibrium measures and capacities of finite sets.
//
// Starting point is the Fourier representation
//   g(x) = (2pi)^-D int_{[-pi,pi]^D} cos(k.x) / (1 - lambda(k)) dk,
//   lambda(k) = (1/D) sum_j cos k_j,
// whose integrand blows up (integrably) at k = 0. Writing 1/(1 - lambda) =
// int_0^inf exp(-t(1 - lambda)) dt removes the singularity exactly and the
// angular integrals become modified Bessel functions:
//   g(x) = int_0^inf prod_j [ exp(-t/D) I_{|x_j|}(t/D) ] dt.
// The integrand is smooth, positive, and ~ (2 pi t / D)^(-D/2) for large t,
// so a fixed panel rule (one Gauss-Legendre panel per octave of t) plus an
// analytic tail term gives absolute accuracy near 1e-9 uniformly in x.
// Scaled Bessel vectors ive(n, z) = exp(-z) I_n(z), n = 0..n_max, come from
// downward ratio recurrences, or from the 1/z series when z >> n_max^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "ccl/lattice.hpp"

namespace ccl {

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x,
                           std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

// exp(-z) I_0(z). Power series below z = 40, asymptotic series above.
inline double ive0(double z) {
  if (z < 40.0) {
    const double q = 0.25 * z * z;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-18) break;
    }
    return std::exp(-z) * sum;
  }
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 20; ++k) {
    const double f = 2.0 * k - 1.0;
    term *= f * f / (8.0 * z * k);
    if (term < 1e-17) break;
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

// Fill out[0..nmax] with ive(n, z) = exp(-z) I_n(z).
inline void ive_vector(double z, int nmax, double* out) {
  if (z <= 0) {
    out[0] = (z == 0) ? 1.0 : 0.0;
    std::fill(out + 1, out + nmax + 1, 0.0);
    return;
  }
  const double big_z = 35.0 * static_cast<double>(nmax) * nmax + 100.0;
  if (z > big_z) {
    // 4 n^2 / (8 z) <= ~1/70 for every n here, so the fixed-order 1/z
    // series converges fast and uniformly.
    const double pref = 1.0 / std::sqrt(2.0 * std::numbers::pi * z);
    for (int n = 0; n <= nmax; ++n) {
      const double mu = 4.0 * static_cast<double>(n) * n;
      double term = 1.0, sum = 1.0;
      for (int k = 1; k <= 30; ++k) {
        const double f = 2.0 * k - 1.0;
        term *= -(mu - f * f) / (8.0 * z * k);
        sum += term;
        if (std::abs(term) < 1e-17) break;
      }
      out[n] = pref * sum;
    }
    return;
  }
  // Downward ratio recurrence r_m = I_m / I_{m-1} started far enough above
  // max(nmax, sqrt(46 z)) that the minimal solution dominates.
  const int start = std::max(nmax + 80,
                             static_cast<int>(std::sqrt(46.0 * z)) + 40);
  std::vector<double> ratio(static_cast<size_t>(nmax) + 1, 0.0);
  double r = 0.0;
  for (int m = start; m >= 1; --m) {
    r = 1.0 / (2.0 * m / z + r);
    if (m <= nmax) ratio[m] = r;
  }
  double v = ive0(z);
  out[0] = v;
  for (int n = 1; n <= nmax; ++n) {
    v *= ratio[n];
    out[n] = v;  // underflow to 0 is fine, true values are below 1e-300
  }
}

struct CoordArrayHash {
  size_t operator()(const std::array<int64_t, kMaxTorusDim + 1>& a) const {
    uint64_t h = 0x2545f4914f6cdd1dULL;
    for (int64_t c : a) h = mix64(h ^ static_cast<uint64_t>(c));
    return static_cast<size_t>(h);
  }
};

}  // namespace detail

// Evaluator for one ambient dimension. Thread-safe; results are memoized on
// the sorted absolute coordinates (the full octahedral symmetry class).
class GreenEvaluator {
 public:
  explicit GreenEvaluator(int ambient_dim) : D_(ambient_dim) {
    if (D_ < 3 || D_ > kMaxTorusDim + 1)
      throw std::invalid_argument("green: ambient dimension must be >= 3 "
                                  "(walk is transient) and supported");
    build_nodes();
    rebuild_table(64);
    g0_ = value_from_table(std::array<int64_t, kMaxTorusDim + 1>{});
  }

  int ambient_dim() const { return D_; }

  // g(0), cached at construction.
  double g0() const { return g0_; }

  // Absolute error bound of the scheme (tail truncation dominated).
  double abs_error_bound() const {
    return 2.0 * std::pow(D_ / (2.0 * std::numbers::pi), 0.5 * D_) /
           (D_ - 2.0) * std::pow(t_end_, -0.5 * (D_ - 2.0)) + 1e-11;
  }

  double operator()(const LatticePoint& x) const {
    std::array<int64_t, kMaxTorusDim + 1> key{};
    int64_t maxc = 0;
    for (int i = 0; i < D_; ++i) {
      key[i] = iabs64(x.x[i]);
      maxc = std::max(maxc, key[i]);
    }
    std::sort(key.begin(), key.begin() + D_, std::greater<int64_t>());
    if (maxc > kMaxCoord)
      throw std::invalid_argument("green: coordinate exceeds table capacity");
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (maxc > nmax_) {
      int grow = nmax_;
      while (grow < maxc) grow *= 2;
      rebuild_table(grow);
    }
    const double v = value_from_table(key);
    memo_.emplace(key, v);
    return v;
  }

  double at(std::initializer_list<int64_t> coords) const {
    LatticePoint p;
    int i = 0;
    for (int64_t c : coords) p.x[i++] = c;
    return (*this)(p);
  }

 private:
  static constexpr int kMaxCoord = 4096;
  static constexpr int kPanelOrder = 32;
  static constexpr int kOctaves = 56;  // panels cover [0, 2^56]

  void build_nodes() {
    std::vector<double> gx, gw;
    detail::gauss_legendre(kPanelOrder, gx, gw);
    auto add_panel = [&](double a, double b) {
      const double c = 0.5 * (a + b), h = 0.5 * (b - a);
      for (int i = 0; i < kPanelOrder; ++i) {
        t_nodes_.push_back(c + h * gx[i]);
        t_weights_.push_back(h * gw[i]);
      }
    };
    add_panel(0.0, 1.0);
    double a = 1.0;
    for (int k = 0; k < kOctaves; ++k) {
      add_panel(a, 2.0 * a);
      a *= 2.0;
    }
    t_end_ = a;
  }

  void rebuild_table(int nmax) const {
    nmax_ = nmax;
    const size_t stride = static_cast<size_t>(nmax_) + 1;
    table_.assign(t_nodes_.size() * stride, 0.0);
    for (size_t i = 0; i < t_nodes_.size(); ++i)
      detail::ive_vector(t_nodes_[i] / D_, nmax_, &table_[i * stride]);
  }

  double value_from_table(
      const std::array<int64_t, kMaxTorusDim + 1>& key) const {
    const size_t stride = static_cast<size_t>(nmax_) + 1;
    double sum = 0.0;
    for (size_t i = 0; i < t_nodes_.size(); ++i) {
      const double* row = &table_[i * stride];
      double prod = row[key[0]];
      for (int j = 1; j < D_ && prod != 0.0; ++j) prod *= row[key[j]];
      sum += t_weights_[i] * prod;
    }
    // Analytic leading tail beyond the last panel.
    sum += 2.0 * std::pow(D_ / (2.0 * std::numbers::pi * t_end_), 0.5 * D_) *
           t_end_ / (D_ - 2.0);
    return sum;
  }

  int D_;
  double g0_ = 0;
  double t_end_ = 0;
  std::vector<double> t_nodes_, t_weights_;
  mutable std::mutex mu_;
  mutable int nmax_ = 0;
  mutable std::vector<double> table_;
  mutable std::unordered_map<std::array<int64_t, kMaxTorusDim + 1>, double,
                             detail::CoordArrayHash>
      memo_{};
};

// Process-wide evaluator per ambient dimension.
inline const GreenEvaluator& green_evaluator(int ambient_dim) {
  static std::mutex mu;
  static std::unordered_map<int, std::unique_ptr<GreenEvaluator>> pool;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = pool[ambient_dim];
  if (!slot) slot = std::make_unique<GreenEvaluator>(ambient_dim);
  return *slot;
}

inline void check_green_tol(double tol) {
  if (!(tol >= 1e-8 && tol <= 1e-4))
    throw std::invalid_argument("green: tol must lie in [1e-8, 1e-4]");
}

// g(x) for SRW on Z^(d+1) with absolute error <= tol. The fixed scheme
// already beats the tightest permitted tolerance; tol is contract-checked.
inline double green_zd(const LatticePoint& x, int d, double tol = 1e-8) {
  check_green_tol(tol);
  return green_evaluator(d + 1)(x);
}

struct EquilibriumZd {
  std::vector<double> weights;  // equilibrium measure, aligned with K
  double capacity = 0;
};

// Equilibrium measure and capacity of a finite K in Z^(d+1): solve
// G|_K e = 1, cap = sum(e). Closed forms: cap({x}) = 1/g(0),
// cap({x,y}) = 2/(g(0) + g(x-y)).
inline EquilibriumZd equilibrium_zd(const LatticeSet& K, int d,
                                    double tol = 1e-8) {
  check_green_tol(tol);
  const size_t n = K.size();
  if (n == 0) throw std::invalid_argument("equilibrium_zd: empty set");
  if (n > 200) throw std::invalid_argument("equilibrium_zd: |K| > 200");
  const GreenEvaluator& green = green_evaluator(d + 1);
  Eigen::MatrixXd G(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      LatticePoint diff;
      for (int a = 0; a <= d; ++a) diff.x[a] = K[i].x[a] - K[j].x[a];
      G(i, j) = G(j, i) = green(diff);
    }
  const Eigen::VectorXd e = G.ldlt().solve(Eigen::VectorXd::Ones(n));
  const double resid = (G * e - Eigen::VectorXd::Ones(n)).lpNorm<Eigen::Infinity>();
  if (!(resid <= 1e-8))
    throw std::runtime_error("equilibrium_zd: conditioning failure (residual)");
  EquilibriumZd out;
  out.weights.resize(n);
  for (size_t i = 0; i < n; ++i) {
    if (e(i) < -1e-10)
      throw std::runtime_error(
          "equilibrium_zd: conditioning failure (negative weight)");
    out.weights[i] = e(i);
    out.capacity += e(i);
  }
  return out;
}

inline double capacity_zd(const LatticeSet& K, int d, double tol = 1e-8) {
  return equilibrium_zd(K, d, tol).capacity;
}

}  // namespace ccl
