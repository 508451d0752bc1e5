#pragma once

// Random-interlacement sampler restricted to a finite window K of Z^D:
// a Poisson(u * cap(K)) number of forward walks started from the
// normalized equilibrium measure of K, each contributing its forward
// trace on K. Includes level-nested sampling on shared arrivals, cover
// levels via exponential inter-arrival gaps, the inclusion-exclusion
// coverage oracle, and the two-point vacancy sum.
//
// Escapes are handled exactly instead of by truncation: whenever a walk
// leaves the guard ball around K at a point z, the probability that it
// ever returns to K is h_K(z) = sum_y g(z-y) e_K(y) and the re-entry
// site law is (G_K^{-1} g_z)_y / h_K(z), both available from the solved
// equilibrium system. A single Bernoulli(h_K(z)) draw either kills the
// trajectory or teleports it to its re-entry site, so the law of the
// K-restricted trace is sampled with zero truncation error and the guard
// radius is a performance knob only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ccl/green.hpp"
#include "ccl/lattice.hpp"
#include "ccl/rng.hpp"

namespace ccl {

struct TruncationSpec {
  // Demanded total-variation bound per trajectory on the K-trace law.
  // The escape/return draw achieves 0 for any eps >= 0; the value is kept
  // so configs can state their requirement and have it validated.
  double eps = 1e-4;
  // Hard cap on the guard-ball radius. Rejected if the ball cannot even
  // contain K (the only way a requirement is unachievable here).
  int64_t max_radius = 4096;
};

struct InterlacementTrajectory {
  LatticePoint entry;
  std::vector<uint32_t> trace;  // K indices touched, in first-visit order
};

struct InterlacementSample {
  double u = 0;
  std::vector<InterlacementTrajectory> trajectories;
  std::vector<uint8_t> covered;  // per K index: in the trace of some walk
  size_t covered_count = 0;
};

struct CoverLevelRecord {
  std::vector<double> arrival_levels;  // increasing; one walk per arrival
  double cover_level = 0;              // first level with full coverage
};

class InterlacementSampler {
 public:
  InterlacementSampler(const LatticeSet& K, int ambient_dim,
                       TruncationSpec trunc = {})
      : K_(K), dim_(ambient_dim), trunc_(trunc) {
    const size_t n = K_.size();
    if (n == 0) throw std::invalid_argument("interlacement: empty window");
    if (n > 200) throw std::invalid_argument("interlacement: |K| > 200");
    if (dim_ < 3 || dim_ > kMaxTorusDim + 1)
      throw std::invalid_argument("interlacement: bad ambient dimension");
    if (!(trunc_.eps >= 0))
      throw std::invalid_argument("interlacement: eps must be >= 0");

    for (int a = 0; a < dim_; ++a) {
      lo_[a] = hi_[a] = K_[0].x[a];
      for (size_t i = 1; i < n; ++i) {
        lo_[a] = std::min(lo_[a], K_[i].x[a]);
        hi_[a] = std::max(hi_[a], K_[i].x[a]);
      }
      center_.x[a] = (lo_[a] + hi_[a]) / 2;
    }
    int64_t enclose = 0;
    for (int a = 0; a < dim_; ++a)
      enclose = std::max(
          {enclose, iabs64(hi_[a] - center_.x[a]), iabs64(lo_[a] - center_.x[a])});
    if (enclose + 1 > trunc_.max_radius)
      throw std::invalid_argument(
          "interlacement: guard ball cannot contain the window (need radius " +
          std::to_string(enclose + 1) + ", cap " +
          std::to_string(trunc_.max_radius) + ")");
    guard_r_ = std::min<int64_t>(enclose + 16, trunc_.max_radius);

    const GreenEvaluator& green = green_evaluator(dim_);
    G_.resize(n, n);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j <= i; ++j) {
        LatticePoint diff;
        for (int a = 0; a < dim_; ++a) diff.x[a] = K_[i].x[a] - K_[j].x[a];
        G_(i, j) = G_(j, i) = green(diff);
      }
    ldlt_.compute(G_);
    const Eigen::VectorXd e = ldlt_.solve(Eigen::VectorXd::Ones(n));
    if ((G_ * e - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() > 1e-8)
      throw std::runtime_error("interlacement: equilibrium solve residual");
    eq_.assign(e.data(), e.data() + n);
    cap_ = 0;
    for (double w : eq_) {
      if (w < -1e-10)
        throw std::runtime_error("interlacement: negative equilibrium weight");
      cap_ += w;
    }
  }

  int ambient_dim() const { return dim_; }
  const LatticeSet& window() const { return K_; }
  double capacity() const { return cap_; }
  const std::vector<double>& equilibrium_weights() const { return eq_; }
  int64_t guard_radius() const { return guard_r_; }
  // Achieved TV bound on the trace law (exact escape accounting).
  double residual_bound() const { return 0.0; }

  // One forward walk from e_K / cap(K); appends first-visit K indices.
  void sample_trajectory(Rng& rng, std::vector<uint32_t>& touched) const {
    scratch_mask_.assign(K_.size(), 0);
    run_walk(rng, scratch_mask_, &touched);
  }

  InterlacementSample sample(double u, Rng& rng) const {
    if (!(u >= 0)) throw std::invalid_argument("interlacement: u < 0");
    InterlacementSample s;
    s.u = u;
    s.covered.assign(K_.size(), 0);
    const int64_t m = rng.next_poisson(u * cap_);
    s.trajectories.reserve(static_cast<size_t>(m));
    for (int64_t i = 0; i < m; ++i) {
      InterlacementTrajectory t;
      sample_trajectory(rng, t.trace);
      t.entry = K_[t.trace.front()];
      for (uint32_t ki : t.trace)
        if (!s.covered[ki]) {
          s.covered[ki] = 1;
          ++s.covered_count;
        }
      s.trajectories.push_back(std::move(t));
    }
    return s;
  }

  // Fast path for vacancy statistics: coverage mask only.
  void sample_covered(double u, Rng& rng, std::vector<uint8_t>& covered,
                      int64_t* walk_count = nullptr) const {
    covered.assign(K_.size(), 0);
    const int64_t m = rng.next_poisson(u * cap_);
    if (walk_count) *walk_count = m;
    for (int64_t i = 0; i < m; ++i) run_walk(rng, covered, nullptr);
  }

  // Shared-arrival sampling at several levels: trajectories arrive as a
  // Poisson process in the level parameter with rate cap(K), so the trace
  // at level u is the union over arrivals at or below u. Produces nested
  // traces (monotone coupling) by construction.
  std::vector<InterlacementSample> sample_nested(std::vector<double> levels,
                                                 Rng& rng) const {
    if (levels.empty())
      throw std::invalid_argument("interlacement: no levels");
    for (size_t i = 0; i < levels.size(); ++i)
      if (!(levels[i] > 0) || (i > 0 && levels[i] <= levels[i - 1]))
        throw std::invalid_argument(
            "interlacement: levels must be positive and increasing");
    const double u_max = levels.back();
    const int64_t m = rng.next_poisson(u_max * cap_);
    std::vector<std::pair<double, InterlacementTrajectory>> arrivals;
    arrivals.reserve(static_cast<size_t>(m));
    for (int64_t i = 0; i < m; ++i) {
      InterlacementTrajectory t;
      sample_trajectory(rng, t.trace);
      t.entry = K_[t.trace.front()];
      arrivals.emplace_back(rng.next_double() * u_max, std::move(t));
    }
    std::sort(arrivals.begin(), arrivals.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<InterlacementSample> out;
    out.reserve(levels.size());
    size_t ai = 0;
    InterlacementSample acc;
    acc.covered.assign(K_.size(), 0);
    for (double u : levels) {
      while (ai < arrivals.size() && arrivals[ai].first <= u) {
        for (uint32_t ki : arrivals[ai].second.trace)
          if (!acc.covered[ki]) {
            acc.covered[ki] = 1;
            ++acc.covered_count;
          }
        acc.trajectories.push_back(arrivals[ai].second);
        ++ai;
      }
      acc.u = u;
      out.push_back(acc);
    }
    return out;
  }

  // Exponential(cap K) inter-arrival levels, one walk per arrival, stop at
  // full coverage; the cover level is exactly an arrival level.
  CoverLevelRecord sample_cover_level(Rng& rng) const {
    CoverLevelRecord rec;
    scratch_mask_.assign(K_.size(), 0);
    size_t covered = 0;
    double u = 0;
    std::vector<uint32_t> touched;
    while (covered < K_.size()) {
      if (rec.arrival_levels.size() > 10'000'000)
        throw std::runtime_error("interlacement: cover level runaway");
      u += rng.next_exponential(cap_);
      rec.arrival_levels.push_back(u);
      touched.clear();
      run_walk(rng, scratch_mask_, &touched);
      for (uint32_t ki : touched)
        if (scratch_mask_[ki] == 1) {
          scratch_mask_[ki] = 2;  // 1 = this walk, 2 = covered for good
          ++covered;
        }
    }
    rec.cover_level = u;
    return rec;
  }

 private:
  // Walk once from the equilibrium entry law; mark visits of K in `mask`
  // (any nonzero value counts as already marked) and optionally record
  // first visits in order.
  void run_walk(Rng& rng, std::vector<uint8_t>& mask,
                std::vector<uint32_t>* order) const {
    const size_t n = K_.size();
    size_t ei = rng.next_categorical(eq_);
    LatticePoint pos = K_[ei];
    auto touch = [&](size_t ki) {
      if (!mask[ki]) {
        mask[ki] = 1;
        if (order) order->push_back(static_cast<uint32_t>(ki));
      }
    };
    touch(ei);
    const uint64_t dirs = 2 * static_cast<uint64_t>(dim_);
    for (;;) {
      const uint64_t dir = rng.next_below(dirs);
      pos.x[dir >> 1] += (dir & 1) ? 1 : -1;
      bool inside = true;
      for (int a = 0; a < dim_; ++a)
        if (pos.x[a] < lo_[a] || pos.x[a] > hi_[a]) {
          inside = false;
          break;
        }
      if (inside) {
        const int64_t ki = K_.index_of(pos);
        if (ki >= 0) touch(static_cast<size_t>(ki));
        continue;
      }
      int64_t dist = 0;
      for (int a = 0; a < dim_; ++a)
        dist = std::max(dist, iabs64(pos.x[a] - center_.x[a]));
      if (dist < guard_r_) continue;

      // Exact escape accounting at the guard sphere.
      const GreenEvaluator& green = green_evaluator(dim_);
      Eigen::VectorXd gz(n);
      for (size_t j = 0; j < n; ++j) {
        LatticePoint diff;
        for (int a = 0; a < dim_; ++a) diff.x[a] = pos.x[a] - K_[j].x[a];
        gz(j) = green(diff);
      }
      Eigen::VectorXd w = ldlt_.solve(gz);
      double h = 0;
      for (size_t j = 0; j < n; ++j) {
        if (w(j) < 0) w(j) = 0;  // re-entry law is a probability vector
        h += w(j);
      }
      if (h > 1.0) h = 1.0;
      if (rng.next_double() >= h) return;  // walk escapes to infinity
      double pick = rng.next_double() * h;
      size_t ri = n - 1;
      for (size_t j = 0; j < n; ++j) {
        pick -= w(j);
        if (pick < 0) {
          ri = j;
          break;
        }
      }
      pos = K_[ri];
      touch(ri);
    }
  }

  LatticeSet K_;
  int dim_ = 0;
  TruncationSpec trunc_;
  LatticePoint center_{};
  int64_t guard_r_ = 0;
  Eigen::MatrixXd G_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  std::vector<double> eq_;
  double cap_ = 0;
  std::array<int64_t, kMaxTorusDim + 1> lo_{}, hi_{};
  mutable std::vector<uint8_t> scratch_mask_;
};

inline InterlacementSample sample_interlacement(const LatticeSet& K,
                                                int ambient_dim, double u,
                                                Rng& rng,
                                                TruncationSpec trunc = {}) {
  return InterlacementSampler(K, ambient_dim, trunc).sample(u, rng);
}

inline CoverLevelRecord sample_cover_level(const LatticeSet& F,
                                           int ambient_dim, Rng& rng,
                                           TruncationSpec trunc = {}) {
  return InterlacementSampler(F, ambient_dim, trunc).sample_cover_level(rng);
}

// Exact law of {F included in the trace at level u} by inclusion-exclusion
// over subset capacities: sum over A of (-1)^|A| exp(-u cap(A)).
inline double coverage_prob_exact(const LatticeSet& F, int ambient_dim,
                                  double u) {
  const size_t n = F.size();
  if (n == 0) throw std::invalid_argument("coverage: empty set");
  if (n > 20) throw std::invalid_argument("coverage: |F| > 20");
  if (!(u >= 0)) throw std::invalid_argument("coverage: u < 0");
  const GreenEvaluator& green = green_evaluator(ambient_dim);
  Eigen::MatrixXd G(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j <= i; ++j) {
      LatticePoint diff;
      for (int a = 0; a < ambient_dim; ++a)
        diff.x[a] = F[i].x[a] - F[j].x[a];
      G(i, j) = G(j, i) = green(diff);
    }
  double total = 1.0;  // empty-subset term, cap = 0
  std::vector<int> idx;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(static_cast<int>(i));
    const size_t m = idx.size();
    Eigen::MatrixXd GA(m, m);
    for (size_t i = 0; i < m; ++i)
      for (size_t j = 0; j < m; ++j) GA(i, j) = G(idx[i], idx[j]);
    const double cap =
        GA.ldlt().solve(Eigen::VectorXd::Ones(m)).sum();
    total += ((m & 1) ? -1.0 : 1.0) * std::exp(-u * cap);
  }
  return total;
}

// Sum over x in F with 0 < |x|_2 < a of the closed-form pair vacancy
// exp(-2 v / (g(0) + g(x))) at v = g(0) u.
inline double two_point_sum(const LatticeSet& F, int ambient_dim, double u,
                            double a) {
  const GreenEvaluator& green = green_evaluator(ambient_dim);
  const double g0 = green.g0();
  double total = 0;
  for (const LatticePoint& x : F) {
    double norm2 = 0;
    for (int i = 0; i < ambient_dim; ++i)
      norm2 += double(x.x[i]) * double(x.x[i]);
    const double norm = std::sqrt(norm2);
    if (norm <= 0 || norm >= a) continue;
    total += std::exp(-2.0 * g0 * u / (g0 + green(x)));
  }
  return total;
}

}  // namespace ccl
