#pragma once

// Poisson process of slab excursions on the cylinder (intensity u K_N
// kappa_q: a Poisson(u K_N) number of independent excursions, each started
// uniformly on the entry faces T^d x {-r, +r} and stopped on first exit of
// the open slab), plus the distributional consequence checks that tie the
// walk's excursion decomposition to this process: excursion-count
// bracketing of the inverse local time, and the vacancy sandwich between
// interlacement levels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ccl/exact.hpp"
#include "ccl/green.hpp"
#include "ccl/lattice.hpp"
#include "ccl/rng.hpp"
#include "ccl/srw.hpp"
#include "ccl/stats.hpp"

namespace ccl {

struct PPoESample {
  double u = 0;
  std::vector<std::vector<CylinderPoint>> excursions;
  CylinderSet trace;
};

inline PPoESample sample_ppoe(int N, int d, double u, Rng& rng) {
  if (!(u >= 0)) throw std::invalid_argument("ppoe: u < 0");
  const CylinderGeom geom(N, d);
  const SlabSpec spec = slab_geometry(N, d);
  PPoESample s;
  s.u = u;
  const int64_t J = rng.next_poisson(u * spec.K);
  s.excursions.reserve(static_cast<size_t>(J));
  for (int64_t j = 0; j < J; ++j) {
    const CylinderPoint start = sample_entry_start(geom, spec, rng);
    s.excursions.push_back(
        sample_kappa_excursion(start, geom, spec.h, rng));
    for (const CylinderPoint& p : s.excursions.back()) s.trace.insert(p);
  }
  return s;
}

// Trace-on-a-window sampler that skips path storage; returns the excursion
// count and fills `covered` (indexed like W).
class PPoEWindow {
 public:
  PPoEWindow(const CylinderGeom& geom, const SlabSpec& spec, CylinderSet W)
      : geom_(geom), spec_(spec), W_(std::move(W)), grid_(W_, geom_) {
    if (spec_.N != geom_.N || spec_.d != geom_.d)
      throw std::invalid_argument("ppoe window: slab/geometry mismatch");
  }

  const CylinderSet& window() const { return W_; }

  int64_t sample(double u, Rng& rng, std::vector<uint8_t>& covered) const {
    if (!(u >= 0)) throw std::invalid_argument("ppoe: u < 0");
    covered.assign(W_.size(), 0);
    const int64_t J = rng.next_poisson(u * spec_.K);
    for (int64_t j = 0; j < J; ++j) {
      const CylinderPoint start = sample_entry_start(geom_, spec_, rng);
      walk_until_slab_exit(start, geom_, spec_.h, rng,
                           [&](const CylinderPoint& p) {
                             const int32_t i = grid_.lookup(p, geom_);
                             if (i >= 0) covered[static_cast<size_t>(i)] = 1;
                           });
    }
    return J;
  }

 private:
  CylinderGeom geom_;
  SlabSpec spec_;
  CylinderSet W_;
  SiteIndexGrid grid_;
};

// Exact finite-N vacancy of a zero-level site under the excursion process:
// each excursion hits a fixed zero-level site with probability
// 1/(K_N g_B~(a,a)) (entrance-law identity), so the Poisson trace misses it
// with probability exp(-u / g_B~(a,a)). The slab Green diagonal comes from
// the mode-sum oracle, so this is an independent cross-module closed form.
inline double ppoe_zero_level_vacancy_exact(int N, int d, double u) {
  return std::exp(-u / slab_center_green_diag(N, d));
}

// Bracketing of the inverse local time by excursion departure indices:
// the event { L at D_{k_lo} < u N^d <= L at D_{k_hi} } with
// k_lo = [(1-delta) u K_N], k_hi = [(1+delta) u K_N]. By the Galois
// inversion {gamma_a <= n} = {a <= L_n}, this is exactly
// { D_{k_lo} < gamma_{u N^d} <= D_{k_hi} } without tracking step counts,
// so the outside-of-slab walk segments can be collapsed.
struct BracketingReport {
  double u = 0, delta = 0;
  int64_t k_lo = 0, k_hi = 0;
  double target = 0;  // u N^d
  int64_t replicas = 0, censored = 0;
  double freq = 0;  // event frequency among uncensored replicas
  stats::Interval ci{};
  std::vector<int8_t> outcomes;  // per replica: 1 ok, 0 fail, -1 censored
  // diagnosis rows for failures: (replica, L at D_{k_lo}, L at D_{k_hi})
  std::vector<std::array<double, 3>> failures;
};

inline std::vector<BracketingReport> bracketing_event_freqs(
    int N, int d, double u, const std::vector<double>& deltas,
    int64_t replicas, Rng& rng, uint64_t max_steps = 1'000'000'000) {
  const CylinderGeom geom(N, d);
  const SlabSpec spec = slab_geometry(N, d);
  if (!(u * spec.K >= 2))
    throw std::invalid_argument("bracketing: need u K_N >= 2");
  if (replicas <= 0) throw std::invalid_argument("bracketing: no replicas");
  std::vector<BracketingReport> reports;
  int64_t k_max = 0;
  const double target = u * std::pow(double(N), double(d));
  for (double delta : deltas) {
    if (!(delta > 0) || !(delta < 0.5))
      throw std::invalid_argument("bracketing: delta outside (0, 1/2)");
    BracketingReport r;
    r.u = u;
    r.delta = delta;
    r.k_lo = static_cast<int64_t>((1.0 - delta) * u * spec.K);
    r.k_hi = static_cast<int64_t>((1.0 + delta) * u * spec.K);
    r.target = target;
    r.replicas = replicas;
    if (r.k_lo < 1 || r.k_lo >= r.k_hi)
      throw std::invalid_argument("bracketing: degenerate index bracket");
    k_max = std::max(k_max, r.k_hi);
    reports.push_back(std::move(r));
  }

  CylinderSet probe;  // run_cover needs a target set; observable unused
  probe.insert(geom.from_torus_index(0, 0));
  RunGoals goals;
  goals.stop_excursions = static_cast<uint64_t>(k_max);
  goals.max_steps = max_steps;
  RunOptions opt;
  opt.collapse_returns = true;
  opt.record_departure_local_times = true;
  opt.start_z = spec.r;  // excursions then start on the entry faces

  for (int64_t i = 0; i < replicas; ++i) {
    const CoverRunRecord rec = run_cover(geom, spec, probe, goals, opt, rng);
    const auto& L = rec.departure_local_times;
    for (BracketingReport& r : reports) {
      if (rec.censored || int64_t(L.size()) < r.k_hi) {
        ++r.censored;
        r.outcomes.push_back(-1);
        continue;
      }
      const double l_lo = double(L[size_t(r.k_lo - 1)]);
      const double l_hi = double(L[size_t(r.k_hi - 1)]);
      const bool ok = l_lo < r.target && r.target <= l_hi;
      r.outcomes.push_back(ok ? 1 : 0);
      if (!ok) r.failures.push_back({double(i), l_lo, l_hi});
    }
  }
  for (BracketingReport& r : reports) {
    const int64_t n = r.replicas - r.censored;
    int64_t hits = 0;
    for (int8_t o : r.outcomes)
      if (o == 1) ++hits;
    r.freq = n > 0 ? double(hits) / double(n) : 0.0;
    r.ci = stats::wilson_interval(hits, n > 0 ? n : 1);
  }
  return reports;
}

inline BracketingReport bracketing_event_freq(int N, int d, double u,
                                              double delta, int64_t replicas,
                                              Rng& rng,
                                              uint64_t max_steps =
                                                  1'000'000'000) {
  return bracketing_event_freqs(N, d, u, {delta}, replicas, rng,
                                max_steps)[0];
}

// Vacancy sandwich: per-site vacancy of a patch under (a) the walk trace up
// to the [u K_N]-th departure and (b) the excursion process at level u,
// both compared against the asymptotic interlacement band
// [exp(-u(1+delta)/g(0)), exp(-u(1-delta)/g(0))]. A site passes when the
// walk CI intersects the band widened by the CI half-width.
struct VacancySiteReport {
  CylinderPoint site{};
  double walk_vacancy = 0;
  stats::Interval walk_ci{};
  double ppoe_vacancy = 0;
  stats::Interval ppoe_ci{};
  bool pass = false;
};

struct VacancySandwichReport {
  double u = 0, delta = 0;
  int64_t m = 0;  // [u K_N] walk excursions
  double band_lo = 0, band_hi = 0;
  int64_t replicas = 0, walk_censored = 0;
  std::vector<VacancySiteReport> sites;
  bool all_pass = false;
};

inline VacancySandwichReport vacancy_sandwich(int N, int d, double u,
                                              double delta,
                                              const CylinderSet& A,
                                              int64_t replicas, Rng& rng,
                                              uint64_t max_steps =
                                                  1'000'000'000) {
  const CylinderGeom geom(N, d);
  const SlabSpec spec = slab_geometry(N, d);
  if (A.empty()) throw std::invalid_argument("sandwich: empty patch");
  if (!(delta > 0) || !(delta < 1))
    throw std::invalid_argument("sandwich: delta outside (0, 1)");
  if (!(u >= 0)) throw std::invalid_argument("sandwich: u < 0");
  if (u > 0 && u * spec.K < 1)
    throw std::invalid_argument("sandwich: need u K_N >= 1");
  if (replicas <= 0) throw std::invalid_argument("sandwich: no replicas");

  const double g0 = green_evaluator(d + 1).g0();
  VacancySandwichReport rep;
  rep.u = u;
  rep.delta = delta;
  rep.m = static_cast<int64_t>(u * spec.K);
  rep.band_lo = std::exp(-u * (1.0 + delta) / g0);
  rep.band_hi = std::exp(-u * (1.0 - delta) / g0);
  rep.replicas = replicas;

  std::vector<int64_t> walk_vacant(A.size(), 0), ppoe_vacant(A.size(), 0);
  int64_t walk_runs = 0;
  if (u == 0) {
    walk_runs = replicas;
    for (size_t i = 0; i < A.size(); ++i) {
      walk_vacant[i] = replicas;
      ppoe_vacant[i] = replicas;
    }
  } else {
    RunGoals goals;
    goals.stop_excursions = static_cast<uint64_t>(rep.m);
    goals.max_steps = max_steps;
    RunOptions opt;
    opt.collapse_returns = true;
    opt.record_hit_order = true;
    opt.start_z = spec.r;
    std::vector<uint8_t> hit(A.size(), 0);
    for (int64_t i = 0; i < replicas; ++i) {
      const CoverRunRecord rec = run_cover(geom, spec, A, goals, opt, rng);
      if (rec.censored) {
        ++rep.walk_censored;
        continue;
      }
      ++walk_runs;
      std::fill(hit.begin(), hit.end(), 0);
      for (uint32_t fi : rec.hit_order) hit[fi] = 1;
      for (size_t s = 0; s < A.size(); ++s)
        if (!hit[s]) ++walk_vacant[s];
    }
    const PPoEWindow win(geom, spec, A);
    std::vector<uint8_t> covered;
    for (int64_t i = 0; i < replicas; ++i) {
      win.sample(u, rng, covered);
      for (size_t s = 0; s < A.size(); ++s)
        if (!covered[s]) ++ppoe_vacant[s];
    }
  }

  rep.all_pass = true;
  for (size_t s = 0; s < A.size(); ++s) {
    VacancySiteReport site;
    site.site = A[s];
    site.walk_ci = stats::wilson_interval(walk_vacant[s],
                                          walk_runs > 0 ? walk_runs : 1);
    site.walk_vacancy =
        walk_runs > 0 ? double(walk_vacant[s]) / double(walk_runs) : 1.0;
    site.ppoe_ci = stats::wilson_interval(ppoe_vacant[s], replicas);
    site.ppoe_vacancy = double(ppoe_vacant[s]) / double(replicas);
    const double hw = 0.5 * (site.walk_ci.hi - site.walk_ci.lo);
    site.pass = site.walk_ci.hi >= rep.band_lo - hw &&
                site.walk_ci.lo <= rep.band_hi + hw;
    rep.all_pass = rep.all_pass && site.pass;
    rep.sites.push_back(site);
  }
  return rep;
}

}  // namespace ccl
