// Acceptance gate: ten numbered criteria with tolerances pinned in code,
// one PASS/FAIL line each, nonzero exit when any criterion fails.
//
// Criteria 1-5, 7 and 10 check exact identities, closed forms and
// asymptotic laws that hold at these sizes. Criteria 6, 8 and 9 compare
// desk-scale cylinders against the large-N limit constants; the per-site
// hit rate per unit of zero-level local time still runs below its limit
// 1/g(0) at N <= 12, and each verdict prints the effective constant the
// measurement implies so the finite-size gap is visible next to the
// verdict.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ccl/exact.hpp"
#include "ccl/excursions.hpp"
#include "ccl/experiments.hpp"
#include "ccl/green.hpp"
#include "ccl/interlace.hpp"
#include "ccl/lattice.hpp"
#include "ccl/srw.hpp"
#include "ccl/stats.hpp"

using namespace ccl;

namespace {

int g_failures = 0;

void detail(const char* fmt, ...) {
  std::va_list args;
  va_start(args, fmt);
  std::printf("    ");
  std::vprintf(fmt, args);
  std::printf("\n");
  va_end(args);
  std::fflush(stdout);
}

template <class Fn>
void criterion(int id, const char* name, Fn&& fn) {
  std::printf("-- criterion %d: %s --\n", id, name);
  std::fflush(stdout);
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = fn();
  } catch (const std::exception& e) {
    detail("exception: %s", e.what());
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (!ok) ++g_failures;
  std::printf("criterion %2d: %s  [%s] (%.1f s)\n\n", id,
              ok ? "PASS" : "FAIL", name, dt);
  std::fflush(stdout);
}

LatticePoint lat(int64_t a, int64_t b, int64_t c) {
  LatticePoint p{};
  p.x[0] = a;
  p.x[1] = b;
  p.x[2] = c;
  return p;
}

double binom3(double p, int64_t n) {
  return 3.0 * std::sqrt(std::max(p * (1.0 - p), 1e-12) / double(n));
}

// 1. Entrance-law identity: K_N P_q(H_K < T_slab, X_{H_K} = x) equals the
//    killed-slab equilibrium measure e_K(x), both sides by linear solves.
bool crit_entrance_law() {
  double worst = 0;
  for (int N : {4, 6, 8}) {
    const CylinderGeom geom(N, 2);
    auto at = [&](int64_t t0, int64_t t1, int64_t z) {
      CylinderPoint p{};
      p.t[0] = geom.wrap(int32_t(t0));
      p.t[1] = geom.wrap(int32_t(t1));
      p.z = z;
      return p;
    };
    std::vector<CylinderSet> sets(5);
    sets[0].insert(at(0, 0, 0));
    sets[1].insert(at(0, 0, 0));
    sets[1].insert(at(1, 0, 0));
    sets[2].insert(at(0, 0, -2));
    sets[2].insert(at(0, 0, 2));
    sets[3].insert(at(0, 0, 0));
    sets[3].insert(at(1, 0, 0));
    sets[3].insert(at(0, 1, 0));
    sets[3].insert(at(1, 1, 0));
    sets[4].insert(at(0, 0, 0));
    sets[4].insert(at(1, 0, 1));
    sets[4].insert(at(0, 1, -1));
    for (size_t s = 0; s < sets.size(); ++s) {
      const double r = entrance_law_residual(sets[s], N, 2);
      worst = std::max(worst, r);
      detail("N=%d set=%zu residual %.3e", N, s + 1, r);
    }
  }
  detail("max residual %.3e (limit 1e-08)", worst);
  return worst <= 1e-8;
}

// 2. Capacity closed forms: cap({0}) = 1/g(0) and
//    cap({0,x}) = 2/(g(0)+g(x)) for every 0 < |x|_inf <= 4.
bool crit_capacity_closed_forms() {
  const GreenEvaluator& ev = green_evaluator(3);
  const double g0 = ev.g0();
  LatticeSet origin;
  origin.insert(lat(0, 0, 0));
  const double single = std::abs(capacity_zd(origin, 2) - 1.0 / g0);
  detail("singleton residual %.3e", single);
  double worst = 0;
  LatticePoint argmax{};
  int pairs = 0;
  for (int64_t a = -4; a <= 4; ++a)
    for (int64_t b = -4; b <= 4; ++b)
      for (int64_t c = -4; c <= 4; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        LatticeSet pairset;
        pairset.insert(lat(0, 0, 0));
        pairset.insert(lat(a, b, c));
        const double expect = 2.0 / (g0 + ev(lat(a, b, c)));
        const double r = std::abs(capacity_zd(pairset, 2) - expect);
        if (r > worst) {
          worst = r;
          argmax = lat(a, b, c);
        }
        ++pairs;
      }
  detail("%d pair residuals, worst %.3e at x=(%lld,%lld,%lld) (limit 4e-06)",
         pairs, worst, (long long)argmax.x[0], (long long)argmax.x[1],
         (long long)argmax.x[2]);
  return single <= 4e-6 && worst <= 4e-6;
}

// 3. Interlacement one/two-point vacancy laws over 1e5 samples, 3 sigma:
//    P(0 not in trace) = exp(-u/g(0)),
//    P({0,x} misses trace) = exp(-2u/(g(0)+g(x))).
bool crit_vacancy_laws() {
  const GreenEvaluator& ev = green_evaluator(3);
  const double g0 = ev.g0();
  const int64_t n = 100000;
  const std::vector<double> us{0.5, 1.0, 2.0};
  bool all = true;
  std::vector<uint8_t> covered;

  LatticeSet origin;
  origin.insert(lat(0, 0, 0));
  const InterlacementSampler s0(origin, 3);
  Rng rng(303, 1);
  for (double u : us) {
    int64_t vac = 0;
    for (int64_t i = 0; i < n; ++i) {
      s0.sample_covered(u, rng, covered);
      vac += covered[0] ? 0 : 1;
    }
    const double p = std::exp(-u / g0);
    const double err = std::abs(double(vac) / double(n) - p);
    const double tol = binom3(p, n);
    all = all && err <= tol;
    detail("one-point u=%.1f: |%.5f - %.5f| = %.5f (3sigma %.5f) %s", u,
           double(vac) / double(n), p, err, tol, err <= tol ? "ok" : "FAIL");
  }

  int xi = 0;
  for (int64_t sep : {1, 2}) {
    LatticeSet pairset;
    pairset.insert(lat(0, 0, 0));
    pairset.insert(lat(sep, 0, 0));
    const InterlacementSampler sp(pairset, 3);
    Rng prng(303, uint64_t(100 + xi++));
    for (double u : us) {
      int64_t vac = 0;
      for (int64_t i = 0; i < n; ++i) {
        sp.sample_covered(u, prng, covered);
        vac += (!covered[0] && !covered[1]) ? 1 : 0;
      }
      const double p = std::exp(-2.0 * u / (g0 + ev(lat(sep, 0, 0))));
      const double err = std::abs(double(vac) / double(n) - p);
      const double tol = binom3(p, n);
      all = all && err <= tol;
      detail("two-point x=%lld*e1 u=%.1f: |%.5f - %.5f| = %.5f (3sigma %.5f) %s",
             (long long)sep, u, double(vac) / double(n), p, err, tol,
             err <= tol ? "ok" : "FAIL");
    }
  }
  return all;
}

// 4. Inclusion-exclusion coverage law for a 3-site set over 1e6 samples:
//    P(F covered at level u) = sum_A (-1)^|A| exp(-u cap(A)). Cover levels
//    are sampled once and thresholded at each u.
bool crit_inclusion_exclusion() {
  LatticeSet F;
  F.insert(lat(0, 0, 0));
  F.insert(lat(1, 0, 0));
  F.insert(lat(2, 0, 0));
  const InterlacementSampler sampler(F, 3);
  const int64_t n = 1000000;
  std::vector<double> levels;
  levels.reserve(size_t(n));
  Rng rng(404, 1);
  for (int64_t i = 0; i < n; ++i)
    levels.push_back(sampler.sample_cover_level(rng).cover_level);
  bool all = true;
  for (double u : {1.0, 2.0, 4.0}) {
    int64_t cov = 0;
    for (double lv : levels) cov += lv <= u ? 1 : 0;
    const double exact = coverage_prob_exact(F, 3, u);
    const double err = std::abs(double(cov) / double(n) - exact);
    const double tol = binom3(exact, n);
    all = all && err <= tol;
    detail("u=%.0f: |%.6f - %.6f| = %.6f (3sigma %.6f) %s", u,
           double(cov) / double(n), exact, err, tol, err <= tol ? "ok" : "FAIL");
  }
  return all;
}

// 5. Cover-level fluctuations for 64 well-separated sites: KS distance of
//    cover_level/g(0) - ln 64 to the standard Gumbel CDF <= 0.05.
bool crit_cover_level_gumbel() {
  GumbelInterlacementParams p;
  p.F = scattered_sites(64, 10, 3);
  p.f_label = "scattered:64:10";
  p.replicas = 2000;
  p.seed = 505;
  const ExperimentReport rep = run_gumbel_interlacement(p);
  const double ks = rep.stat("ks_gumbel");
  detail("ks %.4f (limit 0.05), band95 %.4f, median %.4f (Gumbel %.4f)", ks,
         rep.stat("ks_band95"), rep.stat("median_c"), 0.36651292058166432);
  return ks <= 0.05;
}

// 6. Cylinder cover local time at N=8 against the limit law:
//    KS of L_cov/(g(0) 8^2) - ln 64 vs Gumbel <= 0.15 and
//    |median - 0.3665| <= 0.25. The limit is an N->infinity statement;
//    the finite-slab Green diagonal quantifies the distance at N=8.
bool crit_cylinder_gumbel() {
  GumbelCylinderParams p;
  p.N = 8;
  p.replicas = 500;
  p.seed = 606;
  const ExperimentReport rep = run_gumbel_cylinder(p);
  const double ks = rep.stat("ks_gumbel");
  const double med = rep.stat("median_ell");
  const double g0 = green_evaluator(3).g0();
  detail("ks %.4f (limit 0.15), median_ell %.4f (want 0.3665 +- 0.25)", ks,
         med);
  // Per-site vacancy at fixed local time L decays like exp(-L/(N^d g_eff));
  // the median locates the finite-N g_eff, which approaches g(0) from below.
  const double geff =
      (med + std::log(64.0)) * g0 / (std::log(64.0) + 0.36651292058166432);
  detail("effective constant from median: g_eff(8) = %.3f vs g(0) = %.4f "
         "(location shift (g_eff/g0 - 1) ln 64 = %+.2f)",
         geff, g0, (geff / g0 - 1.0) * std::log(64.0));
  return ks <= 0.15 && std::abs(med - 0.36651292058166432) <= 0.25;
}

// 7. Departure-index bracketing of the inverse local time at u K_N = 100,
//    delta = 0.45: event frequency >= 0.95 over 500 replicas.
bool crit_bracketing() {
  const SlabSpec spec = slab_geometry(8, 2);
  Rng rng(707, 1);
  const BracketingReport r =
      bracketing_event_freq(8, 2, 100.0 / spec.K, 0.45, 500, rng);
  detail("k_lo=%lld k_hi=%lld target=%.0f censored=%lld",
         (long long)r.k_lo, (long long)r.k_hi, r.target,
         (long long)r.censored);
  detail("freq %.4f (need >= 0.95), wilson [%.4f, %.4f]", r.freq, r.ci.lo,
         r.ci.hi);
  return r.censored == 0 && r.freq >= 0.95;
}

// 8. Cover time in actual steps at N=10: t = C/(N^2 ln|F|)^2 against the
//    inverse-local-time law; |median - 1.685| <= 35%, KS <= 0.2,
//    censored < 2%.
bool crit_cover_time_zeta() {
  CoverTimeZetaParams p;
  p.N = 10;
  p.replicas = 500;
  p.seed = 808;
  p.max_steps = 2'000'000'000ULL;
  const ExperimentReport rep = run_cover_time_zeta(p);
  const double med = rep.stat("median_t");
  const double ks = rep.stat("ks_zeta");
  const double cfrac = rep.stat("censored_frac");
  const double g0 = green_evaluator(3).g0();
  detail("median_t %.3f (want 1.685 +- 35%% = [%.3f, %.3f])", med,
         1.685 * 0.65, 1.685 * 1.35);
  detail("ks_zeta %.4f (limit 0.2), censored %.4f (limit < 0.02)", ks, cfrac);
  detail("t scales with the squared cover local time, so the implied "
         "effective constant is g(0) sqrt(med/1.685) = %.3f vs g(0) = %.4f",
         g0 * std::sqrt(med / 1.685), g0);
  return std::abs(med - 1.685) <= 0.35 * 1.685 && ks <= 0.2 && cfrac < 0.02;
}

// 9. Late-point structure at N=12, thresholds u(z) = g(0)(ln 144 + z):
//    mean uncovered count within 40% of e^-z and void probability within
//    0.1 of exp(-e^-z) for z in {0, 2}.
bool crit_point_process() {
  PointProcessParams p;
  p.N = 12;
  p.z_grid = {-2, -1, 0, 1, 2};
  p.replicas = 2000;
  p.seed = 909;
  const ExperimentReport rep = run_point_process(p);
  const double g0 = green_evaluator(3).g0();
  bool all = rep.stat("censored_frac") <= 0.02;
  for (double z : {0.0, 2.0}) {
    const std::string lab = grid_label(z);
    const double mean = rep.stat("mean_count_z" + lab);
    const double voidp = rep.stat("void_z" + lab);
    const double lam = std::exp(-z);
    const bool mean_ok = std::abs(mean - lam) <= 0.4 * lam;
    const bool void_ok = std::abs(voidp - std::exp(-lam)) <= 0.1;
    all = all && mean_ok && void_ok;
    detail("z=%g: mean %.3f (want %.3f +- 40%%) %s | void %.3f "
           "(want %.3f +- 0.1) %s",
           z, mean, lam, mean_ok ? "ok" : "FAIL", voidp, std::exp(-lam),
           void_ok ? "ok" : "FAIL");
    // mean = 144 exp(-u(z)/g_eff) inverts to the finite-N constant, which
    // approaches g(0) from below as N grows.
    const double u = g0 * (std::log(144.0) + z);
    if (mean > 0)
      detail("    implied effective constant g_eff(12) = %.3f vs g(0) = %.4f",
             u / std::log(144.0 / mean), g0);
  }
  detail("censored_frac %.4f", rep.stat("censored_frac"));
  return all;
}

// 10. Structural invariants: nested traces under the level coupling,
//     Poisson excursion counts, excursion endpoint exactness, and the
//     thinned-mark void event agreeing exactly with the local-time event.
bool crit_invariants() {
  bool all = true;

  {  // Monotone coupling: traces at increasing levels are nested.
    LatticeSet F = lattice_box({3, 2, 1}, 3);
    const InterlacementSampler sampler(F, 3);
    Rng rng(1010, 1);
    bool nested = true;
    for (int rep = 0; rep < 300 && nested; ++rep) {
      const auto samples = sampler.sample_nested({0.5, 1.0, 2.0}, rng);
      for (size_t k = 1; k < samples.size(); ++k) {
        for (size_t i = 0; i < F.size(); ++i)
          nested = nested &&
                   (samples[k - 1].covered[i] <= samples[k].covered[i]);
        nested = nested &&
                 samples[k - 1].covered_count <= samples[k].covered_count;
      }
    }
    detail("nested traces over 300 coupled samples at u=0.5,1,2: %s",
           nested ? "ok" : "FAIL");
    all = all && nested;
  }

  {  // Excursion counts are Poisson(u K_N): mean and dispersion.
    const int N = 6;
    const SlabSpec spec = slab_geometry(N, 2);
    const CylinderGeom geom(N, 2);
    CylinderSet w;
    w.insert(geom.from_torus_index(0, 0));
    const PPoEWindow window(geom, spec, w);
    const double u = 10.0;
    const int64_t n = 10000;
    Rng rng(1010, 2);
    std::vector<double> counts;
    counts.reserve(size_t(n));
    std::vector<uint8_t> covered;
    for (int64_t i = 0; i < n; ++i)
      counts.push_back(double(window.sample(u, rng, covered)));
    const double lam = u * spec.K;
    const double mean_err = std::abs(stats::mean(counts) - lam);
    const double mean_tol = 3.0 * std::sqrt(lam / double(n));
    const double disp = stats::poisson_dispersion(counts);
    const bool mean_ok = mean_err <= mean_tol;
    const bool disp_ok = disp > 0.9 && disp < 1.1;
    detail("count mean |%.4f - %.4f| = %.4f (3sigma %.4f) %s",
           stats::mean(counts), lam, mean_err, mean_tol,
           mean_ok ? "ok" : "FAIL");
    detail("dispersion %.4f (band 0.9..1.1) %s", disp,
           disp_ok ? "ok" : "FAIL");
    all = all && mean_ok && disp_ok;
  }

  {  // Excursion endpoints: start on |z|=r faces, stop exactly at |z|=h,
     // strictly inside in between.
    const int N = 6;
    const CylinderGeom geom(N, 2);
    const SlabSpec spec = slab_geometry(N, 2);
    Rng rng(1010, 3);
    bool exact = true;
    int plus = 0, minus = 0;
    for (int rep = 0; rep < 400 && exact; ++rep) {
      const CylinderPoint start = sample_entry_start(geom, spec, rng);
      const auto path = sample_kappa_excursion(start, geom, spec.h, rng);
      exact = exact && iabs64(path.front().z) == spec.r;
      exact = exact && iabs64(path.back().z) == spec.h;
      for (size_t i = 0; i + 1 < path.size(); ++i)
        exact = exact && iabs64(path[i].z) < spec.h;
      (path.front().z > 0 ? plus : minus)++;
    }
    detail("400 excursions: endpoints exact %s (faces +r:%d -r:%d)",
           exact ? "ok" : "FAIL", plus, minus);
    all = all && exact && plus > 50 && minus > 50;
  }

  {  // Void event at threshold u(0) equals the local-time event
     // {L_cov <= floor(u(0) N^d)} replica by replica under shared seeds.
    const int64_t reps = 300;
    PointProcessParams pp;
    pp.N = 6;
    pp.z_grid = {0};
    pp.replicas = reps;
    pp.seed = 1010;
    const ExperimentReport a = run_point_process(pp);
    GumbelCylinderParams gc;
    gc.N = 6;
    gc.replicas = reps;
    gc.seed = 1010;
    const ExperimentReport b = run_gumbel_cylinder(gc);
    const double g0 = green_evaluator(3).g0();
    const double thr = std::floor(g0 * std::log(36.0) * 36.0);
    bool match = true;
    for (int64_t i = 0; i < reps; ++i) {
      if (a.censored[size_t(i)] || b.censored[size_t(i)]) {
        match = false;
        break;
      }
      const bool v = a.rows[size_t(i)][0] == 0.0;
      const bool e = b.rows[size_t(i)][1] <= thr;
      match = match && v == e;
    }
    detail("void(z=0) == {L_cov <= %g} on all %lld shared-seed replicas: %s",
           thr, (long long)reps, match ? "ok" : "FAIL");
    all = all && match;
  }

  return all;
}

}  // namespace

int main() {
  std::printf("acceptance gate: 10 criteria, tolerances pinned in code\n\n");
  criterion(1, "exact entrance-law identity (15 linear solves)",
            crit_entrance_law);
  criterion(2, "capacity closed forms through |x|_inf <= 4",
            crit_capacity_closed_forms);
  criterion(3, "interlacement one/two-point vacancy laws (1e5 samples)",
            crit_vacancy_laws);
  criterion(4, "inclusion-exclusion coverage oracle (1e6 samples)",
            crit_inclusion_exclusion);
  criterion(5, "cover-level Gumbel for 64 scattered sites",
            crit_cover_level_gumbel);
  criterion(6, "cylinder cover local time vs Gumbel at N=8",
            crit_cylinder_gumbel);
  criterion(7, "inverse-local-time bracketing by departure indices",
            crit_bracketing);
  criterion(8, "cover time in steps vs inverse-local-time law at N=10",
            crit_cover_time_zeta);
  criterion(9, "late-point process intensity and voids at N=12",
            crit_point_process);
  criterion(10, "coupling, Poisson and endpoint invariants",
            crit_invariants);

  std::printf("acceptance: %d/10 criteria passed%s\n", 10 - g_failures,
              g_failures ? "" : ", all green");
  return g_failures == 0 ? 0 : 1;
}
