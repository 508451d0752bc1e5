#pragma once

// Discrete-time simple random walk on the cylinder T_N^d x Z: stepping,
// excursion decomposition against the slabs B = T^d x [-r, r] and
// open B~ = T^d x (-h, h), zero-level local time with threshold resolution,
// cover-run instrumentation, and stopped excursion sampling.
//
// Step rule (fixed for reproducibility): one uniform draw dir in
// [0, 2(d+1)); axis = dir >> 1, sign = (dir & 1) ? +1 : -1; axes 0..d-1
// move the torus coordinate (wrapped), axis d moves the height.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ccl/lattice.hpp"
#include "ccl/rng.hpp"

namespace ccl {

inline void step_point(CylinderPoint& p, const CylinderGeom& g, Rng& rng) {
  const uint64_t dir = rng.next_below(2 * (g.d + 1));
  const int axis = static_cast<int>(dir >> 1);
  const int sgn = (dir & 1) ? 1 : -1;
  if (axis < g.d) {
    int32_t c = p.t[axis] + sgn;
    if (c < 0) c = g.N - 1;
    else if (c >= g.N) c = 0;
    p.t[axis] = c;
  } else {
    p.z += sgn;
  }
}

// Uniform start on T^d x {z}.
inline CylinderPoint sample_level_start(const CylinderGeom& g, int64_t z,
                                        Rng& rng) {
  return g.from_torus_index(
      static_cast<int64_t>(rng.next_below(g.level_size())), z);
}

// Uniform start on T^d x {-r, +r}.
inline CylinderPoint sample_entry_start(const CylinderGeom& g,
                                        const SlabSpec& spec, Rng& rng) {
  const int64_t face = (rng.next_u64() & 1) ? spec.r : -spec.r;
  return sample_level_start(g, face, rng);
}

// Run from `pos` until the walk leaves the open slab (first |z| = h).
// The visitor sees every position including the start and the endpoint.
// Returns the number of steps taken.
template <class Visitor>
uint64_t walk_until_slab_exit(CylinderPoint pos, const CylinderGeom& g,
                              int64_t h, Rng& rng, Visitor&& visit) {
  uint64_t steps = 0;
  visit(pos);
  while (iabs64(pos.z) < h) {
    step_point(pos, g, rng);
    ++steps;
    visit(pos);
  }
  return steps;
}

// Stopped excursion path from a given start (kappa sampling).
inline std::vector<CylinderPoint> sample_kappa_excursion(
    const CylinderPoint& start, const CylinderGeom& g, int64_t h, Rng& rng) {
  std::vector<CylinderPoint> path;
  walk_until_slab_exit(start, g, h, rng,
                       [&path](const CylinderPoint& p) { path.push_back(p); });
  return path;
}

// Return steps R_1 <= D_1 < R_2 <= D_2 < ... : R_k is the k-th entrance to
// B at or after D_{k-1}, D_k the first exit of the open slab after R_k.
struct ExcursionRecord {
  std::vector<uint64_t> returns;
  std::vector<uint64_t> departures;
};

struct RunGoals {
  bool stop_at_cover = false;
  uint64_t stop_local_time = 0;  // stop once L >= this (0 = off)
  uint64_t stop_excursions = 0;  // stop at departure number k (0 = off)
  uint64_t max_steps = 1'000'000'000;  // guard; firing sets censored
};

struct RunOptions {
  // Replace each outside-of-B segment (from a departure at height +-h to
  // the next return to B) by its exact entry law: same-sign face, height
  // exactly +-r, uniform torus coordinate. The skipped segment visits
  // neither the zero level nor any site with |z| <= r, so every local-time
  // or trace observable keeps its law (up to the torus-mixing residual of
  // the uniform coordinate, which is below 1e-6 per return at these
  // geometries since the segment lasts at least h - r steps). Step indices
  // across collapsed segments advance by 1 and are NOT walk times; do not
  // read step-denominated observables in this mode.
  bool collapse_returns = false;
  bool retain_path = false;      // debug: keep the full trajectory
  bool record_hit_order = false;
  bool record_departure_local_times = false;
  std::vector<uint64_t> gamma_local_times;  // resolve gamma_a for these a
  // Snapshot the unvisited subset of F the moment L first reaches each
  // mark, before the current site is marked visited.
  std::vector<uint64_t> local_time_marks;
  int64_t start_z = 0;
};

struct CoverRunRecord {
  bool covered = false;
  bool censored = false;  // max_steps fired before the configured goals
  uint64_t cover_step = 0;
  uint64_t cover_local_time = 0;
  uint64_t final_step = 0;
  uint64_t final_local_time = 0;
  CylinderPoint start{};
  std::vector<uint32_t> hit_order;  // F indices in first-hit order
  ExcursionRecord excursions;
  std::vector<uint64_t> departure_local_times;  // L at each D_k
  std::vector<int64_t> gamma_steps;             // -1 while unresolved
  std::vector<uint8_t> mark_resolved;
  std::vector<std::vector<uint32_t>> unvisited_at_marks;  // F indices
  std::vector<CylinderPoint> path;  // only when retain_path
};

// Dense first-visit index over F's bounding height band.
class SiteIndexGrid {
 public:
  SiteIndexGrid(const CylinderSet& F, const CylinderGeom& g) : area_(g.level_size()) {
    if (F.empty()) throw std::invalid_argument("cover run: empty F");
    zmin_ = F[0].z;
    zmax_ = F[0].z;
    for (const CylinderPoint& p : F) {
      zmin_ = std::min(zmin_, p.z);
      zmax_ = std::max(zmax_, p.z);
    }
    grid_.assign(static_cast<size_t>(zmax_ - zmin_ + 1) * area_, -1);
    for (size_t i = 0; i < F.size(); ++i)
      grid_[static_cast<size_t>(F[i].z - zmin_) * area_ +
            g.torus_index(F[i])] = static_cast<int32_t>(i);
  }

  int32_t lookup(const CylinderPoint& p, const CylinderGeom& g) const {
    if (p.z < zmin_ || p.z > zmax_) return -1;
    return grid_[static_cast<size_t>(p.z - zmin_) * area_ + g.torus_index(p)];
  }

 private:
  int64_t zmin_ = 0, zmax_ = -1;
  int64_t area_ = 0;
  std::vector<int32_t> grid_;
};

// Simulate a walk from the uniform law on T^d x {start_z} with full
// excursion, local-time, and cover instrumentation. `covered` is recorded
// whenever it happens; which condition stops the run is set by `goals`.
inline CoverRunRecord run_cover(const CylinderGeom& geom, const SlabSpec& spec,
                                const CylinderSet& F, const RunGoals& goals,
                                const RunOptions& opt, Rng& rng) {
  if (spec.N != geom.N || spec.d != geom.d)
    throw std::invalid_argument("cover run: slab/geometry mismatch");
  if (!goals.stop_at_cover && goals.stop_local_time == 0 &&
      goals.stop_excursions == 0)
    throw std::invalid_argument("cover run: no stopping goal configured");
  for (const CylinderPoint& p : F)
    if (2 * iabs64(p.z) > geom.N)
      throw std::invalid_argument("cover run: F must lie in |z| <= N/2");
  if (iabs64(opt.start_z) >= spec.h)
    throw std::invalid_argument("cover run: start outside the open slab");
  for (size_t i = 1; i < opt.local_time_marks.size(); ++i)
    if (opt.local_time_marks[i] <= opt.local_time_marks[i - 1])
      throw std::invalid_argument("cover run: marks must increase");
  for (size_t i = 1; i < opt.gamma_local_times.size(); ++i)
    if (opt.gamma_local_times[i] <= opt.gamma_local_times[i - 1])
      throw std::invalid_argument("cover run: gamma thresholds must increase");

  const SiteIndexGrid fgrid(F, geom);
  CoverRunRecord rec;
  rec.gamma_steps.assign(opt.gamma_local_times.size(), -1);
  rec.mark_resolved.assign(opt.local_time_marks.size(), 0);
  rec.unvisited_at_marks.resize(opt.local_time_marks.size());

  std::vector<uint8_t> visited(F.size(), 0);
  size_t covered_count = 0;
  uint64_t L = 0;
  size_t gamma_idx = 0, mark_idx = 0;
  enum class Zone { Inside, Outside };

  CylinderPoint pos = sample_level_start(geom, opt.start_z, rng);
  rec.start = pos;
  Zone zone = (iabs64(pos.z) <= spec.r) ? Zone::Inside : Zone::Outside;
  uint64_t steps = 0;
  if (zone == Zone::Inside) rec.excursions.returns.push_back(0);

  auto snapshot_unvisited = [&](size_t mi) {
    rec.mark_resolved[mi] = 1;
    auto& snap = rec.unvisited_at_marks[mi];
    for (uint32_t i = 0; i < visited.size(); ++i)
      if (!visited[i]) snap.push_back(i);
  };

  auto process = [&](uint64_t step_idx) {
    if (opt.retain_path) rec.path.push_back(pos);
    if (pos.z == 0) {
      ++L;
      while (gamma_idx < opt.gamma_local_times.size() &&
             L >= opt.gamma_local_times[gamma_idx]) {
        rec.gamma_steps[gamma_idx] = static_cast<int64_t>(step_idx);
        ++gamma_idx;
      }
      while (mark_idx < opt.local_time_marks.size() &&
             L >= opt.local_time_marks[mark_idx]) {
        snapshot_unvisited(mark_idx);
        ++mark_idx;
      }
    }
    const int32_t fi = fgrid.lookup(pos, geom);
    if (fi >= 0 && !visited[fi]) {
      visited[fi] = 1;
      if (opt.record_hit_order) rec.hit_order.push_back(fi);
      if (++covered_count == F.size() && !rec.covered) {
        rec.covered = true;
        rec.cover_step = step_idx;
        rec.cover_local_time = L;
      }
    }
    if (zone == Zone::Inside) {
      if (iabs64(pos.z) >= spec.h) {
        rec.excursions.departures.push_back(step_idx);
        if (opt.record_departure_local_times)
          rec.departure_local_times.push_back(L);
        zone = Zone::Outside;
      }
    } else if (iabs64(pos.z) <= spec.r) {
      rec.excursions.returns.push_back(step_idx);
      zone = Zone::Inside;
    }
  };

  auto goal_met = [&]() {
    if (goals.stop_at_cover && rec.covered) return true;
    if (goals.stop_local_time && L >= goals.stop_local_time) return true;
    if (goals.stop_excursions &&
        rec.excursions.departures.size() >= goals.stop_excursions)
      return true;
    return false;
  };

  process(0);
  while (!goal_met()) {
    if (steps >= goals.max_steps) {
      rec.censored = true;
      break;
    }
    if (opt.collapse_returns && zone == Zone::Outside) {
      const int64_t face = pos.z > 0 ? spec.r : -spec.r;
      pos = geom.from_torus_index(
          static_cast<int64_t>(rng.next_below(geom.level_size())), face);
      ++steps;
      process(steps);
      continue;
    }
    step_point(pos, geom, rng);
    ++steps;
    process(steps);
  }
  rec.final_step = steps;
  rec.final_local_time = L;
  return rec;
}

// gamma_a from a finished record: the step at which L first reached
// ceil(a); nullopt if the run stopped first.
inline std::optional<uint64_t> gamma_time(const CoverRunRecord& rec,
                                          const RunOptions& opt, double a) {
  const uint64_t need =
      a <= 0 ? 0 : static_cast<uint64_t>(std::ceil(a - 1e-12));
  if (need == 0) return 0;  // L_0 >= 0 always; gamma_0 = 0
  for (size_t i = 0; i < opt.gamma_local_times.size(); ++i)
    if (opt.gamma_local_times[i] == need)
      return rec.gamma_steps[i] < 0
                 ? std::nullopt
                 : std::optional<uint64_t>(
                       static_cast<uint64_t>(rec.gamma_steps[i]));
  throw std::invalid_argument("gamma_time: threshold was not tracked");
}

}  // namespace ccl
