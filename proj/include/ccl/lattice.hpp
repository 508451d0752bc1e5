#pragma once

// Discrete cylinder T_N^d x Z and ambient lattice Z^(d+1): points, slab
// geometry, neighborhoods, torus-aware distances, site sets and boundaries.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ccl {

inline constexpr int kMaxTorusDim = 8;

// Point of the cylinder: d torus coordinates in [0,N) plus an integer height.
// Unused torus slots stay zero so that whole-array comparison is valid.
struct CylinderPoint {
  std::array<int32_t, kMaxTorusDim> t{};
  int64_t z = 0;

  friend bool operator==(const CylinderPoint&, const CylinderPoint&) = default;
};

// Point of Z^D with D <= kMaxTorusDim + 1. Unused slots stay zero.
struct LatticePoint {
  std::array<int64_t, kMaxTorusDim + 1> x{};

  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline int64_t iabs64(int64_t v) { return v < 0 ? -v : v; }

inline uint64_t mix64(uint64_t v) {
  v += 0x9e3779b97f4a7c15ULL;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
  return v ^ (v >> 31);
}

struct CylinderPointHash {
  size_t operator()(const CylinderPoint& p) const {
    uint64_t h = mix64(static_cast<uint64_t>(p.z));
    for (int i = 0; i < kMaxTorusDim; ++i)
      h = mix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(p.t[i])));
    return static_cast<size_t>(h);
  }
};

struct LatticePointHash {
  size_t operator()(const LatticePoint& p) const {
    uint64_t h = 0x2545f4914f6cdd1dULL;
    for (const int64_t c : p.x) h = mix64(h ^ static_cast<uint64_t>(c));
    return static_cast<size_t>(h);
  }
};

// Base geometry of the cylinder T_N^d x Z.
struct CylinderGeom {
  int32_t N = 0;
  int32_t d = 0;

  CylinderGeom() = default;
  CylinderGeom(int32_t N_, int32_t d_) : N(N_), d(d_) {
    if (N < 3) throw std::invalid_argument("cylinder: N must be >= 3");
    if (d < 2 || d > kMaxTorusDim)
      throw std::invalid_argument("cylinder: d must be in [2, " +
                                  std::to_string(kMaxTorusDim) + "]");
  }

  int32_t wrap(int64_t c) const {
    int64_t m = c % N;
    return static_cast<int32_t>(m < 0 ? m + N : m);
  }

  // Sites per torus level.
  int64_t level_size() const {
    int64_t s = 1;
    for (int i = 0; i < d; ++i) s *= N;
    return s;
  }

  // Row-major index of the torus part, in [0, N^d).
  int64_t torus_index(const CylinderPoint& p) const {
    int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * N + p.t[i];
    return idx;
  }

  CylinderPoint from_torus_index(int64_t idx, int64_t z) const {
    CylinderPoint p;
    p.z = z;
    for (int i = d - 1; i >= 0; --i) {
      p.t[i] = static_cast<int32_t>(idx % N);
      idx /= N;
    }
    return p;
  }
};

// Slab data for one cylinder size: B = T^d x [-r, r] inside the open slab
// T^d x (-h, h), with the excursion-count normalizer K = N^d / ((d+1)(h-r))
// kept both as a double and as an exact integer ratio.
struct SlabSpec {
  int32_t N = 0;
  int32_t d = 0;
  int64_t r = 0;
  int64_t h = 0;
  double K = 0.0;
  int64_t K_num = 0;  // N^d
  int64_t K_den = 0;  // (d+1)(h-r)
};

inline SlabSpec slab_geometry(int32_t N, int32_t d) {
  CylinderGeom geom(N, d);  // validates N, d
  SlabSpec s;
  s.N = N;
  s.d = d;
  s.r = N;
  const double lg = std::log(static_cast<double>(N));
  s.h = static_cast<int64_t>(std::floor(N * (2.0 + lg * lg)));
  if (s.h < 2 * N + 1) throw std::logic_error("slab: h < 2N+1");
  s.K_num = geom.level_size();
  s.K_den = static_cast<int64_t>(d + 1) * (s.h - s.r);
  s.K = static_cast<double>(s.K_num) / static_cast<double>(s.K_den);
  return s;
}

// Neighbor enumeration: 2(d+1) nearest neighbors, axis-major order
// (torus axis 0 -,+, ..., torus axis d-1 -,+, height -,+).
inline std::vector<CylinderPoint> neighbors(const CylinderPoint& p,
                                            const CylinderGeom& g) {
  std::vector<CylinderPoint> out;
  out.reserve(2 * (g.d + 1));
  for (int a = 0; a < g.d; ++a) {
    for (int s = -1; s <= 1; s += 2) {
      CylinderPoint q = p;
      q.t[a] = g.wrap(static_cast<int64_t>(p.t[a]) + s);
      out.push_back(q);
    }
  }
  for (int s = -1; s <= 1; s += 2) {
    CylinderPoint q = p;
    q.z = p.z + s;
    out.push_back(q);
  }
  return out;
}

inline std::vector<LatticePoint> neighbors(const LatticePoint& p, int dim) {
  if (dim < 1 || dim > kMaxTorusDim + 1)
    throw std::invalid_argument("neighbors: bad ambient dimension");
  std::vector<LatticePoint> out;
  out.reserve(2 * dim);
  for (int a = 0; a < dim; ++a) {
    for (int s = -1; s <= 1; s += 2) {
      LatticePoint q = p;
      q.x[a] += s;
      out.push_back(q);
    }
  }
  return out;
}

// Minimal wrapped displacement of a single torus coordinate, in [-N/2, N/2].
inline int64_t torus_delta(int64_t a, int64_t b, int64_t N) {
  int64_t dlt = (a - b) % N;
  if (dlt < 0) dlt += N;
  if (2 * dlt > N) dlt -= N;
  return dlt;
}

inline int64_t dist_linf(const CylinderPoint& a, const CylinderPoint& b,
                         const CylinderGeom& g) {
  int64_t m = iabs64(a.z - b.z);
  for (int i = 0; i < g.d; ++i)
    m = std::max(m, iabs64(torus_delta(a.t[i], b.t[i], g.N)));
  return m;
}

inline double dist_euclid(const CylinderPoint& a, const CylinderPoint& b,
                          const CylinderGeom& g) {
  double s = static_cast<double>(a.z - b.z) * static_cast<double>(a.z - b.z);
  for (int i = 0; i < g.d; ++i) {
    const double dlt =
        static_cast<double>(torus_delta(a.t[i], b.t[i], g.N));
    s += dlt * dlt;
  }
  return std::sqrt(s);
}

inline int64_t dist_linf(const LatticePoint& a, const LatticePoint& b,
                         int dim) {
  int64_t m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, iabs64(a.x[i] - b.x[i]));
  return m;
}

inline double dist_euclid(const LatticePoint& a, const LatticePoint& b,
                          int dim) {
  double s = 0;
  for (int i = 0; i < dim; ++i) {
    const double dlt = static_cast<double>(a.x[i] - b.x[i]);
    s += dlt * dlt;
  }
  return std::sqrt(s);
}

// Finite ordered site set with O(1) membership. Duplicates are dropped,
// first occurrence wins, insertion order is preserved.
template <class P, class Hash>
class SiteSetT {
 public:
  SiteSetT() = default;
  explicit SiteSetT(const std::vector<P>& pts) {
    for (const P& p : pts) insert(p);
  }

  bool insert(const P& p) {
    auto [it, fresh] = index_.try_emplace(p, pts_.size());
    if (fresh) pts_.push_back(p);
    return fresh;
  }

  bool contains(const P& p) const { return index_.count(p) != 0; }

  // Index of a member site, -1 if absent.
  int64_t index_of(const P& p) const {
    auto it = index_.find(p);
    return it == index_.end() ? -1 : static_cast<int64_t>(it->second);
  }

  size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const P& operator[](size_t i) const { return pts_[i]; }
  const std::vector<P>& points() const { return pts_; }
  auto begin() const { return pts_.begin(); }
  auto end() const { return pts_.end(); }

 private:
  std::vector<P> pts_;
  std::unordered_map<P, size_t, Hash> index_;
};

using CylinderSet = SiteSetT<CylinderPoint, CylinderPointHash>;
using LatticeSet = SiteSetT<LatticePoint, LatticePointHash>;

template <class Set>
struct BoundaryPair {
  Set inner;  // members with at least one neighbor outside the set
  Set outer;  // non-members adjacent to the set
};

template <class Set, class NeighborFn>
BoundaryPair<Set> boundary_split_impl(const Set& s, NeighborFn&& nbrs) {
  BoundaryPair<Set> b;
  for (const auto& p : s) {
    bool edge = false;
    for (const auto& q : nbrs(p)) {
      if (!s.contains(q)) {
        edge = true;
        b.outer.insert(q);
      }
    }
    if (edge) b.inner.insert(p);
  }
  return b;
}

inline BoundaryPair<CylinderSet> boundary_split(const CylinderSet& s,
                                                const CylinderGeom& g) {
  return boundary_split_impl(s, [&](const CylinderPoint& p) {
    return neighbors(p, g);
  });
}

inline BoundaryPair<LatticeSet> boundary_split(const LatticeSet& s, int dim) {
  return boundary_split_impl(s, [&](const LatticePoint& p) {
    return neighbors(p, dim);
  });
}

// All sites of T^d x {z}.
inline CylinderSet level_set(const CylinderGeom& g, int64_t z) {
  CylinderSet s;
  const int64_t n = g.level_size();
  for (int64_t i = 0; i < n; ++i) s.insert(g.from_torus_index(i, z));
  return s;
}

// All sites of T^d x [zlo, zhi].
inline CylinderSet band_sites(const CylinderGeom& g, int64_t zlo, int64_t zhi) {
  if (zlo > zhi) throw std::invalid_argument("band_sites: zlo > zhi");
  CylinderSet s;
  const int64_t n = g.level_size();
  for (int64_t z = zlo; z <= zhi; ++z)
    for (int64_t i = 0; i < n; ++i) s.insert(g.from_torus_index(i, z));
  return s;
}

// Axis-aligned box [lo[i], hi[i]] in Z^dim.
inline LatticeSet box_sites(const std::vector<int64_t>& lo,
                            const std::vector<int64_t>& hi, int dim) {
  if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
    throw std::invalid_argument("box_sites: extent arity mismatch");
  LatticeSet s;
  LatticePoint p;
  std::function<void(int)> rec = [&](int axis) {
    if (axis == dim) {
      s.insert(p);
      return;
    }
    if (lo[axis] > hi[axis])
      throw std::invalid_argument("box_sites: lo > hi");
    for (int64_t c = lo[axis]; c <= hi[axis]; ++c) {
      p.x[axis] = c;
      rec(axis + 1);
    }
  };
  rec(0);
  return s;
}

}  // namespace ccl
