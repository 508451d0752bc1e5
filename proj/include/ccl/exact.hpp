#pragma once

// Exact potential theory on finite windows by linear algebra: killed Green
// functions g_U, first-hit location distributions, equilibrium measures and
// capacities relative to a window, mutual energies, and the entrance-law
// identity K * P_q(H_K < T_slab, X_{H_K} = x) = e_{K,slab}(x) that gates the
// walk engine.
//
// (I - P_U) with P_U the substochastic one-step matrix of SRW restricted to
// a proper finite window is symmetric positive definite, so all systems are
// solved by a sparse LDLT factorization; columns of g_U are materialized on
// demand with a per-column residual check (refined once if needed).

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ccl/lattice.hpp"

namespace ccl {

struct CylinderAmbient {
  using Point = CylinderPoint;
  using Set = CylinderSet;
  CylinderGeom geom;
  explicit CylinderAmbient(const CylinderGeom& g) : geom(g) {}
  int degree() const { return 2 * (geom.d + 1); }
  std::vector<Point> neighbors_of(const Point& p) const {
    return neighbors(p, geom);
  }
};

struct LatticeAmbient {
  using Point = LatticePoint;
  using Set = LatticeSet;
  int dim = 0;
  explicit LatticeAmbient(int dim_) : dim(dim_) {
    if (dim < 3)
      throw std::invalid_argument("lattice ambient: dimension must be >= 3");
  }
  int degree() const { return 2 * dim; }
  std::vector<Point> neighbors_of(const Point& p) const {
    return neighbors(p, dim);
  }
};

// Weighted start law; weights must sum to 1.
template <class Point>
using StartLaw = std::vector<std::pair<Point, double>>;

struct HitLocation {
  std::vector<double> probs;  // aligned with K's site order
  double miss = 0;            // walk exits the window before reaching K
};

struct EquilibriumResult {
  std::vector<double> weights;  // aligned with K's site order
  double cap = 0;
};

inline constexpr size_t kWindowGuard = 20000;

template <class Ambient>
class KilledGreenSystem {
 public:
  using Point = typename Ambient::Point;
  using Set = typename Ambient::Set;

  KilledGreenSystem(Set window, Ambient ambient)
      : U_(std::move(window)), amb_(std::move(ambient)) {
    const size_t n = U_.size();
    if (n == 0) throw std::invalid_argument("killed_green: empty window");
    if (n > kWindowGuard)
      throw std::invalid_argument("killed_green: window exceeds 2e4 sites");
    A_ = assemble(U_);
    solver_.compute(A_);
    if (solver_.info() != Eigen::Success)
      throw std::runtime_error("killed_green: factorization failed");
  }

  size_t size() const { return U_.size(); }
  const Set& window() const { return U_; }
  const Ambient& ambient() const { return amb_; }

  // Column y of g_U, i.e. g_U(., U[y]); cached.
  const Eigen::VectorXd& column(size_t y) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cols_.find(y);
    if (it != cols_.end()) return it->second;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(U_.size());
    b(y) = 1.0;
    Eigen::VectorXd g = refined_solve(solver_, A_, b);
    return cols_.emplace(y, std::move(g)).first->second;
  }

  double green(size_t x, size_t y) const { return column(y)(x); }

  double green(const Point& x, const Point& y) const {
    const int64_t i = U_.index_of(x), j = U_.index_of(y);
    if (i < 0 || j < 0)
      throw std::invalid_argument("killed_green: site outside window");
    return green(static_cast<size_t>(i), static_cast<size_t>(j));
  }

  // Full dense g_U for small windows (tests / tiny oracles only).
  Eigen::MatrixXd dense() const {
    const size_t n = U_.size();
    if (n > 3000)
      throw std::invalid_argument("killed_green: dense guard |U| <= 3000");
    Eigen::MatrixXd G(n, n);
    for (size_t j = 0; j < n; ++j) G.col(j) = column(j);
    return G;
  }

  // Defining-system residual ||(I - P_U) G - I||_inf over a set of columns.
  double residual(const std::vector<size_t>& columns) const {
    double worst = 0;
    for (size_t j : columns) {
      Eigen::VectorXd b = Eigen::VectorXd::Zero(U_.size());
      b(j) = 1.0;
      worst = std::max(worst,
                       (A_ * column(j) - b).template lpNorm<Eigen::Infinity>());
    }
    return worst;
  }

  // Equilibrium measure of K relative to the window via the Green-matrix
  // route: solve G|_K e = 1, cap = sum(e).
  EquilibriumResult equilibrium(const Set& K) const {
    const size_t m = check_subset(K);
    Eigen::MatrixXd GK(m, m);
    for (size_t j = 0; j < m; ++j) {
      const Eigen::VectorXd& col =
          column(static_cast<size_t>(U_.index_of(K[j])));
      for (size_t i = 0; i < m; ++i) GK(i, j) = col(U_.index_of(K[i]));
    }
    const Eigen::VectorXd e = GK.ldlt().solve(Eigen::VectorXd::Ones(m));
    const double resid =
        (GK * e - Eigen::VectorXd::Ones(m)).lpNorm<Eigen::Infinity>();
    if (!(resid <= 1e-8))
      throw std::runtime_error("equilibrium: conditioning failure (residual)");
    EquilibriumResult out;
    out.weights.resize(m);
    for (size_t i = 0; i < m; ++i) {
      if (e(i) < -1e-10)
        throw std::runtime_error(
            "equilibrium: conditioning failure (negative weight)");
      out.weights[i] = e(i);
      out.cap += e(i);
    }
    return out;
  }

  // Independent route: e(x) = P_x(walk leaves the window before returning
  // to K), computed from one harmonic solve on U \ K.
  EquilibriumResult equilibrium_escape(const Set& K) const {
    const size_t m = check_subset(K);
    const SubSystem sub = make_sub_system(K);
    // psi(x) = P_x(H_K < T_U) for x in U \ K.
    Eigen::VectorXd bK = Eigen::VectorXd::Zero(sub.sites.size());
    const double w = 1.0 / amb_.degree();
    for (size_t s = 0; s < sub.sites.size(); ++s)
      for (const Point& q : amb_.neighbors_of(U_[sub.sites[s]]))
        if (K.contains(q)) bK(s) += w;
    const Eigen::VectorXd psi = refined_solve(*sub.solver, sub.A, bK);
    EquilibriumResult out;
    out.weights.resize(m);
    for (size_t i = 0; i < m; ++i) {
      double esc = 0;
      for (const Point& q : amb_.neighbors_of(K[i])) {
        const int64_t wi = U_.index_of(q);
        if (wi < 0) {
          esc += w;  // stepped out of the window: escaped
        } else if (!K.contains(q)) {
          esc += w * (1.0 - psi(sub.sub_of_win[wi]));
        }
        // neighbor in K: immediate return, contributes 0
      }
      out.weights[i] = esc;
      out.cap += esc;
    }
    return out;
  }

  // Law of (whether, where) the walk first hits K before leaving the window.
  // One adjoint solve on U \ K serves every target site.
  HitLocation hitting_location(const StartLaw<Point>& start,
                               const Set& K) const {
    const size_t m = check_subset(K);
    double mass = 0;
    for (const auto& [p, wgt] : start) {
      if (wgt < 0) throw std::invalid_argument("hitting: negative weight");
      if (!U_.contains(p))
        throw std::invalid_argument("hitting: start site outside window");
      mass += wgt;
    }
    if (std::abs(mass - 1.0) > 1e-12)
      throw std::invalid_argument("hitting: start law must sum to 1");

    HitLocation out;
    out.probs.assign(m, 0.0);
    const SubSystem sub = make_sub_system(K);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(sub.sites.size());
    for (const auto& [p, wgt] : start) {
      const int64_t ki = K.index_of(p);
      if (ki >= 0) {
        out.probs[ki] += wgt;  // started on K: hit at time 0
      } else {
        q(sub.sub_of_win[U_.index_of(p)]) += wgt;
      }
    }
    // Expected visit counts to U \ K from the start law (symmetric system,
    // so the adjoint solve is the same solve).
    const Eigen::VectorXd visits = refined_solve(*sub.solver, sub.A, q);
    const double w = 1.0 / amb_.degree();
    double hit_total = 0;
    for (size_t i = 0; i < m; ++i) {
      double flux = out.probs[i];
      for (const Point& nb : amb_.neighbors_of(K[i])) {
        const int64_t wi = U_.index_of(nb);
        if (wi >= 0 && !K.contains(nb))
          flux += w * visits(sub.sub_of_win[wi]);
      }
      out.probs[i] = flux;
      hit_total += flux;
    }
    out.miss = 1.0 - hit_total;
    return out;
  }

  // Mutual energy sum_{x in S1, y in S2} e_{S1}(x) g_U(x,y) e_{S2}(y).
  double mutual_energy(const Set& S1, const Set& S2) const {
    check_subset(S1);
    check_subset(S2);
    for (const Point& p : S1)
      if (S2.contains(p))
        throw std::invalid_argument("mutual_energy: sets overlap");
    const EquilibriumResult e1 = equilibrium(S1);
    const EquilibriumResult e2 = equilibrium(S2);
    double total = 0;
    for (size_t j = 0; j < S2.size(); ++j) {
      const Eigen::VectorXd& col =
          column(static_cast<size_t>(U_.index_of(S2[j])));
      for (size_t i = 0; i < S1.size(); ++i)
        total += e1.weights[i] * col(U_.index_of(S1[i])) * e2.weights[j];
    }
    return total;
  }

 private:
  struct SubSystem {
    std::vector<size_t> sites;       // window indices of U \ K, in order
    std::vector<int64_t> sub_of_win; // window index -> sub index or -1
    Eigen::SparseMatrix<double> A;
    std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> solver;
  };

  size_t check_subset(const Set& K) const {
    if (K.empty()) throw std::invalid_argument("exact: empty site set");
    for (const Point& p : K)
      if (!U_.contains(p))
        throw std::invalid_argument("exact: set not contained in window");
    return K.size();
  }

  Eigen::SparseMatrix<double> assemble(const Set& sites) const {
    const double w = 1.0 / amb_.degree();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sites.size() * (amb_.degree() + 1));
    for (size_t i = 0; i < sites.size(); ++i) {
      trip.emplace_back(i, i, 1.0);
      for (const Point& q : amb_.neighbors_of(sites[i])) {
        const int64_t j = sites.index_of(q);
        if (j >= 0) trip.emplace_back(static_cast<int>(i),
                                      static_cast<int>(j), -w);
      }
    }
    Eigen::SparseMatrix<double> A(sites.size(), sites.size());
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }

  SubSystem make_sub_system(const Set& K) const {
    SubSystem sub;
    sub.sub_of_win.assign(U_.size(), -1);
    Set rest;
    for (size_t i = 0; i < U_.size(); ++i) {
      if (K.contains(U_[i])) continue;
      sub.sub_of_win[i] = static_cast<int64_t>(sub.sites.size());
      sub.sites.push_back(i);
      rest.insert(U_[i]);
    }
    if (rest.empty())
      throw std::invalid_argument("exact: K must be a proper subset of U");
    sub.A = assemble(rest);
    sub.solver = std::make_unique<
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    sub.solver->compute(sub.A);
    if (sub.solver->info() != Eigen::Success)
      throw std::runtime_error("exact: sub-factorization failed");
    return sub;
  }

  static Eigen::VectorXd refined_solve(
      const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& solver,
      const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::VectorXd g = solver.solve(b);
    Eigen::VectorXd r = b - A * g;
    if (r.lpNorm<Eigen::Infinity>() > 1e-12) {
      g += solver.solve(r);
      r = b - A * g;
    }
    if (!(r.lpNorm<Eigen::Infinity>() <= 1e-10))
      throw std::runtime_error("exact: solve residual exceeds 1e-10");
    return g;
  }

  Set U_;
  Ambient amb_;
  Eigen::SparseMatrix<double> A_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  mutable std::mutex mu_;
  mutable std::unordered_map<size_t, Eigen::VectorXd> cols_;
};

using CylinderKilledGreen = KilledGreenSystem<CylinderAmbient>;
using LatticeKilledGreen = KilledGreenSystem<LatticeAmbient>;

inline CylinderKilledGreen killed_green(const CylinderSet& U,
                                        const CylinderGeom& geom) {
  return CylinderKilledGreen(U, CylinderAmbient(geom));
}

inline LatticeKilledGreen killed_green(const LatticeSet& U, int dim) {
  return LatticeKilledGreen(U, LatticeAmbient(dim));
}

// The finite realization of the open slab T^d x (-h, h): sites with
// |z| <= h-1, absorbed on T^d x {+-h}.
struct SlabWindow {
  CylinderGeom geom;
  SlabSpec spec;
  CylinderSet sites;
};

inline SlabWindow make_slab_window(int32_t N, int32_t d) {
  SlabWindow w;
  w.geom = CylinderGeom(N, d);
  w.spec = slab_geometry(N, d);
  w.sites = band_sites(w.geom, -(w.spec.h - 1), w.spec.h - 1);
  return w;
}

// Uniform start law on T^d x {z}.
inline StartLaw<CylinderPoint> q_level_law(const CylinderGeom& geom,
                                           int64_t z) {
  StartLaw<CylinderPoint> law;
  const int64_t n = geom.level_size();
  law.reserve(n);
  for (int64_t i = 0; i < n; ++i)
    law.emplace_back(geom.from_torus_index(i, z), 1.0 / n);
  return law;
}

// Uniform start law on T^d x {-r, +r} (the excursion entry law).
inline StartLaw<CylinderPoint> q_law(const CylinderGeom& geom,
                                     const SlabSpec& spec) {
  StartLaw<CylinderPoint> law;
  const int64_t n = geom.level_size();
  law.reserve(2 * n);
  for (int64_t i = 0; i < n; ++i) {
    law.emplace_back(geom.from_torus_index(i, -spec.r), 0.5 / n);
    law.emplace_back(geom.from_torus_index(i, spec.r), 0.5 / n);
  }
  return law;
}

// max_x | K * P_q(H_K < T_slab, X_{H_K} = x) - e_{K,slab}(x) |, both sides
// by exact solves. An exact identity; any residual is solver-only.
inline double entrance_law_residual(const CylinderSet& K, int32_t N,
                                    int32_t d) {
  const SlabWindow w = make_slab_window(N, d);
  for (const CylinderPoint& p : K)
    if (iabs64(p.z) >= w.spec.r)
      throw std::invalid_argument("entrance law: K must lie in |z| < r");
  const CylinderKilledGreen sys = killed_green(w.sites, w.geom);
  const HitLocation hit = sys.hitting_location(q_law(w.geom, w.spec), K);
  const EquilibriumResult eq = sys.equilibrium(K);
  const double KN = static_cast<double>(w.spec.K_num) / w.spec.K_den;
  double worst = 0;
  for (size_t i = 0; i < K.size(); ++i)
    worst = std::max(worst, std::abs(KN * hit.probs[i] - eq.weights[i]));
  return worst;
}

// Independent oracle for the slab Green diagonal at a zero-level site:
// torus Fourier modes decouple the slab into N^d tridiagonal systems on
// the height segment [-h+1, h-1]; each is solved by the Thomas algorithm.
inline double slab_center_green_diag(int32_t N, int32_t d) {
  const SlabSpec spec = slab_geometry(N, d);
  const int64_t n = 2 * spec.h - 1;   // heights -h+1 .. h-1
  const int64_t center = spec.h - 1;  // height 0
  const double off = -1.0 / (2.0 * (d + 1));
  int64_t modes = 1;
  for (int i = 0; i < d; ++i) modes *= N;
  if (modes > 1000000)
    throw std::invalid_argument("slab oracle: too many torus modes");
  std::vector<double> diag(n), rhs(n), cp(n);
  double total = 0;
  for (int64_t m = 0; m < modes; ++m) {
    double lam = 0;
    int64_t mm = m;
    for (int i = 0; i < d; ++i) {
      lam += std::cos(2.0 * std::numbers::pi * (mm % N) / N);
      mm /= N;
    }
    lam /= (d + 1);
    const double a = 1.0 - lam;
    // Thomas solve of tridiag(off, a, off) u = e_center.
    std::fill(rhs.begin(), rhs.end(), 0.0);
    rhs[center] = 1.0;
    cp[0] = off / a;
    rhs[0] /= a;
    for (int64_t i = 1; i < n; ++i) {
      const double denom = a - off * cp[i - 1];
      cp[i] = off / denom;
      rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (int64_t i = n - 2; i >= 0; --i) rhs[i] -= cp[i] * rhs[i + 1];
    total += rhs[center];
  }
  return total / modes;
}

}  // namespace ccl
