#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "ccl/lattice.hpp"

using namespace ccl;

TEST_CASE("slab geometry pins r, h, K for the standard sizes", "[lattice]") {
  // h = floor(N (2 + ln(N)^2)), r = N, K = N^d / ((d+1)(h-r)).
  struct Row {
    int32_t N;
    int64_t h;
  };
  const Row rows[] = {{3, 9}, {4, 15}, {6, 31}, {8, 50},
                      {10, 73}, {12, 98}, {14, 125}};
  for (const Row& row : rows) {
    const SlabSpec s = slab_geometry(row.N, 2);
    CAPTURE(row.N);
    CHECK(s.r == row.N);
    CHECK(s.h == row.h);
    CHECK(s.K_num == static_cast<int64_t>(row.N) * row.N);
    CHECK(s.K_den == 3 * (row.h - row.N));
  }
  CHECK(slab_geometry(6, 2).K == Catch::Approx(0.48).margin(1e-15));
  CHECK(slab_geometry(10, 2).K ==
        Catch::Approx(100.0 / 189.0).margin(1e-15));
}

TEST_CASE("cylinder geometry validates and wraps", "[lattice]") {
  CHECK_THROWS_AS(CylinderGeom(2, 2), std::invalid_argument);
  CHECK_THROWS_AS(CylinderGeom(6, 1), std::invalid_argument);
  CHECK_THROWS_AS(CylinderGeom(6, 9), std::invalid_argument);

  const CylinderGeom g(6, 2);
  CHECK(g.wrap(-1) == 5);
  CHECK(g.wrap(6) == 0);
  CHECK(g.wrap(13) == 1);
  CHECK(g.level_size() == 36);

  for (int64_t i = 0; i < g.level_size(); ++i) {
    const CylinderPoint p = g.from_torus_index(i, -3);
    CHECK(g.torus_index(p) == i);
    CHECK(p.z == -3);
  }
}

TEST_CASE("neighbor enumeration has the right count and no duplicates",
          "[lattice]") {
  const CylinderGeom g(6, 2);
  CylinderPoint p;
  p.t[0] = 0;
  p.t[1] = 5;
  p.z = 7;
  const auto nb = neighbors(p, g);
  REQUIRE(nb.size() == 6);
  std::set<std::tuple<int32_t, int32_t, int64_t>> uniq;
  for (const auto& q : nb) uniq.insert({q.t[0], q.t[1], q.z});
  CHECK(uniq.size() == 6);
  // Wrap-around both ways on each torus axis.
  CHECK(uniq.count({5, 5, 7}) == 1);
  CHECK(uniq.count({1, 5, 7}) == 1);
  CHECK(uniq.count({0, 4, 7}) == 1);
  CHECK(uniq.count({0, 0, 7}) == 1);
  CHECK(uniq.count({0, 5, 6}) == 1);
  CHECK(uniq.count({0, 5, 8}) == 1);

  LatticePoint q;
  const auto lnb = neighbors(q, 3);
  CHECK(lnb.size() == 6);
}

TEST_CASE("torus distance uses minimal wrap", "[lattice]") {
  const CylinderGeom g(10, 2);
  CHECK(torus_delta(9, 0, 10) == -1);
  CHECK(torus_delta(0, 9, 10) == 1);
  CHECK(torus_delta(7, 2, 10) == 5);

  CylinderPoint a, b;
  a.t[0] = 9;
  a.t[1] = 0;
  a.z = 4;
  b.t[0] = 0;
  b.t[1] = 5;
  b.z = 1;
  CHECK(dist_linf(a, b, g) == 5);
  CHECK(dist_euclid(a, b, g) ==
        Catch::Approx(std::sqrt(1.0 + 25.0 + 9.0)));
}

TEST_CASE("site sets keep insertion order and deduplicate", "[lattice]") {
  CylinderSet s;
  CylinderPoint p;
  p.z = 1;
  CHECK(s.insert(p));
  CHECK_FALSE(s.insert(p));
  p.z = 2;
  CHECK(s.insert(p));
  CHECK(s.size() == 2);
  CHECK(s.index_of(p) == 1);
  p.z = 9;
  CHECK(s.index_of(p) == -1);
  CHECK_FALSE(s.contains(p));
}

TEST_CASE("boundary split of a 3x3x3 cube in Z^3", "[lattice]") {
  const LatticeSet cube = box_sites({-1, -1, -1}, {1, 1, 1}, 3);
  REQUIRE(cube.size() == 27);
  const auto b = boundary_split(cube, 3);
  CHECK(b.inner.size() == 26);  // everything but the center touches outside
  CHECK(b.outer.size() == 54);  // six 3x3 faces, no diagonal adjacency
}

TEST_CASE("level and band site generators", "[lattice]") {
  const CylinderGeom g(4, 2);
  CHECK(level_set(g, 3).size() == 16);
  const CylinderSet band = band_sites(g, -2, 2);
  CHECK(band.size() == 16 * 5);
  CylinderPoint p;
  p.t[0] = 3;
  p.t[1] = 0;
  p.z = -2;
  CHECK(band.contains(p));
  p.z = -3;
  CHECK_FALSE(band.contains(p));
}
