#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "rts_sph/block_grid.hpp"
#include "rts_sph/errors.hpp"

using rts::BlockCoord;
using rts::BlockGrid;
using rts::Vec3;

namespace {

std::vector<std::uint32_t> sorted_candidates(const BlockGrid& g, std::uint32_t p, int layers) {
  std::vector<std::uint32_t> out;
  g.neighbors(p, layers, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("block_grid") {
  TEST_CASE("empty particle list") {
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(nullptr, 0, {0, 0, 0}, {1, 1, 1});
    CHECK(g.size() == 0);
    CHECK(g.particle_count() == 0);
  }

  TEST_CASE("particle at the domain origin is owned by block 0,0,0") {
    BlockGrid g({0, 0, 0}, 0.04);
    const Vec3 x{0, 0, 0};
    g.rebuild(&x, 1, {0, 0, 0}, {1, 1, 1});
    REQUIRE(g.size() == 1);
    CHECK(g.coord(g.owner(0)) == BlockCoord{0, 0, 0});
  }

  TEST_CASE("every particle is owned by exactly one block") {
    testing::Gen gen(31);
    const Vec3 lo{-0.3, 0.1, 0.0};
    const Vec3 hi{0.7, 0.6, 0.45};
    std::vector<Vec3> x(1000);
    for (auto& p : x) p = gen.point(lo, hi);
    BlockGrid g(lo, 0.044);
    g.rebuild(x.data(), x.size(), lo, hi);

    std::vector<int> seen(x.size(), 0);
    for (std::size_t b = 0; b < g.size(); ++b) {
      CHECK_FALSE(g.members(b).empty());
      for (std::uint32_t p : g.members(b)) {
        ++seen[p];
        CHECK(g.owner(p) == b);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    for (std::size_t p = 0; p < x.size(); ++p) {
      const BlockCoord c = g.coord(g.owner(static_cast<std::uint32_t>(p)));
      CHECK(c.i == static_cast<int>(std::floor((x[p].x - lo.x) / 0.044)));
      CHECK(c.j == static_cast<int>(std::floor((x[p].y - lo.y) / 0.044)));
      CHECK(c.k == static_cast<int>(std::floor((x[p].z - lo.z) / 0.044)));
      CHECK(g.find(c) == g.owner(static_cast<std::uint32_t>(p)));
    }
    std::set<std::tuple<int, int, int>> coords;
    for (std::size_t b = 0; b < g.size(); ++b) coords.insert({g.coord(b).i, g.coord(b).j, g.coord(b).k});
    CHECK(coords.size() == g.size());
  }

  TEST_CASE("adjacency lists the occupied 3x3x3 neighbourhood") {
    testing::Gen gen(32);
    std::vector<Vec3> x(400);
    for (auto& p : x) p = gen.point({0, 0, 0}, {0.5, 0.5, 0.5});
    BlockGrid g({0, 0, 0}, 0.05);
    g.rebuild(x.data(), x.size(), {0, 0, 0}, {0.5, 0.5, 0.5});
    for (std::size_t b = 0; b < g.size(); ++b) {
      std::set<std::uint32_t> expect;
      for (std::size_t a = 0; a < g.size(); ++a) {
        const BlockCoord p = g.coord(a);
        const BlockCoord q = g.coord(b);
        if (std::abs(p.i - q.i) <= 1 && std::abs(p.j - q.j) <= 1 && std::abs(p.k - q.k) <= 1) {
          expect.insert(static_cast<std::uint32_t>(a));
        }
      }
      const auto adj = g.adjacent(b);
      CHECK(std::set<std::uint32_t>(adj.begin(), adj.end()) == expect);
    }
  }

  TEST_CASE("block maxima equal brute-force maxima") {
    testing::Gen gen(33);
    std::vector<Vec3> x(600), v(600), f(600);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = gen.point({0, 0, 0}, {0.3, 0.3, 0.3});
      v[i] = gen.point({-3, -3, -3}, {3, 3, 3});
      f[i] = gen.point({-1, -1, -1}, {1, 1, 1});
    }
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(x.data(), x.size(), {0, 0, 0}, {0.3, 0.3, 0.3});
    g.reduce_maxima(v.data(), f.data());
    for (std::size_t b = 0; b < g.size(); ++b) {
      double vm = 0, fm = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (g.owner(static_cast<std::uint32_t>(i)) != b) continue;
        vm = std::max(vm, rts::norm(v[i]));
        fm = std::max(fm, rts::norm(f[i]));
      }
      CHECK(g.v_max[b] == vm);
      CHECK(g.f_max[b] == fm);
    }

    std::fill(v.begin(), v.end(), Vec3{});
    g.reduce_maxima(v.data(), f.data());
    CHECK(std::all_of(g.v_max.begin(), g.v_max.end(), [](double m) { return m == 0.0; }));
  }

  TEST_CASE("single moving particle sets its block maximum") {
    const Vec3 x[2] = {{0.01, 0.01, 0.01}, {0.5, 0.5, 0.5}};
    const Vec3 v[2] = {{0, 3, 0}, {0, 0, 0}};
    const Vec3 f[2] = {};
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(x, 2, {0, 0, 0}, {1, 1, 1});
    g.reduce_maxima(v, f);
    CHECK(g.v_max[g.owner(0)] == 3.0);
    CHECK(g.v_max[g.owner(1)] == 0.0);
  }

  TEST_CASE("rebuild and reduce are idempotent") {
    testing::Gen gen(34);
    std::vector<Vec3> x(300), v(300);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = gen.point({0, 0, 0}, {0.2, 0.2, 0.2});
      v[i] = gen.point({-1, -1, -1}, {1, 1, 1});
    }
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(x.data(), x.size(), {0, 0, 0}, {0.2, 0.2, 0.2});
    g.reduce_maxima(v.data(), v.data());
    std::vector<BlockCoord> coords;
    for (std::size_t b = 0; b < g.size(); ++b) coords.push_back(g.coord(b));
    const auto vmax = g.v_max;
    g.rebuild(x.data(), x.size(), {0, 0, 0}, {0.2, 0.2, 0.2});
    g.reduce_maxima(v.data(), v.data());
    REQUIRE(g.size() == coords.size());
    for (std::size_t b = 0; b < g.size(); ++b) CHECK(g.coord(b) == coords[b]);
    CHECK(g.v_max == vmax);
  }

  TEST_CASE("particles outside the domain abort the rebuild") {
    BlockGrid g({0, 0, 0}, 0.04);
    const Vec3 x[2] = {{0.5, 0.5, 0.5}, {0.5, 1.2, 0.5}};
    CHECK_THROWS_AS(g.rebuild(x, 2, {0, 0, 0}, {1, 1, 1}), rts::NumericalAbort);
    const Vec3 nan[1] = {{std::nan(""), 0.5, 0.5}};
    CHECK_THROWS_AS(g.rebuild(nan, 1, {0, 0, 0}, {1, 1, 1}), rts::NumericalAbort);
  }

  TEST_CASE("isolated particle sees only itself") {
    const Vec3 x[2] = {{0.1, 0.1, 0.1}, {0.9, 0.9, 0.9}};
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(x, 2, {0, 0, 0}, {1, 1, 1});
    CHECK(sorted_candidates(g, 0, 1) == std::vector<std::uint32_t>{0});
    CHECK(sorted_candidates(g, 0, 2) == std::vector<std::uint32_t>{0});
  }

  TEST_CASE("close particles in adjacent blocks see each other") {
    const double h = 0.04;
    const Vec3 x[2] = {{0.039, 0.02, 0.02}, {0.039 + 0.9 * h, 0.02, 0.02}};
    BlockGrid g({0, 0, 0}, h);
    g.rebuild(x, 2, {0, 0, 0}, {1, 1, 1});
    CHECK(g.owner(0) != g.owner(1));
    CHECK(sorted_candidates(g, 0, 1) == std::vector<std::uint32_t>{0, 1});
    CHECK(sorted_candidates(g, 1, 1) == std::vector<std::uint32_t>{0, 1});
  }

  TEST_CASE("one-layer candidates contain every neighbour within the block size") {
    testing::Gen gen(35);
    const double h = 0.05;
    std::vector<Vec3> x(5000);
    for (auto& p : x) p = gen.point({0, 0, 0}, {0.6, 0.6, 0.6});
    BlockGrid g({0, 0, 0}, h);
    g.rebuild(x.data(), x.size(), {0, 0, 0}, {0.6, 0.6, 0.6});
    std::vector<std::uint32_t> cand;
    for (std::uint32_t i = 0; i < x.size(); i += 7) {
      cand.clear();
      g.neighbors(i, 1, cand);
      std::sort(cand.begin(), cand.end());
      CHECK(std::adjacent_find(cand.begin(), cand.end()) == cand.end());
      for (std::uint32_t j = 0; j < x.size(); ++j) {
        if (rts::norm(x[i] - x[j]) < h) CHECK(std::binary_search(cand.begin(), cand.end(), j));
      }
      std::vector<std::uint32_t> wide;
      g.neighbors(i, 2, wide);
      std::sort(wide.begin(), wide.end());
      CHECK(std::includes(wide.begin(), wide.end(), cand.begin(), cand.end()));
    }
  }

  TEST_CASE("static particles join the candidates of nearby blocks only") {
    const double h = 0.04;
    std::vector<Vec3> fluid{{0.02, 0.02, 0.02}};
    std::vector<Vec3> wall{{-0.01, 0.02, 0.02}, {0.5, 0.5, 0.5}, {-0.01, 0.3, 0.02}};
    BlockGrid g({0, 0, 0}, h);
    g.set_static(wall.data(), wall.size(), 10);
    g.rebuild(fluid.data(), 1, {0, 0, 0}, {1, 1, 1});
    CHECK(sorted_candidates(g, 0, 1) == std::vector<std::uint32_t>{0, 10});
    CHECK(g.active_static_count() == 1);
  }

  TEST_CASE("static particles set after the fluid are still found") {
    std::vector<Vec3> fluid{{0.02, 0.02, 0.02}};
    std::vector<Vec3> wall{{-0.01, 0.02, 0.02}};
    BlockGrid g({0, 0, 0}, 0.04);
    g.rebuild(fluid.data(), 1, {0, 0, 0}, {1, 1, 1});
    g.set_static(wall.data(), wall.size(), 1);
    CHECK(sorted_candidates(g, 0, 1) == std::vector<std::uint32_t>{0, 1});
  }

  TEST_CASE("candidate set filters by distance") {
    const Vec3 x[4] = {{0, 0, 0}, {0.01, 0, 0}, {0.03, 0, 0}, {0, 0.02, 0}};
    rts::CandidateSet c;
    c.ids = {0, 1, 2, 3};
    c.gather(x);
    std::vector<std::uint32_t> out{99};
    c.select({0, 0, 0}, 0.02 * 0.02, out);
    CHECK(out == std::vector<std::uint32_t>{0, 1});
  }
}
