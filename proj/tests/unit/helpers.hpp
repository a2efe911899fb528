#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "rts_sph/block_grid.hpp"
#include "rts_sph/scene.hpp"
#include "rts_sph/vec3.hpp"

namespace testing {

/// Seeded generator with the few draws the property tests need.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }
  rts::Vec3 point(const rts::Vec3& lo, const rts::Vec3& hi) {
    return {uniform(lo.x, hi.x), uniform(lo.y, hi.y), uniform(lo.z, hi.z)};
  }
  rts::Vec3 direction() {
    for (;;) {
      const rts::Vec3 v = point({-1, -1, -1}, {1, 1, 1});
      const double n = rts::norm(v);
      if (n > 0.1 && n <= 1.0) return v * (1.0 / n);
    }
  }

 private:
  std::mt19937_64 eng_;
};

/// A grid over unit blocks with one particle at the centre of each listed
/// block coordinate. Block b of the result is coords[b].
inline rts::BlockGrid grid_of(const std::vector<rts::BlockCoord>& coords, std::vector<rts::Vec3>* pts = nullptr) {
  std::vector<rts::Vec3> x;
  rts::Vec3 hi{1, 1, 1};
  for (const auto& c : coords) {
    x.push_back({c.i + 0.5, c.j + 0.5, c.k + 0.5});
    hi = {std::max(hi.x, c.i + 1.0), std::max(hi.y, c.j + 1.0), std::max(hi.z, c.k + 1.0)};
  }
  rts::BlockGrid grid({0, 0, 0}, 1.0);
  grid.rebuild(x.data(), x.size(), {0, 0, 0}, hi);
  if (pts) *pts = x;
  return grid;
}

/// Small closed tank: a fluid box of nx x ny x nz particles in the corner of
/// a domain twice as wide, two boundary layers.
inline rts::Scene small_tank(int nx, int ny, int nz, double spacing = 0.02) {
  rts::Scene s;
  s.spacing = spacing;
  s.domain_min = {0, 0, 0};
  s.domain_max = {2 * nx * spacing, 1.5 * ny * spacing, nz * spacing};
  s.fluid_boxes = {{{0, 0, 0}, {nx * spacing, ny * spacing, nz * spacing}}};
  return s;
}

}  // namespace testing
