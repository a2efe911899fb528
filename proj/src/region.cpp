#include "rts_sph/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rts {

namespace {
// Absorbs the rounding of n * (bound / n) when a base step is derived from a bound.
constexpr double kSlack = 1.0 + 1e-12;
}  // namespace

TimestepParams timestep_params(const Scene& scene, StepMode mode, double dt_base, double r) {
  TimestepParams p;
  p.mode = mode;
  p.dt_base = dt_base;
  p.r = r;
  p.mass = scene.particle_mass();
  p.sound_speed = scene.sound_speed;
  p.lambda_v = scene.lambda_v;
  p.lambda_f = scene.lambda_f;
  p.alpha = scene.alpha.value_or(mode == StepMode::wcsph ? 0.4 : 1.0);
  p.max_region = scene.minor_steps;
  return p;
}

double sound_speed_bound(const TimestepParams& p) { return p.lambda_v * p.r / p.sound_speed; }

double force_bound(double f_max, const TimestepParams& p) {
  if (!(f_max > 0.0)) return std::numeric_limits<double>::infinity();
  return p.lambda_f * std::sqrt(p.r * p.mass / f_max);
}

bool step_allowed(int n, double v_max, double f_max, const TimestepParams& p) {
  const double dt = n * p.dt_base;
  if (p.mode == StepMode::wcsph && dt > sound_speed_bound(p) * kSlack) return false;
  if (dt > force_bound(f_max, p) * kSlack) return false;
  if (n > 1 && dt * v_max / p.r > p.alpha * region_beta(n)) return false;
  return true;
}

int block_timestep(double v_max, double f_max, const TimestepParams& p) {
  for (int n = p.max_region; n > 1; --n) {
    if (step_allowed(n, v_max, f_max, p)) return n;
  }
  return 1;
}

void smooth_regions(const BlockGrid& grid, RegionField& region,
                    std::vector<std::uint8_t>& lowered) {
  const RegionField before = region;
  const std::int64_t nb = static_cast<std::int64_t>(grid.size());
  lowered.assign(grid.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    int m = before[b];
    for (std::uint32_t a : grid.adjacent(static_cast<std::size_t>(b))) m = std::min(m, before[a]);
    lowered[b] = m < before[b];
    region[b] = m;
  }
}

namespace {

// Separable Chebyshev dilation of a 0/1 mask on a dense box.
void dilate(std::vector<std::uint8_t>& mask, const int dims[3], int radius) {
  std::vector<std::uint8_t> tmp(mask.size());
  const std::size_t stride[3] = {1, static_cast<std::size_t>(dims[0]),
                                 static_cast<std::size_t>(dims[0]) * dims[1]};
  for (int axis = 0; axis < 3; ++axis) {
    for (std::size_t idx = 0; idx < mask.size(); ++idx) {
      const int pos = static_cast<int>((idx / stride[axis]) % dims[axis]);
      const int lo = std::max(0, pos - radius);
      const int hi = std::min(dims[axis] - 1, pos + radius);
      std::uint8_t v = 0;
      for (int q = lo; q <= hi && !v; ++q) {
        v = mask[idx + (static_cast<std::ptrdiff_t>(q) - pos) * static_cast<std::ptrdiff_t>(stride[axis])];
      }
      tmp[idx] = v;
    }
    mask.swap(tmp);
  }
}

}  // namespace

void expand_fast_regions(const BlockGrid& grid, RegionField& region, int layers) {
  const std::size_t nb = grid.size();
  if (nb == 0 || layers <= 0) return;
  int lo[3] = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
               std::numeric_limits<int>::max()};
  int hi[3] = {std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
               std::numeric_limits<int>::min()};
  bool any = false;
  for (std::size_t b = 0; b < nb; ++b) {
    const BlockCoord c = grid.coord(b);
    const int v[3] = {c.i, c.j, c.k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
    any = any || region[b] <= 2;
  }
  if (!any) return;

  const int dims[3] = {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  const std::size_t cells = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  auto cell = [&](std::size_t b) {
    const BlockCoord c = grid.coord(b);
    return static_cast<std::size_t>(c.i - lo[0]) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(c.j - lo[1]) +
                static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(c.k - lo[2]));
  };

  std::vector<std::uint8_t> reach1(cells, 0);
  std::vector<std::uint8_t> reach2(cells, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    if (region[b] == 1) reach1[cell(b)] = 1;
    if (region[b] == 2) reach2[cell(b)] = 1;
  }
  dilate(reach1, dims, layers);
  dilate(reach2, dims, layers);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t c = cell(b);
    if (reach1[c]) {
      region[b] = 1;
    } else if (reach2[c]) {
      region[b] = std::min(region[b], 2);
    }
  }
}

void derive_observed(const BlockGrid& grid, const RegionField& region,
                     const std::vector<std::uint8_t>& error_blocks,
                     std::vector<std::uint8_t>& observed) {
  const std::int64_t nb = static_cast<std::int64_t>(grid.size());
  observed.assign(grid.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    bool obs = false;
    for (std::uint32_t a : grid.adjacent(static_cast<std::size_t>(b))) {
      if (a == static_cast<std::uint32_t>(b)) continue;
      if (error_blocks[a] || region[a] < region[b]) {
        obs = true;
        break;
      }
    }
    observed[b] = obs;
  }
}

void propagate_preemptive(const BlockGrid& grid, const RegionField& region, ParticleSteps& steps) {
  const std::int64_t n = static_cast<std::int64_t>(steps.region.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const int block_region = region[grid.owner(static_cast<std::uint32_t>(i))];
    --steps.validity[i];
    if (steps.validity[i] <= 0 || block_region != steps.region[i]) {
      steps.compute[i] = 1;
      steps.validity[i] = block_region;
      steps.region[i] = static_cast<std::uint8_t>(block_region);
    } else {
      steps.compute[i] = 0;
    }
  }
}

int major_step_validity(int n, int minor_steps) {
  return n <= 2 ? std::min(n, minor_steps) : minor_steps;
}

void propagate_major(const BlockGrid& grid, const RegionField& region, int minor_steps,
                     ParticleSteps& steps) {
  const std::int64_t n = static_cast<std::int64_t>(steps.region.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const int block_region = region[grid.owner(static_cast<std::uint32_t>(i))];
    steps.region[i] = static_cast<std::uint8_t>(block_region);
    steps.validity[i] = major_step_validity(block_region, minor_steps);
    steps.compute[i] = 1;
  }
}

}  // namespace rts
