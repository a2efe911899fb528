#pragma once

#include <cstdint>
#include <vector>

#include "rts_sph/block_grid.hpp"
#include "rts_sph/scene.hpp"

namespace rts {

enum class StepMode { wcsph, pcisph };

/// Inputs of the per-block step criteria.
struct TimestepParams {
  StepMode mode = StepMode::pcisph;
  double dt_base = 0.0;  // s
  double r = 0.0;        // block size, m
  double mass = 0.0;     // kg
  double sound_speed = 0.0;
  double lambda_v = 0.4;
  double lambda_f = 0.25;
  double alpha = 1.0;
  int max_region = 4;
};

TimestepParams timestep_params(const Scene& scene, StepMode mode, double dt_base, double r);

/// Sound-speed bound on a step: lambda_v r / c_s.
double sound_speed_bound(const TimestepParams& p);
/// Force bound on a step: lambda_f sqrt(r m / F); unbounded for F = 0.
double force_bound(double f_max, const TimestepParams& p);
/// Whether a step of n base steps passes every criterion for the mode.
bool step_allowed(int n, double v_max, double f_max, const TimestepParams& p);

/// Largest n in 1..max_region passing every criterion, else 1.
int block_timestep(double v_max, double f_max, const TimestepParams& p);

/// Per-block region field over an occupied-block grid.
using RegionField = std::vector<int>;

/// Single-pass smoothing: each block takes the minimum of its own region and
/// those of its occupied neighbours in the unsmoothed field. Blocks whose
/// region dropped are flagged in `lowered`.
void smooth_regions(const BlockGrid& grid, RegionField& region, std::vector<std::uint8_t>& lowered);

/// Every occupied block within Chebyshev distance `layers` of a region-1
/// (region-2) block of the input field takes region 1 (2) if that is smaller
/// than its own. Region 1 wins where both reach.
void expand_fast_regions(const BlockGrid& grid, RegionField& region, int layers = 4);

/// Observed blocks: occupied blocks next to an error block, or next to a block
/// with a strictly smaller region.
void derive_observed(const BlockGrid& grid, const RegionField& region,
                     const std::vector<std::uint8_t>& error_blocks,
                     std::vector<std::uint8_t>& observed);

/// Per-particle step bookkeeping shared by both solvers.
struct ParticleSteps {
  std::vector<std::uint8_t> region;   // n, step = n dt_base
  std::vector<std::int32_t> validity; // base (minor) steps left in the true step
  std::vector<std::uint8_t> compute;

  void resize(std::size_t n) {
    region.assign(n, 1);
    validity.assign(n, 0);
    compute.assign(n, 1);
  }
};

/// Base-step propagation: validity counts down; a particle recomputes when it
/// reaches zero or when its block's region differs from its own, and then
/// restarts its validity at the block's region.
void propagate_preemptive(const BlockGrid& grid, const RegionField& region, ParticleSteps& steps);

/// Validity a particle of region n gets at the start of (or within) a major
/// step of `minor_steps`: n for n <= 2, the whole major step otherwise.
int major_step_validity(int n, int minor_steps);

/// Major-step propagation: every particle takes its block's region and
/// recomputes now.
void propagate_major(const BlockGrid& grid, const RegionField& region, int minor_steps,
                     ParticleSteps& steps);

}  // namespace rts
