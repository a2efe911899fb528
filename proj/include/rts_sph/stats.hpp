#pragma once

#include <array>
#include <cstdint>

namespace rts {

inline constexpr int kMaxRegions = 8;

/// Counters for one call of a solver's step (a base step, a baseline step or
/// a whole major step).
struct StepStats {
  double time = 0.0;  // simulated time at the end of the call, s
  double dt = 0.0;    // simulated time covered, s
  int minor_steps = 1;

  // Wall-clock seconds per phase. Audit time is not part of the other three.
  double t_neighbor = 0.0;
  double t_physics = 0.0;
  double t_rts = 0.0;
  double t_audit = 0.0;

  /// Correction iterations in which region r (index r) was scheduled.
  std::array<std::int64_t, kMaxRegions + 1> iterations_per_region{};
  /// Correction iterations (pressure updates), summed over minor steps.
  std::int64_t iterations = 0;
  /// Particle density evaluations: the correction work measure.
  std::int64_t density_evaluations = 0;
  /// Particles whose neighbour list was rebuilt.
  std::int64_t neighbor_searches = 0;
  /// Mean fraction of fluid particles doing a full evaluation per base step.
  double compute_fraction = 0.0;

  bool early_termination = false;
  int max_global_iterations = 0;

  /// True neighbours missing from the lists used (audit runs only, else 0).
  std::int64_t missing_neighbors = 0;

  /// Worst end-of-step compression error over the call, fraction of rest density.
  double max_density_error = 0.0;
  double avg_density_error = 0.0;

  /// Same, recomputed from exact neighbour sums at the final positions
  /// (audit runs only, else 0).
  double audited_max_density_error = 0.0;
  double audited_avg_density_error = 0.0;

  double wall() const { return t_neighbor + t_physics + t_rts; }
};

}  // namespace rts
