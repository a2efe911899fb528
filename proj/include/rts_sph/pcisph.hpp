#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rts_sph/block_grid.hpp"
#include "rts_sph/kernels.hpp"
#include "rts_sph/region.hpp"
#include "rts_sph/scene.hpp"
#include "rts_sph/schedule.hpp"
#include "rts_sph/simulation.hpp"
#include "rts_sph/stats.hpp"

namespace rts::pcisph {

/// Pressure per unit density error for step dt: 1 / (beta sum |gradW|^2)
/// over a fully filled lattice neighbourhood at spacing s, with
/// beta = 2 (dt m / rho0)^2.
double pci_delta(const Scene& scene, double dt);
/// Same for an explicit particle mass and spacing.
double pci_delta(double spacing, double support, double mass, double rest_density, double dt);

/// Inputs of the adaptive-baseline step rule.
struct AdaptiveInput {
  double dt = 0.0;
  double v_max = 0.0;
  double f_max = 0.0;
  int iterations = 0;  // pressure updates the step needed
  double r = 0.0;      // support radius
  double mass = 0.0;
  double lambda_f = 0.25;
};

/// Next step of the adaptive baseline: shrink by 20% when the velocity CFL
/// number exceeds 0.4, the force bound is exceeded or the step needed more
/// than 6 iterations; grow by 0.2% when it converged in the minimum 3.
double adapt_step(const AdaptiveInput& in);

/// Length of the major step in minor steps: drops to 2 after an early
/// termination and returns to the full length after 10 calm major steps.
class MajorStepController {
 public:
  explicit MajorStepController(int full = 4, int recovery_steps = 10)
      : full_(full), current_(full), recovery_steps_(recovery_steps) {}

  int minor_steps() const { return current_; }
  int recovery() const { return recovery_; }
  void end_major(bool terminated_early);

 private:
  int full_;
  int current_;
  int recovery_steps_;
  int recovery_ = 0;
};

/// Pressures and pressure forces saved when a local correction phase starts,
/// restored exactly when the phase fails.
class PressureSnapshot {
 public:
  bool empty() const { return p_.empty(); }
  void take(std::span<const double> p, std::span<const Vec3> f_p);
  /// Writes the saved values back, recomputes term = p / rho_ref^2 and
  /// empties the snapshot.
  void restore(std::span<double> p, std::span<Vec3> f_p, std::span<double> term, double rho_ref);

 private:
  std::vector<double> p_;
  std::vector<Vec3> f_p_;
};

enum class Mode { constant, adaptive, regional };

struct Options {
  Mode mode = Mode::regional;
  /// Step for the constant baseline, start step for the adaptive one, minor
  /// step for the regional solver. Unset: derived from the scene.
  std::optional<double> dt;
  int pinned_region = 0;  // regional only: > 0 forces every block into this region
  bool audit = false;     // regional only: count missed neighbours, exact density error
  int min_iterations = 3;
  int max_global_iterations = 24;
  int early_termination_iterations = 6;
  int local_budget = 4;
  int expansion_layers = 4;
  double block_spacings = 2.2;  // regional grid block size, in particle spacings
  double list_spacings = 2.2;   // radius of the cached neighbour lists, in particle spacings
};

/// Trace of the extra-iteration logic of the last minor step, for tests.
struct CorrectionTrace {
  int global_iterations = 0;
  int local_iterations = 0;
  bool local_reverted = false;
  bool converged = false;
};

class Solver : public Simulation {
 public:
  Solver(const Scene& scene, Options options = {});

  StepStats step() override;
  double time() const override { return time_; }
  const Scene& scene() const override { return scene_; }
  std::span<const Vec3> positions() const override { return {pos_.data(), nf_}; }
  std::span<const Vec3> velocities() const override { return {vel_.data(), nf_}; }
  std::span<const std::uint8_t> regions() const override { return steps_.region; }

  std::span<const double> pressures() const { return p_; }
  std::span<const double> density_errors() const { return err_; }
  std::span<const std::uint8_t> error_set() const { return in_e_; }
  std::span<const std::uint8_t> observed_set() const { return in_ob_; }
  const BlockGrid& grid() const { return grid_; }
  const MajorStepController& controller() const { return controller_; }
  const CorrectionTrace& last_trace() const { return trace_; }
  double step_size() const { return dt_; }
  double delta() const { return delta_; }
  double reference_density() const { return rho_ref_; }
  std::size_t fluid_count() const { return nf_; }

  /// Test hook: overwrite fluid positions and velocities before the next step.
  void set_state(std::span<const Vec3> x, std::span<const Vec3> v);

 private:
  struct Metric {
    double max = 0.0;
    double avg = 0.0;
  };

  StepStats baseline_step();
  StepStats major_step();
  void minor_step(int j, int minors, StepStats& st);

  void refresh_lists(const std::uint8_t* mask, int layers_r1, double radius);
  void external_forces(const std::uint8_t* mask);
  void predict();
  std::int64_t densities(const std::uint8_t* mask);
  Metric metric() const;
  bool converged(const Metric& m) const;
  void update_pressures(const std::uint8_t* mask);
  void pressure_forces(const std::uint8_t* mask);
  void finish_step();
  void rebuild_error_sets();
  void mark_fast_blocks(int minors);

  Scene scene_;
  Options options_;
  KernelSet kernels_;
  TimestepParams params_;
  CorrectionSchedule schedule_;
  MajorStepController controller_;
  CorrectionTrace trace_;
  double mass_ = 0.0;
  double rho_ref_ = 0.0;
  double dt_ = 0.0;
  double delta_ = 0.0;
  double time_ = 0.0;

  std::size_t nf_ = 0;
  std::size_t nb_ = 0;
  std::vector<Vec3> pos_;   // fluid then boundary
  std::vector<Vec3> vel_;   // fluid then boundary (zero)
  std::vector<Vec3> star_;  // predicted positions, fluid then boundary
  std::vector<Vec3> vstar_;
  std::vector<double> rho_;  // last evaluated density, boundary at reference
  std::vector<double> err_;
  std::vector<double> p_;
  std::vector<double> term_;  // p / rho_ref^2
  std::vector<Vec3> f_ext_;
  std::vector<Vec3> f_p_;
  std::vector<std::vector<std::uint32_t>> nbr_;

  BlockGrid grid_;
  RegionField region_;
  std::vector<std::uint8_t> lowered_;
  std::vector<std::uint8_t> error_blocks_;
  std::vector<std::uint8_t> observed_;
  ParticleSteps steps_;
  std::vector<std::uint8_t> in_e_;
  std::vector<std::uint8_t> in_ob_;
  std::vector<std::uint8_t> turn_;
  std::vector<std::uint8_t> active_;  // density/pressure set
  std::vector<std::uint8_t> forced_;  // pressure-force set
};

}  // namespace rts::pcisph
