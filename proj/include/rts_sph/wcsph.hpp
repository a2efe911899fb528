#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rts_sph/block_grid.hpp"
#include "rts_sph/kernels.hpp"
#include "rts_sph/region.hpp"
#include "rts_sph/scene.hpp"
#include "rts_sph/simulation.hpp"
#include "rts_sph/stats.hpp"

namespace rts::wcsph {

/// Tait equation of state with exponent 7 and B = rho0 c^2 / 7, clamped at 0.
double eos_pressure(double rho, double rest_density, double sound_speed);
inline double eos_pressure(double rho, const Scene& scene) {
  return eos_pressure(rho, scene.rest_density, scene.sound_speed);
}

/// Constant-acceleration predictor for every particle.
void predictor_step(std::span<Vec3> x, std::span<Vec3> v, std::span<const Vec3> a, double dt);

/// End-of-true-step correction of one particle whose acceleration was just
/// re-evaluated; dt_true is the time since the previous evaluation.
/// x += da dt^2 / 6, v += da dt / 2, then a_old = a_new and dt_true = 0.
void corrector_step(Vec3& x, Vec3& v, Vec3& a_old, const Vec3& a_new, double& dt_true);

/// Read-only particle state seen by the force evaluation. Indices at or above
/// fluid_count are static boundary particles.
struct ForceInputs {
  const Vec3* pos = nullptr;
  const Vec3* vel = nullptr;
  const double* rho = nullptr;
  const double* pressure_term = nullptr;  // p / rho^2, fluid only
  std::uint32_t fluid_count = 0;
  double mass = 0.0;
  double viscosity = 0.0;
  Vec3 gravity{};
};

/// Symmetric pressure force + laminar viscosity + gravity on fluid particle i.
Vec3 compute_force(std::uint32_t i, std::span<const std::uint32_t> neighbors,
                   const ForceInputs& in, const KernelSet& k);

struct Options {
  bool regional = true;          // false: synchronous baseline
  bool correction = true;        // end-of-step corrector
  int pinned_region = 0;         // > 0 forces every block into this region
  std::optional<double> dt_base; // overrides the scene
};

/// Base step used when neither the options nor the scene fix one.
double default_base_step(const Scene& scene);

class Solver : public Simulation {
 public:
  Solver(const Scene& scene, Options options = {});

  StepStats step() override;
  double time() const override { return time_; }
  const Scene& scene() const override { return scene_; }
  std::span<const Vec3> positions() const override { return {pos_.data(), nf_}; }
  std::span<const Vec3> velocities() const override { return {vel_.data(), nf_}; }
  std::span<const std::uint8_t> regions() const override { return steps_.region; }

  std::span<const double> densities() const { return {rho_.data(), nf_}; }
  std::span<const double> pressures() const { return pressure_; }
  std::span<const Vec3> forces() const { return force_; }
  std::span<const std::uint8_t> compute_flags() const { return steps_.compute; }
  const BlockGrid& grid() const { return grid_; }
  double base_step() const { return dt_base_; }
  /// Density the pressure is measured against (rest density of the seed lattice).
  double reference_density() const { return rho_ref_; }
  std::size_t fluid_count() const { return nf_; }

  /// Step of the synchronous baseline for the current forces.
  double baseline_step_size() const;

 private:
  StepStats regional_step();
  StepStats baseline_step();
  void build_neighbor_lists();
  void evaluate();
  void integrate(double dt);

  Scene scene_;
  Options options_;
  KernelSet kernels_;
  TimestepParams params_;
  double mass_ = 0.0;
  double rho_ref_ = 0.0;
  double dt_base_ = 0.0;
  double time_ = 0.0;

  std::size_t nf_ = 0;
  std::size_t nb_ = 0;
  std::vector<Vec3> pos_;  // fluid then boundary
  std::vector<Vec3> vel_;
  std::vector<double> rho_;
  std::vector<double> pressure_;
  std::vector<double> term_;
  std::vector<Vec3> force_;
  std::vector<Vec3> a_old_;
  std::vector<Vec3> a_new_;
  std::vector<double> dt_true_;
  std::vector<std::vector<std::uint32_t>> nbr_;

  BlockGrid grid_;
  RegionField region_;
  std::vector<std::uint8_t> lowered_;
  ParticleSteps steps_;
};

}  // namespace rts::wcsph
