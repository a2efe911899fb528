#pragma once

#include <cstdint>
#include <span>

#include "rts_sph/scene.hpp"
#include "rts_sph/stats.hpp"
#include "rts_sph/vec3.hpp"

namespace rts {

/// What the bench driver needs from a solver.
class Simulation {
 public:
  virtual ~Simulation() = default;

  virtual StepStats step() = 0;
  virtual double time() const = 0;

  virtual const Scene& scene() const = 0;
  virtual std::span<const Vec3> positions() const = 0;
  virtual std::span<const Vec3> velocities() const = 0;
  /// Region per fluid particle (1 for synchronous solvers).
  virtual std::span<const std::uint8_t> regions() const = 0;
};

}  // namespace rts
