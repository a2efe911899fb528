#pragma once

#include <numbers>

#include "rts_sph/vec3.hpp"

namespace rts {

/// The classic animation-SPH kernel trio for one support radius h:
/// poly6 for density, the spiky gradient for pressure, and the viscosity
/// Laplacian. All three vanish at and beyond h.
struct KernelSet {
  double h = 0.0;
  double h2 = 0.0;
  double poly6 = 0.0;        // 315 / (64 pi h^9)
  double spiky = 0.0;        // 15 / (pi h^6), scalar spiky kernel
  double spiky_grad = 0.0;   // -45 / (pi h^6)
  double visc_lap = 0.0;     // 45 / (pi h^6)

  KernelSet() = default;
  explicit KernelSet(double support) : h(support), h2(support * support) {
    const double pi = std::numbers::pi;
    const double h6 = h2 * h2 * h2;
    poly6 = 315.0 / (64.0 * pi * h6 * h2 * h);
    spiky = 15.0 / (pi * h6);
    spiky_grad = -45.0 / (pi * h6);
    visc_lap = 45.0 / (pi * h6);
  }

  double w_density(double d) const {
    if (d >= h) return 0.0;
    const double t = h2 - d * d;
    return poly6 * t * t * t;
  }

  double w_density_r2(double r2) const {
    if (r2 >= h2) return 0.0;
    const double t = h2 - r2;
    return poly6 * t * t * t;
  }

  /// Scalar spiky kernel; its gradient is grad_pressure().
  double w_spiky(double d) const {
    if (d >= h) return 0.0;
    const double t = h - d;
    return spiky * t * t * t;
  }

  /// Gradient of the spiky kernel w.r.t. the first particle, offset = x_i - x_j.
  /// Points along -offset; zero at zero separation and beyond h. Exactly
  /// antisymmetric: grad(-o) == -grad(o) bit for bit.
  Vec3 grad_pressure(const Vec3& offset) const {
    const double r2 = norm2(offset);
    if (r2 >= h2 || r2 == 0.0) return {};
    const double r = std::sqrt(r2);
    const double t = h - r;
    const double f = spiky_grad * t * t / r;
    return {f * offset.x, f * offset.y, f * offset.z};
  }

  double laplacian_viscosity(double d) const {
    if (d >= h) return 0.0;
    return visc_lap * (h - d);
  }
};

inline double w_density(double distance, double h) { return KernelSet(h).w_density(distance); }

inline Vec3 grad_pressure_kernel(const Vec3& offset, double h) {
  return KernelSet(h).grad_pressure(offset);
}

inline double laplacian_viscosity(double distance, double h) {
  return KernelSet(h).laplacian_viscosity(distance);
}

}  // namespace rts
