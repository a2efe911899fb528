#pragma once

// Data-parallel inner loops of the solvers. Every operation has a scalar
// reference implementation and, where the CPU supports it, an AVX2 variant.
// The variant is chosen once at startup (overridable through the
// RTS_SPH_ISA environment variable or set_isa()).
//
// Neighbour lists are candidate supersets: every sum masks out pairs at or
// beyond the support radius, and pressure/viscosity sums also skip
// zero-separation pairs (the particle itself).

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "rts_sph/kernels.hpp"
#include "rts_sph/vec3.hpp"

namespace rts::simd {

enum class Isa { scalar, avx2 };

struct Ops {
  /// Sum of W_poly6(|xi - x_j|) over the listed j (mass not applied).
  double (*density_sum)(const Vec3& xi, const Vec3* pos, const std::uint32_t* nbr,
                        std::size_t count, const KernelSet& k);

  /// Sum of (term_i + term_j) * gradW_spiky(xi - x_j). Indices at or above
  /// `mirror_begin` take term_j = term_i (static boundary particles mirror
  /// the pressure of the particle they act on). `term` must be indexable
  /// for every listed j.
  Vec3 (*pressure_sum)(const Vec3& xi, double term_i, const Vec3* pos, const double* term,
                       std::uint32_t mirror_begin, const std::uint32_t* nbr, std::size_t count,
                       const KernelSet& k);

  /// Sum of (v_j - vi) / rho_j * lapW_visc(|xi - x_j|).
  Vec3 (*viscosity_sum)(const Vec3& xi, const Vec3& vi, const Vec3* pos, const Vec3* vel,
                        const double* rho, const std::uint32_t* nbr, std::size_t count,
                        const KernelSet& k);

  /// Constant-acceleration predictor over n particles:
  /// x += v dt + a dt^2 / 2, v += a dt.
  void (*taylor_predict)(Vec3* x, Vec3* v, const Vec3* a, std::size_t n, double dt);

  /// Semi-implicit Euler prediction over n particles:
  /// v_out = v + dt (f_ext + f_p) inv_mass, x_out = x + dt v_out.
  void (*kick_drift)(Vec3* x_out, Vec3* v_out, const Vec3* x, const Vec3* v, const Vec3* f_ext,
                     const Vec3* f_p, std::size_t n, double inv_mass, double dt);

  /// Writes to `out`, in order, the ids[c] with |(cx, cy, cz)[c] - x|^2 < r2
  /// and returns how many. `out` needs room for `count` entries.
  std::size_t (*select_within)(const Vec3& x, const double* cx, const double* cy,
                               const double* cz, const std::uint32_t* ids, std::size_t count,
                               double r2, std::uint32_t* out);
};

bool isa_supported(Isa isa);
const Ops& ops_for(Isa isa);

/// The dispatched table used by the solvers.
const Ops& ops();
Isa active_isa();
/// Throws std::invalid_argument when the ISA is not supported here.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa);

}  // namespace rts::simd
