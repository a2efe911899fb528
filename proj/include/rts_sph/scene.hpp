#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rts_sph/vec3.hpp"

namespace rts {

struct Box {
  Vec3 lo;
  Vec3 hi;
  friend bool operator==(const Box&, const Box&) = default;
};

/// Physical and algorithmic constants for one simulation, plus the initial
/// fluid layout. Immutable once loaded.
struct Scene {
  Vec3 domain_min{0.0, 0.0, 0.0};
  Vec3 domain_max{1.0, 1.0, 1.0};
  double spacing = 0.02;         // s, m
  double rest_density = 1000.0;  // rho0, kg/m^3
  double sound_speed = 30.0;     // c_s, m/s (WCSPH)
  double viscosity = 5.0e-4;     // nu, m^2/s
  Vec3 gravity{0.0, -9.81, 0.0};
  std::vector<Box> fluid_boxes;
  int boundary_layers = 2;  // 0 disables static boundary particles

  std::optional<double> dt_base;  // unset: per-solver default
  int minor_steps = 4;            // N, also the number of region levels

  double lambda_v = 0.4;
  double lambda_f = 0.25;
  std::optional<double> alpha;  // unset: 0.4 for WCSPH, 1.0 for PCISPH
  double eta_max = 0.01;        // fraction of rho0
  double eta_avg = 0.001;       // fraction of rho0
  double rho_T = 0.25;          // percent of rho0

  std::string preset;  // empty when the scene is fully explicit

  double particle_mass() const { return rest_density * spacing * spacing * spacing; }
  double support_radius() const { return 2.0 * spacing; }
  Vec3 domain_extent() const { return domain_max - domain_min; }
  double domain_diagonal() const { return norm(domain_extent()); }

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Velocity-partition threshold for region n: beta_1 is unbounded, then
/// 0.4 * 0.2^(n-2).
double region_beta(int n);

inline constexpr double kPcisphConstStep = 1.66e-4;  // standard PCISPH step
inline constexpr double kPcisphBaseStep = 3.5e-4;    // RTS PCISPH minor step

/// Base step for RTS WCSPH when the scene does not fix one: the largest step
/// for which region N still satisfies the sound-speed criterion.
double wcsph_default_base_step(const Scene& scene);
/// Minor step for RTS PCISPH when the scene does not fix one.
double pcisph_default_base_step(const Scene& scene);
/// Constant step of the PCISPH baseline, kept at the same ratio to the
/// minor step as the reference configuration (1.66e-4 vs 3.5e-4).
double pcisph_constant_step(const Scene& scene);

/// Names accepted by the `preset` key and by `--scene`.
const std::vector<std::string>& preset_names();
bool is_preset(std::string_view name);
/// Desk-scale scene for one of the preset names. Throws ValidationError.
Scene make_preset(std::string_view name);

/// Parses `key = value` configuration text. Throws ConfigError (with line)
/// or ValidationError.
Scene parse_scene(std::string_view text);
Scene load_scene(const std::filesystem::path& path);
/// Resolves a `--scene` argument: preset name or config file path.
Scene resolve_scene(const std::string& path_or_preset);

/// Throws ValidationError naming the first violated invariant.
void validate(const Scene& scene);

/// Serializes every field so that parse_scene(write_scene(s)) == s.
std::string write_scene(const Scene& scene);
/// FNV-1a over the canonical serialization.
std::uint64_t scene_hash(const Scene& scene);

struct ParticleSet {
  std::vector<Vec3> fluid;
  std::vector<Vec3> boundary;
};

/// Fluid on a lattice anchored at domain_min (centers at (k + 1/2) s), one
/// particle per lattice site covered by any fluid box. Boundary particles fill
/// `boundary_layers` lattice layers outside every wall.
ParticleSet seed_particles(const Scene& scene);

/// Density a particle sees in the interior of the seeded lattice. The solvers
/// measure compression against this value so the initial state is at rest.
double lattice_rest_density(const Scene& scene);

}  // namespace rts
