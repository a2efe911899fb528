#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rts_sph/scene.hpp"
#include "rts_sph/simulation.hpp"
#include "rts_sph/stats.hpp"

namespace rts {

enum class SolverKind { wcsph, wcsph_rts, pcisph_const, pcisph_adaptive, pcisph_rts };

std::optional<SolverKind> parse_solver(std::string_view name);
std::string_view solver_name(SolverKind kind);
bool is_regional(SolverKind kind);

struct RunConfig {
  Scene scene;
  SolverKind solver = SolverKind::pcisph_rts;
  double duration = 1.0;  // s
  int fps = 30;
  std::optional<std::filesystem::path> frames_dir;
  std::optional<std::filesystem::path> stats_file;
  bool audit = false;
  int pinned_region = 0;
  bool correction = true;  // WCSPH end-of-step corrector
  int max_iterations = 0;  // PCISPH correction cap per step; 0 keeps the solver default
  /// Called after each exported frame time is reached (frame 0 = initial state).
  std::function<void(const Simulation&, int frame)> on_frame;
  /// Called after every solver step.
  std::function<void(const Simulation&, const StepStats&)> on_step;
};

std::unique_ptr<Simulation> make_simulation(const RunConfig& config);

struct RunSummary {
  std::int64_t steps = 0;
  double simulated = 0.0;
  double t_neighbor = 0.0;
  double t_physics = 0.0;
  double t_rts = 0.0;
  double t_audit = 0.0;
  std::int64_t iterations = 0;
  std::int64_t density_evaluations = 0;
  std::int64_t neighbor_searches = 0;
  std::int64_t missing_neighbors = 0;
  std::int64_t early_terminations = 0;
  int max_global_iterations = 0;
  double max_density_error = 0.0;          // worst over steps
  double max_avg_density_error = 0.0;      // worst per-step average
  double audited_max_density_error = 0.0;
  double audited_avg_density_error = 0.0;
  double mean_compute_fraction = 0.0;
  int frames_written = 0;
  std::vector<Vec3> frame_com;  // index k: after reaching k / fps (k = 0 is the initial state)

  double wall() const { return t_neighbor + t_physics + t_rts; }
};

/// Runs the configured solver for the duration. Frames are due at k / fps for
/// k = 1..floor(duration * fps); with duration 0 only the initial state is
/// exported.
RunSummary run(const RunConfig& config);

/// Human-readable totals and phase breakdown.
void print_summary(std::ostream& out, const RunConfig& config, const RunSummary& summary);

struct CompareReport {
  double speedup = 0.0;          // wall(a) / wall(b)
  double iteration_ratio = 0.0;  // iterations(b) / iterations(a)
  double work_ratio = 0.0;       // density evaluations(b) / (a)
  double max_com_deviation = 0.0;  // fraction of the domain diagonal; -1 without frames
  int frames_compared = 0;
};

/// Compares two stats files written by run(). Throws std::runtime_error when
/// the scene hashes differ.
CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace rts
