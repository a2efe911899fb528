// Command-line driver: run a solver on a scene, or compare two runs.

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rts_sph/bench.hpp"
#include "rts_sph/errors.hpp"

namespace {

int run_command(const rts::RunConfig& config) {
  const rts::RunSummary summary = rts::run(config);
  rts::print_summary(std::cout, config, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regional time stepping for SPH liquids"};
  app.set_version_flag("--version", "rts_sph 1.0");

  std::string scene_arg;
  std::string solver_arg = "pcisph-rts";
  double duration = 1.0;
  int fps = 30;
  std::string out_dir = "frames";
  int threads = 0;
  bool deterministic = false;
  std::string stats_path;
  double dt_base = 0.0;
  int minor_steps = 0;
  bool frames_only = false;
  bool audit = false;
  int max_iterations = 0;

  app.add_option("--scene", scene_arg, "Scene file or preset name")->required();
  app.add_option("--solver", solver_arg, "wcsph, wcsph-rts, pcisph-const, pcisph-adaptive, pcisph-rts");
  app.add_option("--duration", duration, "Simulated seconds")->check(CLI::NonNegativeNumber);
  app.add_option("--fps", fps, "Exported frames per simulated second")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Frame directory");
  app.add_option("--threads", threads, "Worker threads (default: RTS_SPH_THREADS or all cores)");
  app.add_flag("--deterministic", deterministic, "Fixed static work partitioning");
  app.add_option("--stats", stats_path, "Per-step statistics CSV (default: <out>/stats.csv)");
  app.add_option("--dt-base", dt_base, "Base (minor) step override, s")->check(CLI::PositiveNumber);
  app.add_option("--minor-steps", minor_steps, "Minor steps per major step")->check(CLI::IsMember({2, 4}));
  app.add_flag("--frames-only", frames_only, "Write frames but no statistics file");
  app.add_option("--max-iterations", max_iterations, "PCISPH correction iterations before a step aborts (default 24)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--audit", audit, "Count neighbours missed by the regional solver's lists");

  std::string cmp_a;
  std::string cmp_b;
  CLI::App* compare = app.add_subcommand("compare", "Compare two stats files (reference first)");
  compare->add_option("reference", cmp_a, "Stats of the reference run")->required();
  compare->add_option("candidate", cmp_b, "Stats of the run being measured")->required();
  // The run flags do not apply to comparisons.
  app.require_subcommand(0, 1);

  try {
    if (argc > 1 && std::string(argv[1]) == "compare") {
      app.get_option("--scene")->required(false);
    }
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (compare->parsed()) {
      const rts::CompareReport r = rts::compare_runs(cmp_a, cmp_b);
      std::cout << "speedup          " << r.speedup << "\n";
      std::cout << "iteration ratio  " << r.iteration_ratio << "\n";
      std::cout << "work ratio       " << r.work_ratio << "\n";
      if (r.max_com_deviation >= 0.0) {
        std::cout << "max COM deviation " << r.max_com_deviation * 100.0 << " % of diagonal over "
                  << r.frames_compared << " frames\n";
      }
      return 0;
    }

    if (threads <= 0) {
      if (const char* env = std::getenv("RTS_SPH_THREADS")) threads = std::atoi(env);
    }
    if (threads > 0) omp_set_num_threads(threads);
    if (deterministic) omp_set_dynamic(0);

    const auto solver = rts::parse_solver(solver_arg);
    if (!solver) throw rts::ValidationError("unknown solver '" + solver_arg + "'");

    rts::RunConfig config;
    config.scene = rts::resolve_scene(scene_arg);
    if (dt_base > 0.0) config.scene.dt_base = dt_base;
    if (minor_steps > 0) config.scene.minor_steps = minor_steps;
    rts::validate(config.scene);
    config.solver = *solver;
    config.duration = duration;
    config.fps = fps;
    config.frames_dir = out_dir;
    config.audit = audit;
    config.max_iterations = max_iterations;
    if (!frames_only) {
      config.stats_file = stats_path.empty() ? std::filesystem::path(out_dir) / "stats.csv"
                                             : std::filesystem::path(stats_path);
      if (config.stats_file->has_parent_path()) {
        std::filesystem::create_directories(config.stats_file->parent_path());
      }
    }
    return run_command(config);
  } catch (const rts::NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
