#include "rts_sph/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rts_sph/frame_io.hpp"
#include "rts_sph/pcisph.hpp"
#include "rts_sph/wcsph.hpp"

namespace rts {

namespace {

constexpr std::pair<SolverKind, std::string_view> kNames[] = {
    {SolverKind::wcsph, "wcsph"},
    {SolverKind::wcsph_rts, "wcsph-rts"},
    {SolverKind::pcisph_const, "pcisph-const"},
    {SolverKind::pcisph_adaptive, "pcisph-adaptive"},
    {SolverKind::pcisph_rts, "pcisph-rts"},
};

}  // namespace

std::optional<SolverKind> parse_solver(std::string_view name) {
  for (const auto& [kind, n] : kNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

std::string_view solver_name(SolverKind kind) {
  for (const auto& [k, n] : kNames) {
    if (k == kind) return n;
  }
  return "?";
}

bool is_regional(SolverKind kind) {
  return kind == SolverKind::wcsph_rts || kind == SolverKind::pcisph_rts;
}

std::unique_ptr<Simulation> make_simulation(const RunConfig& c) {
  switch (c.solver) {
    case SolverKind::wcsph:
    case SolverKind::wcsph_rts: {
      wcsph::Options o;
      o.regional = c.solver == SolverKind::wcsph_rts;
      o.correction = c.correction;
      o.pinned_region = c.pinned_region;
      return std::make_unique<wcsph::Solver>(c.scene, o);
    }
    case SolverKind::pcisph_const:
    case SolverKind::pcisph_adaptive:
    case SolverKind::pcisph_rts: {
      pcisph::Options o;
      o.mode = c.solver == SolverKind::pcisph_const      ? pcisph::Mode::constant
               : c.solver == SolverKind::pcisph_adaptive ? pcisph::Mode::adaptive
                                                         : pcisph::Mode::regional;
      o.pinned_region = c.pinned_region;
      o.audit = c.audit;
      if (c.max_iterations > 0) o.max_global_iterations = c.max_iterations;
      return std::make_unique<pcisph::Solver>(c.scene, o);
    }
  }
  throw std::invalid_argument("unknown solver");
}

namespace {

class StatsWriter {
 public:
  StatsWriter(const std::filesystem::path& file, const RunConfig& c, std::size_t particles)
      : out_(file), regions_(c.scene.minor_steps) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    out_ << "# solver=" << solver_name(c.solver) << "\n";
    out_ << "# scene_hash=" << std::hex << scene_hash(c.scene) << std::dec << "\n";
    out_ << "# particles=" << particles << "\n";
    out_ << "# frames=" << (c.frames_dir ? std::filesystem::absolute(*c.frames_dir).string() : "")
         << "\n";
    out_ << "# fps=" << c.fps << "\n";
    out_ << std::setprecision(17) << "# diagonal=" << c.scene.domain_diagonal() << "\n";
    out_ << "time,dt,minor_steps,t_neighbor,t_physics,t_rts,t_audit,t_step,compute_fraction";
    for (int r = 1; r <= regions_; ++r) out_ << ",iter_r" << r;
    out_ << ",iterations,density_evaluations,neighbor_searches,early_termination,"
            "max_global_iterations,missing_neighbors,max_density_error,avg_density_error\n";
  }

  void row(const StepStats& s) {
    out_ << s.time << ',' << s.dt << ',' << s.minor_steps << ',' << s.t_neighbor << ','
         << s.t_physics << ',' << s.t_rts << ',' << s.t_audit << ',' << s.wall() << ','
         << s.compute_fraction;
    for (int r = 1; r <= regions_; ++r) out_ << ',' << s.iterations_per_region[r];
    out_ << ',' << s.iterations << ',' << s.density_evaluations << ',' << s.neighbor_searches
         << ',' << (s.early_termination ? 1 : 0) << ',' << s.max_global_iterations << ','
         << s.missing_neighbors << ',' << s.max_density_error << ',' << s.avg_density_error
         << '\n';
  }

 private:
  std::ofstream out_;
  int regions_;
};

}  // namespace

RunSummary run(const RunConfig& c) {
  auto sim = make_simulation(c);
  RunSummary sum;
  std::optional<StatsWriter> stats;
  if (c.stats_file) stats.emplace(*c.stats_file, c, sim->positions().size());
  if (c.frames_dir) std::filesystem::create_directories(*c.frames_dir);

  auto export_frame = [&](int k) {
    sum.frame_com.push_back(center_of_mass(sim->positions()));
    if (c.frames_dir) {
      write_frame(*c.frames_dir / frame_file_name(static_cast<std::uint32_t>(k)),
                  static_cast<std::uint32_t>(k), sim->time(), sim->positions(), sim->regions());
      ++sum.frames_written;
    }
    if (c.on_frame) c.on_frame(*sim, k);
  };

  if (c.duration <= 0.0) {
    export_frame(0);
    return sum;
  }
  sum.frame_com.push_back(center_of_mass(sim->positions()));
  if (c.on_frame) c.on_frame(*sim, 0);

  double fraction_sum = 0.0;
  auto advance_to = [&](double until) {
    while (sim->time() < until - 1e-9) {
      const StepStats s = sim->step();
      ++sum.steps;
      sum.t_neighbor += s.t_neighbor;
      sum.t_physics += s.t_physics;
      sum.t_rts += s.t_rts;
      sum.t_audit += s.t_audit;
      sum.iterations += s.iterations;
      sum.density_evaluations += s.density_evaluations;
      sum.neighbor_searches += s.neighbor_searches;
      sum.missing_neighbors += s.missing_neighbors;
      sum.early_terminations += s.early_termination ? 1 : 0;
      sum.max_global_iterations = std::max(sum.max_global_iterations, s.max_global_iterations);
      sum.max_density_error = std::max(sum.max_density_error, s.max_density_error);
      sum.max_avg_density_error = std::max(sum.max_avg_density_error, s.avg_density_error);
      sum.audited_max_density_error =
          std::max(sum.audited_max_density_error, s.audited_max_density_error);
      sum.audited_avg_density_error =
          std::max(sum.audited_avg_density_error, s.audited_avg_density_error);
      fraction_sum += s.compute_fraction;
      if (stats) stats->row(s);
      if (c.on_step) c.on_step(*sim, s);
    }
  };

  const int frames = static_cast<int>(std::floor(c.duration * c.fps + 1e-9));
  for (int k = 1; k <= frames; ++k) {
    advance_to(static_cast<double>(k) / c.fps);
    export_frame(k);
  }
  advance_to(c.duration);
  sum.simulated = sim->time();
  sum.mean_compute_fraction = sum.steps ? fraction_sum / static_cast<double>(sum.steps) : 0.0;
  return sum;
}

void print_summary(std::ostream& out, const RunConfig& c, const RunSummary& s) {
  const double wall = s.wall();
  auto pct = [&](double t) { return wall > 0.0 ? 100.0 * t / wall : 0.0; };
  out << std::fixed << std::setprecision(3);
  out << "solver            " << solver_name(c.solver) << "\n";
  out << "simulated         " << s.simulated << " s in " << s.steps << " steps\n";
  out << "wall time         " << wall << " s\n";
  out << "mean iterations   " << (s.steps ? static_cast<double>(s.iterations) / s.steps : 0.0)
      << " per step\n";
  out << std::setprecision(1);
  out << "neighbor          " << pct(s.t_neighbor) << " %\n";
  out << "physics           " << pct(s.t_physics) << " %\n";
  out << "regional overhead " << pct(s.t_rts) << " %\n";
  if (c.audit) out << "missed neighbors  " << s.missing_neighbors << "\n";
  out << "frames written    " << s.frames_written << "\n";
}

namespace {

struct StatsFile {
  std::map<std::string, std::string> header;
  double wall = 0.0;
  double iterations = 0.0;
  double work = 0.0;
};

StatsFile read_stats(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  StatsFile out;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) out.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (columns.empty()) {
      columns = cells;
      continue;
    }
    for (std::size_t i = 0; i < cells.size() && i < columns.size(); ++i) {
      if (columns[i] == "t_step") out.wall += std::stod(cells[i]);
      if (columns[i] == "iterations") out.iterations += std::stod(cells[i]);
      if (columns[i] == "density_evaluations") out.work += std::stod(cells[i]);
    }
  }
  if (columns.empty()) throw std::runtime_error(file.string() + " has no stats table");
  return out;
}

}  // namespace

CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b) {
  const StatsFile sa = read_stats(a);
  const StatsFile sb = read_stats(b);
  if (sa.header.at("scene_hash") != sb.header.at("scene_hash")) {
    throw std::runtime_error("runs simulate different scenes (scene hash mismatch)");
  }
  CompareReport r;
  r.speedup = sb.wall > 0.0 ? sa.wall / sb.wall : 0.0;
  r.iteration_ratio = sa.iterations > 0.0 ? sb.iterations / sa.iterations : 0.0;
  r.work_ratio = sa.work > 0.0 ? sb.work / sa.work : 0.0;
  r.max_com_deviation = -1.0;

  const std::string da = sa.header.count("frames") ? sa.header.at("frames") : "";
  const std::string db = sb.header.count("frames") ? sb.header.at("frames") : "";
  if (da.empty() || db.empty()) return r;
  const double diagonal = std::stod(sa.header.at("diagonal"));
  r.max_com_deviation = 0.0;
  for (std::uint32_t k = 0;; ++k) {
    const auto fa = std::filesystem::path(da) / frame_file_name(k);
    const auto fb = std::filesystem::path(db) / frame_file_name(k);
    if (!std::filesystem::exists(fa) || !std::filesystem::exists(fb)) {
      if (k == 0) continue;
      break;
    }
    const double d = norm(center_of_mass(read_frame(fa)) - center_of_mass(read_frame(fb)));
    r.max_com_deviation = std::max(r.max_com_deviation, d / diagonal);
    ++r.frames_compared;
  }
  return r;
}

}  // namespace rts
