// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [criterion ...] [--strict]
//
// Without arguments every criterion runs. The exit status is 0 unless
// --strict is given and a criterion fails (1), or a run aborts (2).

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rts_sph/audit.hpp"
#include "rts_sph/bench.hpp"
#include "rts_sph/block_grid.hpp"
#include "rts_sph/kernels.hpp"
#include "rts_sph/region.hpp"
#include "rts_sph/scene.hpp"
#include "rts_sph/schedule.hpp"
#include "rts_sph/wcsph.hpp"

using rts::Vec3;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

void note(const std::string& s) { std::cerr << "  " << s << std::endl; }

// ---------------------------------------------------------------------------
// Shared simulation runs, computed on first use.

struct Run {
  rts::RunSummary summary;
  std::vector<rts::StepStats> steps;
  std::vector<double> variance;  // per frame, when requested
};

/// Mean over fluid particles of the variance of the densities in their
/// neighbourhood, densities from exact sums including static particles.
double neighbourhood_variance(const rts::Simulation& sim, const std::vector<Vec3>& statics) {
  const rts::Scene& s = sim.scene();
  const std::size_t nf = sim.positions().size();
  std::vector<Vec3> all(sim.positions().begin(), sim.positions().end());
  all.insert(all.end(), statics.begin(), statics.end());
  const rts::KernelSet k(s.support_radius());
  const rts::NeighborAudit audit(all.data(), all.size(), k.h);
  const double m = s.particle_mass();
  const double rho0 = rts::lattice_rest_density(s);

  std::vector<std::vector<std::uint32_t>> nbr(nf);
  std::vector<double> rho(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    audit.neighbors(static_cast<std::uint32_t>(i), nbr[i]);
    double sum = 0.0;
    for (std::uint32_t j : nbr[i]) sum += k.w_density(rts::norm(all[i] - all[j]));
    rho[i] = m * sum / rho0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < nf; ++i) {
    double mean = 0.0, sq = 0.0;
    int n = 0;
    for (std::uint32_t j : nbr[i]) {
      if (j >= nf) continue;
      mean += rho[j];
      sq += rho[j] * rho[j];
      ++n;
    }
    mean /= n;
    total += std::max(0.0, sq / n - mean * mean);
  }
  return total / static_cast<double>(nf);
}

constexpr int kIterationCap = 200;

struct RunKey {
  std::string scene;
  rts::SolverKind solver;
  double duration;
  bool correction;
  bool audit;
  double variance_until;
  auto operator<=>(const RunKey&) const = default;
};

std::map<RunKey, Run> g_runs;

const Run& simulate(const RunKey& key) {
  if (auto it = g_runs.find(key); it != g_runs.end()) return it->second;
  rts::RunConfig c;
  c.scene = rts::make_preset(key.scene);
  c.solver = key.solver;
  c.duration = key.duration;
  c.fps = 30;
  c.audit = key.audit;
  c.correction = key.correction;
  c.max_iterations = kIterationCap;
  Run run;
  std::vector<Vec3> statics;
  if (key.variance_until > 0.0) statics = rts::seed_particles(c.scene).boundary;
  c.on_step = [&](const rts::Simulation&, const rts::StepStats& st) { run.steps.push_back(st); };
  c.on_frame = [&](const rts::Simulation& sim, int frame) {
    if (frame > 0 && frame <= std::lround(key.variance_until * c.fps)) {
      run.variance.push_back(neighbourhood_variance(sim, statics));
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  run.summary = rts::run(c);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  note(fmt("ran %s %s for %.2f s%s%s: %.1f s wall (%.1f s solver), %lld steps", key.scene.c_str(),
           std::string(rts::solver_name(key.solver)).c_str(), key.duration,
           key.correction ? "" : " uncorrected", key.audit ? " audited" : "", secs,
           run.summary.wall(), static_cast<long long>(run.summary.steps)));
  return g_runs.emplace(key, std::move(run)).first->second;
}

constexpr double kCompareDuration = 2.0;  // dam break, consistency
constexpr double kSpeedDuration = 1.0;    // double dam break, speedups
constexpr double kOpening = 0.5;          // double dam break, correction necessity

const Run& dam(rts::SolverKind k) {
  return simulate({"dam_break", k, kCompareDuration, true, rts::is_regional(k) &&
                   k == rts::SolverKind::pcisph_rts, 0.0});
}
const Run& double_dam(rts::SolverKind k) {
  const bool wc_rts = k == rts::SolverKind::wcsph_rts;
  return simulate({"double_dam_break", k, kSpeedDuration, true, k == rts::SolverKind::pcisph_rts,
                   wc_rts ? kOpening : 0.0});
}

// ---------------------------------------------------------------------------
// Criteria

Verdict substep_exactness() {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto vec = [&](double s) { return Vec3{s * u(eng), s * u(eng), s * u(eng)}; };
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec3 x0 = vec(1.0), v0 = vec(3.0), a = vec(20.0);
    const double T = 1e-4 + 1e-2 * (0.5 + 0.5 * u(eng));
    for (int k = 1; k <= 4; ++k) {
      std::vector<Vec3> x{x0}, v{v0}, acc{a};
      double since = 0.0;
      for (int s = 0; s < k; ++s) {
        rts::wcsph::predictor_step(x, v, acc, T / k);
        since += T / k;
      }
      rts::wcsph::corrector_step(x[0], v[0], acc[0], a, since);
      const Vec3 xd = x0 + v0 * T + a * (T * T / 2);
      const Vec3 vd = v0 + a * T;
      worst = std::max({worst, rts::norm(x[0] - xd) / rts::norm(xd), rts::norm(v[0] - vd) / rts::norm(vd)});
    }
  }
  return {worst <= 1e-12, fmt("max relative deviation %.2e over 4000 cases (limit 1e-12)", worst)};
}

Verdict degenerate_equivalence() {
  const rts::Scene s = rts::make_preset("dam_break");
  rts::wcsph::Options sync;
  sync.regional = false;
  rts::wcsph::Options pin;
  pin.pinned_region = 1;
  rts::wcsph::Solver base(s, sync);
  rts::wcsph::Solver pinned(s, pin);
  bool same_dt = true;
  for (int i = 0; i < 50; ++i) {
    same_dt = same_dt && base.baseline_step_size() == base.base_step();
    base.step();
    pinned.step();
  }
  std::size_t differ = 0;
  for (std::size_t i = 0; i < base.fluid_count(); ++i) {
    if (!(base.positions()[i] == pinned.positions()[i]) || !(base.velocities()[i] == pinned.velocities()[i])) {
      ++differ;
    }
  }
  return {differ == 0 && same_dt && base.time() == pinned.time(),
          fmt("%zu of %zu particles differ after 50 steps of %zu-particle dam break%s", differ,
              base.fluid_count(), base.fluid_count(), same_dt ? "" : " (baseline step left the base step)")};
}

Verdict density_invariant() {
  const rts::Scene s = rts::make_preset("dam_break");
  const Run& r = dam(rts::SolverKind::pcisph_rts);
  double mx = 0.0, avg = 0.0;
  std::size_t bad = 0, majors = 0;
  double t_start = 0.0;
  for (const auto& st : r.steps) {
    if (t_start >= 1.0 - 1e-12) break;
    t_start = st.time;
    ++majors;
    mx = std::max(mx, st.max_density_error);
    avg = std::max(avg, st.avg_density_error);
    if (!(st.max_density_error < s.eta_max && st.avg_density_error < s.eta_avg)) ++bad;
  }
  return {bad == 0 && majors > 0,
          fmt("%zu-particle dam break, 1 s, %zu major steps: worst max %.3f %%, worst avg %.4f %% of rho0; %zu "
              "steps over (limits 1 %%, 0.1 %%)",
              rts::seed_particles(s).fluid.size(), majors, 100 * mx, 100 * avg, bad)};
}

Verdict schedule_legality() {
  const rts::CorrectionSchedule sch = rts::CorrectionSchedule::standard();
  const int N = sch.minor_steps();
  const int R = sch.regions();
  std::vector<std::string> broken;
  for (int j = 0; j < N; ++j) {
    for (int r = 1; r <= R; ++r) {
      if (sch.count(j, r) < 1) broken.push_back(fmt("minor %d region %d has no iteration", j, r));
    }
  }
  for (int r = 1; r <= R; ++r) {
    if (sch.count(0, r) < 2) broken.push_back(fmt("region %d below 2 on the first minor step", r));
  }
  for (int j = 0; j < N; ++j) {
    if (sch.count(j, 1) != 3) broken.push_back(fmt("region 1 not at 3 on minor %d", j));
  }
  if (R >= 2) {
    for (int j = 0; j < N; j += 2) {
      if (sch.count(j, 2) + sch.count((j + 1) % N, 2) != 3) broken.push_back(fmt("region 2 pair at %d", j));
    }
  }
  for (int r = 1; r <= R; ++r) {
    for (int start = 0; start < N; ++start) {
      int sum = 0;
      for (int w = 0; w < r; ++w) sum += sch.count((start + w) % N, r);
      if (sum < 3) broken.push_back(fmt("region %d window at %d has %d", r, start, sum));
    }
  }
  // Every row of the table must be reachable: the turn lookup agrees with counts.
  for (int j = 0; j < N; ++j) {
    for (int r = 1; r <= R; ++r) {
      int turns = 0;
      for (int row = 0; row < sch.rows(); ++row) turns += sch.turn(j, row, r);
      if (turns != sch.count(j, r)) broken.push_back(fmt("turn table of minor %d region %d", j, r));
    }
  }
  const auto reported = rts::schedule_violations(sch);
  return {broken.empty() && reported.empty(),
          fmt("%zu violations found by exhaustive check, %zu reported by the validator", broken.size(),
              reported.size())};
}

int chebyshev(const rts::BlockCoord& a, const rts::BlockCoord& b) {
  return std::max({std::abs(a.i - b.i), std::abs(a.j - b.j), std::abs(a.k - b.k)});
}

Verdict smoothing_property() {
  std::mt19937_64 eng(5);
  auto integer = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(eng); };
  int smooth_bad = 0, expand_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const int extent = integer(3, 10);
    const double fill = std::uniform_real_distribution<double>(0.1, 1.0)(eng);
    std::vector<rts::BlockCoord> coords;
    std::vector<Vec3> pts;
    for (int k = 0; k < extent; ++k)
      for (int j = 0; j < extent; ++j)
        for (int i = 0; i < extent; ++i)
          if (coin(fill)) {
            coords.push_back({i, j, k});
            pts.push_back({i + 0.5, j + 0.5, k + 0.5});
          }
    if (coords.empty()) {
      coords.push_back({0, 0, 0});
      pts.push_back({0.5, 0.5, 0.5});
    }
    rts::BlockGrid grid({0, 0, 0}, 1.0);
    grid.rebuild(pts.data(), pts.size(), {0, 0, 0}, {double(extent), double(extent), double(extent)});
    // Block order follows first occupation, which is point order here.
    std::vector<std::size_t> block_of(coords.size());
    for (std::size_t p = 0; p < coords.size(); ++p) block_of[p] = static_cast<std::size_t>(grid.find(coords[p]));

    rts::RegionField before(grid.size());
    for (auto& v : before) v = coin(0.1) ? integer(1, 2) : integer(1, 4);
    rts::RegionField smoothed = before;
    std::vector<std::uint8_t> lowered;
    rts::smooth_regions(grid, smoothed, lowered);
    rts::RegionField expanded = before;
    rts::expand_fast_regions(grid, expanded, 4);

    for (std::size_t p = 0; p < coords.size(); ++p) {
      int m = before[block_of[p]];
      int d = before[block_of[p]];
      for (std::size_t q = 0; q < coords.size(); ++q) {
        const int dist = chebyshev(coords[p], coords[q]);
        const int rq = before[block_of[q]];
        if (dist <= 1) m = std::min(m, rq);
        if (dist <= 4 && rq <= 2) d = std::min(d, rq);
      }
      smooth_bad += smoothed[block_of[p]] != m;
      expand_bad += expanded[block_of[p]] != d;
    }
  }
  return {smooth_bad == 0 && expand_bad == 0,
          fmt("1000 random fields: %d smoothing and %d expansion mismatches against the oracles", smooth_bad,
              expand_bad)};
}

Verdict pcisph_speedup() {
  const Run& c = double_dam(rts::SolverKind::pcisph_const);
  const Run& r = double_dam(rts::SolverKind::pcisph_rts);
  const double work = static_cast<double>(r.summary.density_evaluations) /
                      static_cast<double>(c.summary.density_evaluations);
  const double speedup = c.summary.wall() / r.summary.wall();
  return {work <= 0.6 && speedup >= 1.5,
          fmt("double dam break 1 s: work ratio %.3f (limit 0.6), wall %.1f s vs %.1f s, speedup %.2f (limit 1.5)",
              work, c.summary.wall(), r.summary.wall(), speedup)};
}

Verdict wcsph_speedup() {
  const Run& b = double_dam(rts::SolverKind::wcsph);
  const Run& r = double_dam(rts::SolverKind::wcsph_rts);
  const double ratio = r.summary.wall() / b.summary.wall();
  return {ratio <= 0.7, fmt("double dam break 1 s: wall %.1f s vs %.1f s, ratio %.3f (limit 0.7)",
                            r.summary.wall(), b.summary.wall(), ratio)};
}

double com_deviation(const Run& a, const Run& b, double diagonal) {
  double worst = 0.0;
  const std::size_t n = std::min(a.summary.frame_com.size(), b.summary.frame_com.size());
  for (std::size_t k = 0; k < n; ++k) {
    worst = std::max(worst, rts::norm(a.summary.frame_com[k] - b.summary.frame_com[k]) / diagonal);
  }
  return worst;
}

Verdict consistency() {
  const double diag = rts::make_preset("dam_break").domain_diagonal();
  const Run& wb = dam(rts::SolverKind::wcsph);
  const Run& wr = dam(rts::SolverKind::wcsph_rts);
  const Run& pb = dam(rts::SolverKind::pcisph_const);
  const Run& pr = dam(rts::SolverKind::pcisph_rts);
  const double dw = com_deviation(wb, wr, diag);
  const double dp = com_deviation(pb, pr, diag);
  const std::size_t frames = std::min(wb.summary.frame_com.size(), pb.summary.frame_com.size());
  return {dw < 0.02 && dp < 0.02 && frames == 61,
          fmt("dam break 2 s, %zu frames: WCSPH %.3f %%, PCISPH %.3f %% of the diagonal (limit 2 %%)", frames,
              100 * dw, 100 * dp)};
}

Verdict overhead() {
  struct Item {
    const char* name;
    const Run* run;
  };
  const Item items[] = {
      {"dam/wcsph-rts", &dam(rts::SolverKind::wcsph_rts)},
      {"dam/pcisph-rts", &dam(rts::SolverKind::pcisph_rts)},
      {"double/wcsph-rts", &double_dam(rts::SolverKind::wcsph_rts)},
      {"double/pcisph-rts", &double_dam(rts::SolverKind::pcisph_rts)},
  };
  bool ok = true;
  std::string detail = "regional phase share:";
  for (const Item& it : items) {
    const double share = it.run->summary.t_rts / it.run->summary.wall();
    ok = ok && share >= 0.05 && share <= 0.25;
    detail += fmt(" %s %.1f %%", it.name, 100 * share);
  }
  return {ok, detail + " (band 5-25 %)"};
}

Verdict correction_necessity() {
  const Run& corrected = double_dam(rts::SolverKind::wcsph_rts);
  const Run& uncorrected =
      simulate({"double_dam_break", rts::SolverKind::wcsph_rts, kOpening, false, false, kOpening});
  const std::size_t n = std::min(corrected.variance.size(), uncorrected.variance.size());
  std::size_t higher = 0;
  double mc = 0.0, mu = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    higher += uncorrected.variance[k] > corrected.variance[k];
    mc += corrected.variance[k] / n;
    mu += uncorrected.variance[k] / n;
  }
  return {n > 0 && higher == n,
          fmt("double dam break opening: uncorrected higher at %zu of %zu frames; mean variance %.3e vs %.3e", higher,
              n, mu, mc)};
}

Verdict neighbour_soundness() {
  const Run& a = dam(rts::SolverKind::pcisph_rts);
  const Run& b = double_dam(rts::SolverKind::pcisph_rts);
  auto worst_step = [](const Run& r) {
    std::int64_t w = 0;
    std::size_t with = 0;
    for (const auto& st : r.steps) {
      w = std::max(w, st.missing_neighbors);
      with += st.missing_neighbors > 0;
    }
    return std::pair{w, with};
  };
  const auto [wa, sa] = worst_step(a);
  const auto [wb, sb] = worst_step(b);
  const std::int64_t total = a.summary.missing_neighbors + b.summary.missing_neighbors;
  return {total == 0,
          fmt("missed true neighbours: dam break %lld (%zu of %zu major steps, worst %lld), double dam break %lld "
              "(%zu of %zu, worst %lld)",
              static_cast<long long>(a.summary.missing_neighbors), sa, a.steps.size(), static_cast<long long>(wa),
              static_cast<long long>(b.summary.missing_neighbors), sb, b.steps.size(), static_cast<long long>(wb))};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  bool strict = false;
  app.add_option("criteria", selected, "Criterion numbers to run (default: all)");
  app.add_flag("--strict", strict, "Exit with status 1 when a criterion fails");
  CLI11_PARSE(app, argc, argv);

  omp_set_dynamic(0);

  const std::vector<Criterion> all = {
      {1, "substep interpolation exactness", substep_exactness},
      {2, "degenerate equivalence", degenerate_equivalence},
      {3, "PCISPH density invariant", density_invariant},
      {4, "schedule legality", schedule_legality},
      {5, "region smoothing property", smoothing_property},
      {6, "desk-scale speedup, PCISPH", pcisph_speedup},
      {7, "desk-scale speedup, WCSPH", wcsph_speedup},
      {8, "consistency", consistency},
      {9, "overhead breakdown", overhead},
      {10, "correction necessity", correction_necessity},
      {11, "neighbour candidate soundness", neighbour_soundness},
  };
  const std::set<int> want(selected.begin(), selected.end());
  int failed = 0, ran = 0, aborted = 0;
  for (const Criterion& c : all) {
    if (!want.empty() && !want.count(c.id)) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("aborted: ") + e.what()};
      ++aborted;
    }
    ++ran;
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << v.detail << std::endl;
  }
  std::cout << (ran - failed) << "/" << ran << " criteria passed" << std::endl;
  if (aborted > 0) return 2;
  return strict && failed > 0 ? 1 : 0;
}
