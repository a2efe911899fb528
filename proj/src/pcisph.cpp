#include "rts_sph/pcisph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rts_sph/audit.hpp"
#include "rts_sph/errors.hpp"
#include "rts_sph/simd.hpp"
#include "timer.hpp"

namespace rts::pcisph {

double pci_delta(double spacing, double support, double mass, double rest_density, double dt) {
  const KernelSet k(support);
  const int reach = static_cast<int>(std::ceil(k.h / spacing));
  double sum = 0.0;
  for (int c = -reach; c <= reach; ++c) {
    for (int b = -reach; b <= reach; ++b) {
      for (int a = -reach; a <= reach; ++a) {
        sum += norm2(k.grad_pressure(Vec3(a * spacing, b * spacing, c * spacing)));
      }
    }
  }
  const double q = dt * mass / rest_density;
  const double beta = 2.0 * q * q;
  return 1.0 / (beta * sum);
}

double pci_delta(const Scene& scene, double dt) {
  return pci_delta(scene.spacing, scene.support_radius(), scene.particle_mass(),
                   scene.rest_density, dt);
}

double adapt_step(const AdaptiveInput& in) {
  const double cfl = in.dt * in.v_max / in.r;
  const bool force_ok = !(in.f_max > 0.0) || in.dt <= in.lambda_f * std::sqrt(in.r * in.mass / in.f_max);
  if (cfl > 0.4 || !force_ok || in.iterations > 6) return in.dt * 0.8;
  if (in.iterations <= 3) return in.dt * 1.002;
  return in.dt;
}

void PressureSnapshot::take(std::span<const double> p, std::span<const Vec3> f_p) {
  p_.assign(p.begin(), p.end());
  f_p_.assign(f_p.begin(), f_p.end());
}

void PressureSnapshot::restore(std::span<double> p, std::span<Vec3> f_p, std::span<double> term,
                               double rho_ref) {
  std::copy(p_.begin(), p_.end(), p.begin());
  std::copy(f_p_.begin(), f_p_.end(), f_p.begin());
  const double inv_rho2 = 1.0 / (rho_ref * rho_ref);
  for (std::size_t i = 0; i < p_.size(); ++i) term[i] = p_[i] * inv_rho2;
  p_.clear();
  f_p_.clear();
}

void MajorStepController::end_major(bool terminated_early) {
  if (terminated_early) {
    current_ = std::min(2, full_);
    recovery_ = recovery_steps_;
    return;
  }
  if (recovery_ > 0 && --recovery_ == 0) current_ = full_;
}

Solver::Solver(const Scene& scene, Options options)
    : scene_(scene),
      options_(options),
      kernels_(scene.support_radius()),
      schedule_(CorrectionSchedule::standard()),
      controller_(scene.minor_steps) {
  mass_ = scene_.particle_mass();
  rho_ref_ = lattice_rest_density(scene_);
  switch (options_.mode) {
    case Mode::constant:
    case Mode::adaptive:
      dt_ = options_.dt.value_or(pcisph_constant_step(scene_));
      break;
    case Mode::regional:
      dt_ = options_.dt.value_or(pcisph_default_base_step(scene_));
      break;
  }
  delta_ = pci_delta(scene_, dt_);
  const double block = options_.mode == Mode::regional
                           ? options_.block_spacings * scene_.spacing
                           : scene_.support_radius();
  params_ = timestep_params(scene_, StepMode::pcisph, dt_, block);
  if (scene_.minor_steps > schedule_.minor_steps() ||
      scene_.minor_steps > schedule_.regions()) {
    throw ValidationError("minor_steps above " + std::to_string(schedule_.minor_steps()) +
                          " has no correction schedule");
  }

  ParticleSet seed = seed_particles(scene_);
  nf_ = seed.fluid.size();
  nb_ = seed.boundary.size();
  pos_ = seed.fluid;
  pos_.insert(pos_.end(), seed.boundary.begin(), seed.boundary.end());
  vel_.assign(nf_ + nb_, Vec3{});
  star_ = pos_;
  vstar_.assign(nf_, Vec3{});
  rho_.assign(nf_ + nb_, rho_ref_);
  err_.assign(nf_, 0.0);
  p_.assign(nf_, 0.0);
  term_.assign(nf_, 0.0);
  f_ext_.assign(nf_, Vec3{});
  f_p_.assign(nf_, Vec3{});
  nbr_.resize(nf_);
  steps_.resize(nf_);
  in_e_.assign(nf_, 0);
  in_ob_.assign(nf_, 0);
  turn_.assign(nf_, 1);
  active_.assign(nf_, 1);
  forced_.assign(nf_, 1);

  grid_ = BlockGrid(scene_.domain_min, block);
  grid_.set_static(pos_.data() + nf_, nb_, static_cast<std::uint32_t>(nf_));
}

void Solver::set_state(std::span<const Vec3> x, std::span<const Vec3> v) {
  std::copy(x.begin(), x.end(), pos_.begin());
  std::copy(v.begin(), v.end(), vel_.begin());
}

StepStats Solver::step() {
  return options_.mode == Mode::regional ? major_step() : baseline_step();
}

// ---------------------------------------------------------------------------
// Shared building blocks. A null mask means every fluid particle.

void Solver::refresh_lists(const std::uint8_t* mask, int layers_r1, double radius) {
  const std::int64_t nb = static_cast<std::int64_t>(grid_.size());
  const double r2 = radius * radius;
#pragma omp parallel
  {
    CandidateSet cand[2];
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t b = 0; b < nb; ++b) {
      bool built[2] = {false, false};
      for (std::uint32_t i : grid_.members(static_cast<std::size_t>(b))) {
        if (mask && !mask[i]) continue;
        const int wide = (steps_.region[i] == 1 && layers_r1 > 1) ? 1 : 0;
        if (!built[wide]) {
          cand[wide].ids.clear();
          grid_.candidates(static_cast<std::size_t>(b), wide ? layers_r1 : 1, cand[wide].ids);
          cand[wide].gather(pos_.data());
          built[wide] = true;
        }
        cand[wide].select(pos_[i], r2, nbr_[i]);
      }
    }
  }
}

void Solver::external_forces(const std::uint8_t* mask) {
  const simd::Ops& ops = simd::ops();
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  const double visc = mass_ * mass_ * scene_.viscosity;
  const Vec3 weight = scene_.gravity * mass_;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask && !mask[i]) continue;
    const auto& list = nbr_[i];
    const Vec3 v = ops.viscosity_sum(pos_[i], vel_[i], pos_.data(), vel_.data(), rho_.data(),
                                     list.data(), list.size(), kernels_);
    f_ext_[i] = v * visc + weight;
  }
}

void Solver::predict() {
  simd::ops().kick_drift(star_.data(), vstar_.data(), pos_.data(), vel_.data(), f_ext_.data(),
                         f_p_.data(), nf_, 1.0 / mass_, dt_);
  const Vec3 lo = scene_.domain_min;
  const Vec3 hi = scene_.domain_max;
  const std::int64_t n = static_cast<std::int64_t>(nf_);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      if (star_[i][a] < lo[a]) {
        star_[i][a] = lo[a];
        vstar_[i][a] = std::max(vstar_[i][a], 0.0);
      } else if (star_[i][a] > hi[a]) {
        star_[i][a] = hi[a];
        vstar_[i][a] = std::min(vstar_[i][a], 0.0);
      }
    }
  }
}

std::int64_t Solver::densities(const std::uint8_t* mask) {
  const simd::Ops& ops = simd::ops();
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  std::int64_t count = 0;
  bool bad = false;
#pragma omp parallel for schedule(static) reduction(+ : count) reduction(|| : bad)
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask && !mask[i]) continue;
    const auto& list = nbr_[i];
    const double rho = mass_ * ops.density_sum(star_[i], star_.data(), list.data(), list.size(), kernels_);
    if (!std::isfinite(rho)) bad = true;
    rho_[i] = rho;
    err_[i] = (rho - rho_ref_) / rho_ref_;
    ++count;
  }
  if (bad) {
    for (std::size_t i = 0; i < nf_; ++i) {
      if (!std::isfinite(rho_[i])) {
        std::ostringstream msg;
        msg << "non-finite density at particle " << i << " (block " << grid_.owner(static_cast<std::uint32_t>(i))
            << ")";
        throw NumericalAbort(msg.str());
      }
    }
  }
  return count;
}

Solver::Metric Solver::metric() const {
  Metric m;
  double sum = 0.0;
  for (std::size_t i = 0; i < nf_; ++i) {
    const double e = std::max(0.0, err_[i]);
    m.max = std::max(m.max, e);
    sum += e;
  }
  m.avg = nf_ ? sum / static_cast<double>(nf_) : 0.0;
  return m;
}

bool Solver::converged(const Metric& m) const {
  return m.max < scene_.eta_max && m.avg < scene_.eta_avg;
}

void Solver::update_pressures(const std::uint8_t* mask) {
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  const double inv_rho2 = 1.0 / (rho_ref_ * rho_ref_);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask && !mask[i]) continue;
    p_[i] = std::max(0.0, p_[i] + delta_ * (rho_[i] - rho_ref_));
    term_[i] = p_[i] * inv_rho2;
  }
}

void Solver::pressure_forces(const std::uint8_t* mask) {
  const simd::Ops& ops = simd::ops();
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  const double m2 = mass_ * mass_;
  const std::uint32_t mirror = static_cast<std::uint32_t>(nf_);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (mask && !mask[i]) continue;
    const auto& list = nbr_[i];
    f_p_[i] = ops.pressure_sum(pos_[i], term_[i], pos_.data(), term_.data(), mirror, list.data(),
                               list.size(), kernels_) *
              (-m2);
  }
}

void Solver::finish_step() {
  std::copy(star_.begin(), star_.begin() + static_cast<std::ptrdiff_t>(nf_), pos_.begin());
  std::copy(vstar_.begin(), vstar_.end(), vel_.begin());
}

// ---------------------------------------------------------------------------
// Synchronous baselines

StepStats Solver::baseline_step() {
  StepStats st;
  {
    ScopedTimer t(st.t_neighbor);
    grid_.rebuild(pos_.data(), nf_, scene_.domain_min, scene_.domain_max);
    refresh_lists(nullptr, 1, kernels_.h);
  }
  int iterations = 0;
  Metric m;
  {
    ScopedTimer t(st.t_physics);
    external_forces(nullptr);
    std::fill(p_.begin(), p_.end(), 0.0);
    std::fill(term_.begin(), term_.end(), 0.0);
    std::fill(f_p_.begin(), f_p_.end(), Vec3{});
    for (;;) {
      predict();
      st.density_evaluations += densities(nullptr);
      m = metric();
      if (iterations >= options_.min_iterations && converged(m)) break;
      if (iterations >= options_.max_global_iterations) {
        throw NumericalAbort("correction did not converge within " +
                             std::to_string(options_.max_global_iterations) + " iterations");
      }
      update_pressures(nullptr);
      pressure_forces(nullptr);
      ++iterations;
    }
    finish_step();
  }
  const double dt = dt_;
  time_ += dt;
  st.time = time_;
  st.dt = dt;
  st.iterations = iterations;
  st.iterations_per_region[1] = iterations;
  st.max_global_iterations = iterations;
  st.neighbor_searches = static_cast<std::int64_t>(nf_);
  st.compute_fraction = 1.0;
  st.max_density_error = m.max;
  st.avg_density_error = m.avg;

  if (options_.mode == Mode::adaptive) {
    ScopedTimer t(st.t_physics);
    AdaptiveInput in;
    in.dt = dt_;
    in.iterations = iterations;
    in.r = kernels_.h;
    in.mass = mass_;
    in.lambda_f = scene_.lambda_f;
    for (std::size_t i = 0; i < nf_; ++i) {
      in.v_max = std::max(in.v_max, norm(vel_[i]));
      in.f_max = std::max(in.f_max, norm(f_ext_[i] + f_p_[i]));
    }
    const double next = adapt_step(in);
    if (next != dt_) {
      dt_ = next;
      delta_ = pci_delta(scene_, dt_);
    }
  }
  return st;
}

// ---------------------------------------------------------------------------
// Regional time stepping

void Solver::rebuild_error_sets() {
  const double threshold = 0.5 * scene_.eta_max;
  error_blocks_.assign(grid_.size(), 0);
  for (std::size_t i = 0; i < nf_; ++i) {
    in_e_[i] = err_[i] > threshold;
    if (in_e_[i]) error_blocks_[grid_.owner(static_cast<std::uint32_t>(i))] = 1;
  }
  derive_observed(grid_, region_, error_blocks_, observed_);
  for (std::size_t i = 0; i < nf_; ++i) in_ob_[i] = observed_[grid_.owner(static_cast<std::uint32_t>(i))];
}

StepStats Solver::major_step() {
  StepStats st;
  const int minors = controller_.minor_steps();
  {
    ScopedTimer t(st.t_neighbor);
    grid_.rebuild(pos_.data(), nf_, scene_.domain_min, scene_.domain_max);
  }
  {
    ScopedTimer t(st.t_rts);
    const std::size_t nb = grid_.size();
    if (options_.pinned_region > 0) {
      region_.assign(nb, options_.pinned_region);
    } else {
      std::vector<Vec3> total(nf_);
      for (std::size_t i = 0; i < nf_; ++i) total[i] = f_ext_[i] + f_p_[i];
      grid_.reduce_maxima(vel_.data(), total.data());
      region_.resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        region_[b] = block_timestep(grid_.v_max[b], grid_.f_max[b], params_);
      }
      smooth_regions(grid_, region_, lowered_);
      expand_fast_regions(grid_, region_, options_.expansion_layers);
    }
    rebuild_error_sets();
    propagate_major(grid_, region_, minors, steps_);
  }

  int done = 0;
  for (int j = 0; j < minors; ++j) {
    minor_step(j, minors, st);
    ++done;
    if (st.early_termination) break;
  }
  {
    ScopedTimer t(st.t_rts);
    controller_.end_major(st.early_termination);
  }
  st.time = time_;
  st.dt = done * dt_;
  st.minor_steps = done;
  st.compute_fraction /= done;
  return st;
}

void Solver::minor_step(int j, int minors, StepStats& st) {
  std::int64_t refreshed = 0;
  for (std::uint8_t c : steps_.compute) refreshed += c;
  {
    ScopedTimer t(st.t_neighbor);
    refresh_lists(steps_.compute.data(), 2, options_.list_spacings * scene_.spacing);
  }
  st.neighbor_searches += refreshed;
  st.compute_fraction += nf_ ? static_cast<double>(refreshed) / static_cast<double>(nf_) : 0.0;

  {
    ScopedTimer t(st.t_physics);
    external_forces(steps_.compute.data());
    std::fill(p_.begin(), p_.end(), 0.0);
    std::fill(term_.begin(), term_.end(), 0.0);
    std::fill(f_p_.begin(), f_p_.end(), Vec3{});
  }

  const int rows = schedule_.rows();
  const double threshold = 0.5 * scene_.eta_max;
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  trace_ = CorrectionTrace{};

  enum class Kind { scheduled, local };
  bool local_failed = false;
  int local_left = 0;
  PressureSnapshot snapshot;
  int iterations = 0;
  Metric m{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

  for (;;) {
    Kind kind = Kind::scheduled;
    int row = 0;
    {
      ScopedTimer t(st.t_rts);
      if (iterations < rows) {
        row = iterations;
      } else {
        if (local_left > 0) {
          kind = Kind::local;
        } else if (!snapshot.empty()) {
          // Local phase used its budget without converging.
          snapshot.restore(p_, f_p_, term_, rho_ref_);
          local_failed = true;
          trace_.local_reverted = true;
        } else if (!local_failed && m.avg * 100.0 < scene_.rho_T &&
                   std::any_of(in_e_.begin(), in_e_.end(), [](std::uint8_t e) { return e != 0; })) {
          kind = Kind::local;
          local_left = options_.local_budget;
          snapshot.take(p_, f_p_);
        }
        if (kind == Kind::scheduled) row = trace_.global_iterations % rows;
      }

      if (kind == Kind::scheduled) {
        ++trace_.global_iterations;
        if (trace_.global_iterations > options_.max_global_iterations) {
          throw NumericalAbort("minor step exceeded " +
                               std::to_string(options_.max_global_iterations) +
                               " global correction iterations");
        }
        if (trace_.global_iterations > options_.early_termination_iterations) {
          st.early_termination = true;
        }
        for (int r = 1; r <= schedule_.regions(); ++r) {
          if (schedule_.turn(j, row, r)) ++st.iterations_per_region[r];
        }
      } else {
        --local_left;
        ++trace_.local_iterations;
      }
#pragma omp parallel for schedule(static)
      for (std::int64_t i = 0; i < n; ++i) {
        turn_[i] = kind == Kind::scheduled && schedule_.turn(j, row, steps_.region[i]);
        forced_[i] = turn_[i] | in_e_[i];
        active_[i] = forced_[i] | in_ob_[i];
      }
    }

    {
      ScopedTimer t(st.t_physics);
      predict();
      st.density_evaluations += densities(active_.data());
      m = metric();
    }
    if (iterations >= options_.min_iterations && converged(m)) {
      trace_.converged = true;
      break;
    }

    {
      ScopedTimer t(st.t_physics);
      update_pressures(active_.data());
    }
    {
      ScopedTimer t(st.t_rts);
      bool outside = false;
      for (std::size_t i = 0; i < nf_ && !outside; ++i) {
        outside = err_[i] > threshold && !forced_[i];
      }
      if (outside) {
        rebuild_error_sets();
        for (std::size_t i = 0; i < nf_; ++i) forced_[i] = turn_[i] | in_e_[i];
      }
    }
    {
      ScopedTimer t(st.t_physics);
      pressure_forces(forced_.data());
    }
    ++iterations;
  }

  {
    ScopedTimer t(st.t_physics);
    finish_step();
  }
  time_ += dt_;
  st.iterations += iterations;
  st.max_global_iterations = std::max(st.max_global_iterations, trace_.global_iterations);
  st.max_density_error = std::max(st.max_density_error, m.max);
  st.avg_density_error = std::max(st.avg_density_error, m.avg);

  {
    ScopedTimer t(st.t_rts);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      if (--steps_.validity[i] <= 0) {
        steps_.compute[i] = 1;
        steps_.validity[i] = major_step_validity(steps_.region[i], minors);
      } else {
        steps_.compute[i] = 0;
      }
    }
    if (options_.pinned_region == 0) mark_fast_blocks(minors);
  }

  if (options_.audit) {
    ScopedTimer t(st.t_audit);
    NeighborAudit audit(pos_.data(), nf_ + nb_, kernels_.h);
    st.missing_neighbors += audit.count_missing(nf_, nbr_);
    const auto e = audit.density_error(nf_, mass_, rho_ref_);
    st.audited_max_density_error = std::max(st.audited_max_density_error, e.max);
    st.audited_avg_density_error = std::max(st.audited_avg_density_error, e.avg);
  }
}

void Solver::mark_fast_blocks(int minors) {
  const std::size_t nb = grid_.size();
  std::vector<int> need(nb, std::numeric_limits<int>::max());
  bool any = false;
  for (std::size_t i = 0; i < nf_; ++i) {
    const int n = steps_.region[i];
    if (n == 1) continue;
    const double f = norm(f_ext_[i] + f_p_[i]);
    if (step_allowed(n, norm(vel_[i]), f, params_)) continue;
    const int req = block_timestep(norm(vel_[i]), f, params_);
    const std::uint32_t b = grid_.owner(static_cast<std::uint32_t>(i));
    need[b] = std::min(need[b], req);
    any = true;
  }
  if (!any) return;

  std::vector<std::uint8_t> changed(nb, 0);
  for (std::size_t b = 0; b < nb; ++b) {
    if (need[b] == std::numeric_limits<int>::max()) continue;
    for (std::uint32_t a : grid_.adjacent(b)) {
      if (need[b] < region_[a]) {
        region_[a] = need[b];
        changed[a] = 1;
      }
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    if (!changed[b]) continue;
    for (std::uint32_t i : grid_.members(b)) {
      if (region_[b] < steps_.region[i]) {
        steps_.region[i] = static_cast<std::uint8_t>(region_[b]);
        steps_.compute[i] = 1;
        steps_.validity[i] = major_step_validity(region_[b], minors);
      }
    }
  }
  derive_observed(grid_, region_, error_blocks_, observed_);
  for (std::size_t i = 0; i < nf_; ++i) in_ob_[i] = observed_[grid_.owner(static_cast<std::uint32_t>(i))];
}

}  // namespace rts::pcisph
