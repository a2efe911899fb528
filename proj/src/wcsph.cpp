#include "rts_sph/wcsph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rts_sph/errors.hpp"
#include "rts_sph/simd.hpp"
#include "timer.hpp"

namespace rts::wcsph {

double eos_pressure(double rho, double rest_density, double sound_speed) {
  const double b = rest_density * sound_speed * sound_speed / 7.0;
  const double ratio = rho / rest_density;
  const double r2 = ratio * ratio;
  const double r7 = r2 * r2 * r2 * ratio;
  return std::max(0.0, b * (r7 - 1.0));
}

void predictor_step(std::span<Vec3> x, std::span<Vec3> v, std::span<const Vec3> a, double dt) {
  simd::ops().taylor_predict(x.data(), v.data(), a.data(), x.size(), dt);
}

void corrector_step(Vec3& x, Vec3& v, Vec3& a_old, const Vec3& a_new, double& dt_true) {
  const Vec3 da = a_new - a_old;
  x += da * (dt_true * dt_true / 6.0);
  v += da * (dt_true / 2.0);
  a_old = a_new;
  dt_true = 0.0;
}

Vec3 compute_force(std::uint32_t i, std::span<const std::uint32_t> neighbors,
                   const ForceInputs& in, const KernelSet& k) {
  const simd::Ops& ops = simd::ops();
  const Vec3 p = ops.pressure_sum(in.pos[i], in.pressure_term[i], in.pos, in.pressure_term,
                                  in.fluid_count, neighbors.data(), neighbors.size(), k);
  const Vec3 visc = ops.viscosity_sum(in.pos[i], in.vel[i], in.pos, in.vel, in.rho,
                                      neighbors.data(), neighbors.size(), k);
  const double m2 = in.mass * in.mass;
  return p * (-m2) + visc * (m2 * in.viscosity) + in.gravity * in.mass;
}

double default_base_step(const Scene& scene) {
  return scene.dt_base.value_or(wcsph_default_base_step(scene));
}

Solver::Solver(const Scene& scene, Options options)
    : scene_(scene), options_(options), kernels_(scene.support_radius()) {
  mass_ = scene_.particle_mass();
  rho_ref_ = lattice_rest_density(scene_);
  dt_base_ = options_.dt_base.value_or(default_base_step(scene_));
  params_ = timestep_params(scene_, StepMode::wcsph, dt_base_, scene_.support_radius());

  ParticleSet seed = seed_particles(scene_);
  nf_ = seed.fluid.size();
  nb_ = seed.boundary.size();
  pos_ = seed.fluid;
  pos_.insert(pos_.end(), seed.boundary.begin(), seed.boundary.end());
  vel_.assign(nf_ + nb_, Vec3{});
  rho_.assign(nf_ + nb_, rho_ref_);
  pressure_.assign(nf_, 0.0);
  term_.assign(nf_, 0.0);
  force_.assign(nf_, Vec3{});
  a_old_.assign(nf_, Vec3{});
  a_new_.assign(nf_, Vec3{});
  dt_true_.assign(nf_, 0.0);
  nbr_.resize(nf_);
  steps_.resize(nf_);

  grid_ = BlockGrid(scene_.domain_min, scene_.support_radius());
  grid_.set_static(pos_.data() + nf_, nb_, static_cast<std::uint32_t>(nf_));
}

double Solver::baseline_step_size() const {
  double f_max = 0.0;
  for (const Vec3& f : force_) f_max = std::max(f_max, norm(f));
  return std::min({dt_base_, sound_speed_bound(params_), force_bound(f_max, params_)});
}

StepStats Solver::step() { return options_.regional ? regional_step() : baseline_step(); }

void Solver::build_neighbor_lists() {
  const std::int64_t nb = static_cast<std::int64_t>(grid_.size());
  const double h2 = kernels_.h2;
#pragma omp parallel
  {
    CandidateSet cand;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t b = 0; b < nb; ++b) {
      const auto members = grid_.members(static_cast<std::size_t>(b));
      if (std::none_of(members.begin(), members.end(),
                       [&](std::uint32_t i) { return steps_.compute[i] != 0; })) {
        continue;
      }
      cand.ids.clear();
      grid_.candidates(static_cast<std::size_t>(b), 1, cand.ids);
      cand.gather(pos_.data());
      for (std::uint32_t i : members) {
        if (steps_.compute[i]) cand.select(pos_[i], h2, nbr_[i]);
      }
    }
  }
}

void Solver::evaluate() {
  const simd::Ops& ops = simd::ops();
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  bool bad = false;
#pragma omp parallel for schedule(static) reduction(|| : bad)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!steps_.compute[i]) continue;
    const auto& list = nbr_[i];
    const double rho = mass_ * ops.density_sum(pos_[i], pos_.data(), list.data(), list.size(), kernels_);
    if (!(std::isfinite(rho) && rho > 0.0)) bad = true;
    rho_[i] = rho;
    pressure_[i] = eos_pressure(rho, rho_ref_, scene_.sound_speed);
    term_[i] = pressure_[i] / (rho * rho);
  }
  if (bad) throw NumericalAbort("non-finite or non-positive density");

  ForceInputs in;
  in.pos = pos_.data();
  in.vel = vel_.data();
  in.rho = rho_.data();
  in.pressure_term = term_.data();
  in.fluid_count = static_cast<std::uint32_t>(nf_);
  in.mass = mass_;
  in.viscosity = scene_.viscosity;
  in.gravity = scene_.gravity;
  const double inv_mass = 1.0 / mass_;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!steps_.compute[i]) continue;
    force_[i] = compute_force(static_cast<std::uint32_t>(i), nbr_[i], in, kernels_);
    a_new_[i] = force_[i] * inv_mass;
  }
}

void Solver::integrate(double dt) {
  const std::int64_t n = static_cast<std::int64_t>(nf_);
  const bool correct = options_.correction;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!steps_.compute[i]) continue;
    if (correct) {
      corrector_step(pos_[i], vel_[i], a_old_[i], a_new_[i], dt_true_[i]);
    } else {
      a_old_[i] = a_new_[i];
      dt_true_[i] = 0.0;
    }
  }

  simd::ops().taylor_predict(pos_.data(), vel_.data(), a_old_.data(), nf_, dt);

  const Vec3 lo = scene_.domain_min;
  const Vec3 hi = scene_.domain_max;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    dt_true_[i] += dt;
    for (int a = 0; a < 3; ++a) {
      if (pos_[i][a] < lo[a]) {
        pos_[i][a] = lo[a];
        vel_[i][a] = std::max(vel_[i][a], 0.0);
      } else if (pos_[i][a] > hi[a]) {
        pos_[i][a] = hi[a];
        vel_[i][a] = std::min(vel_[i][a], 0.0);
      }
    }
  }
}

StepStats Solver::regional_step() {
  StepStats st;
  {
    ScopedTimer t(st.t_neighbor);
    grid_.rebuild(pos_.data(), nf_, scene_.domain_min, scene_.domain_max);
  }
  {
    ScopedTimer t(st.t_rts);
    if (options_.pinned_region > 0) {
      region_.assign(grid_.size(), options_.pinned_region);
      lowered_.assign(grid_.size(), 0);
    } else {
      grid_.reduce_maxima(vel_.data(), force_.data());
      region_.resize(grid_.size());
      const std::int64_t nb = static_cast<std::int64_t>(grid_.size());
#pragma omp parallel for schedule(static)
      for (std::int64_t b = 0; b < nb; ++b) {
        region_[b] = block_timestep(grid_.v_max[b], grid_.f_max[b], params_);
      }
      smooth_regions(grid_, region_, lowered_);
    }
    propagate_preemptive(grid_, region_, steps_);
  }
  std::int64_t active = 0;
  for (std::uint8_t c : steps_.compute) active += c;
  {
    ScopedTimer t(st.t_neighbor);
    build_neighbor_lists();
  }
  {
    ScopedTimer t(st.t_physics);
    evaluate();
    integrate(dt_base_);
  }
  time_ += dt_base_;
  st.time = time_;
  st.dt = dt_base_;
  st.neighbor_searches = active;
  st.compute_fraction = nf_ ? static_cast<double>(active) / static_cast<double>(nf_) : 0.0;
  return st;
}

StepStats Solver::baseline_step() {
  StepStats st;
  {
    ScopedTimer t(st.t_neighbor);
    grid_.rebuild(pos_.data(), nf_, scene_.domain_min, scene_.domain_max);
    std::fill(steps_.compute.begin(), steps_.compute.end(), 1);
    build_neighbor_lists();
  }
  double dt = 0.0;
  {
    ScopedTimer t(st.t_physics);
    evaluate();
    dt = baseline_step_size();
    integrate(dt);
  }
  time_ += dt;
  st.time = time_;
  st.dt = dt;
  st.neighbor_searches = static_cast<std::int64_t>(nf_);
  st.compute_fraction = 1.0;
  return st;
}

}  // namespace rts::wcsph
