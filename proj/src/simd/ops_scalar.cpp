#include <cmath>

#include "ops_impl.hpp"

namespace rts::simd::detail {

namespace {

double density_sum(const Vec3& xi, const Vec3* pos, const std::uint32_t* nbr, std::size_t count,
                   const KernelSet& k) {
  double sum = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const Vec3& xj = pos[nbr[n]];
    const double dx = xi.x - xj.x;
    const double dy = xi.y - xj.y;
    const double dz = xi.z - xj.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 < k.h2) {
      const double t = k.h2 - r2;
      sum += t * t * t;
    }
  }
  return k.poly6 * sum;
}

Vec3 pressure_sum(const Vec3& xi, double term_i, const Vec3* pos, const double* term,
                  std::uint32_t mirror_begin, const std::uint32_t* nbr, std::size_t count,
                  const KernelSet& k) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint32_t j = nbr[n];
    const Vec3& xj = pos[j];
    const double dx = xi.x - xj.x;
    const double dy = xi.y - xj.y;
    const double dz = xi.z - xj.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 >= k.h2 || r2 == 0.0) continue;
    const double r = std::sqrt(r2);
    const double t = k.h - r;
    const double tj = j >= mirror_begin ? term_i : term[j];
    const double f = k.spiky_grad * t * t / r * (term_i + tj);
    sx += f * dx;
    sy += f * dy;
    sz += f * dz;
  }
  return {sx, sy, sz};
}

Vec3 viscosity_sum(const Vec3& xi, const Vec3& vi, const Vec3* pos, const Vec3* vel,
                   const double* rho, const std::uint32_t* nbr, std::size_t count,
                   const KernelSet& k) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint32_t j = nbr[n];
    const Vec3& xj = pos[j];
    const double dx = xi.x - xj.x;
    const double dy = xi.y - xj.y;
    const double dz = xi.z - xj.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 >= k.h2 || r2 == 0.0) continue;
    const double r = std::sqrt(r2);
    const double c = k.visc_lap * (k.h - r) / rho[j];
    sx += c * (vel[j].x - vi.x);
    sy += c * (vel[j].y - vi.y);
    sz += c * (vel[j].z - vi.z);
  }
  return {sx, sy, sz};
}

void taylor_predict(Vec3* x, Vec3* v, const Vec3* a, std::size_t n, double dt) {
  if (n == 0) return;
  double* xf = &x[0].x;
  double* vf = &v[0].x;
  const double* af = &a[0].x;
  const double half_dt2 = 0.5 * dt * dt;
  for (std::size_t e = 0; e < 3 * n; ++e) {
    xf[e] = xf[e] + vf[e] * dt + af[e] * half_dt2;
    vf[e] = vf[e] + af[e] * dt;
  }
}

void kick_drift(Vec3* x_out, Vec3* v_out, const Vec3* x, const Vec3* v, const Vec3* f_ext,
                const Vec3* f_p, std::size_t n, double inv_mass, double dt) {
  if (n == 0) return;
  double* xo = &x_out[0].x;
  double* vo = &v_out[0].x;
  const double* xf = &x[0].x;
  const double* vf = &v[0].x;
  const double* fe = &f_ext[0].x;
  const double* fp = &f_p[0].x;
  for (std::size_t e = 0; e < 3 * n; ++e) {
    const double vn = vf[e] + dt * ((fe[e] + fp[e]) * inv_mass);
    vo[e] = vn;
    xo[e] = xf[e] + dt * vn;
  }
}

std::size_t select_within(const Vec3& x, const double* cx, const double* cy, const double* cz,
                          const std::uint32_t* ids, std::size_t count, double r2,
                          std::uint32_t* out) {
  std::size_t m = 0;
  for (std::size_t c = 0; c < count; ++c) {
    const double dx = cx[c] - x.x;
    const double dy = cy[c] - x.y;
    const double dz = cz[c] - x.z;
    if (dx * dx + dy * dy + dz * dz < r2) out[m++] = ids[c];
  }
  return m;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops table{density_sum,    pressure_sum, viscosity_sum,
                         taylor_predict, kick_drift,   select_within};
  return table;
}

}  // namespace rts::simd::detail
