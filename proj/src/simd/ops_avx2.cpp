// Compiled with -mavx2 (no FMA) so element-wise sweeps round exactly like the
// scalar reference. Only the neighbour sums reassociate (four lane partials).

#include <immintrin.h>

#include <cmath>

#include "ops_impl.hpp"

namespace rts::simd::detail {

namespace {

inline __m128i load_indices(const std::uint32_t* p) {
  return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

struct Offsets {
  __m256d dx, dy, dz, r2;
};

inline Offsets offsets(const Vec3& xi, const double* base, __m128i idx3) {
  const __m256d xj = _mm256_i32gather_pd(base, idx3, 8);
  const __m256d yj = _mm256_i32gather_pd(base + 1, idx3, 8);
  const __m256d zj = _mm256_i32gather_pd(base + 2, idx3, 8);
  Offsets o;
  o.dx = _mm256_sub_pd(_mm256_set1_pd(xi.x), xj);
  o.dy = _mm256_sub_pd(_mm256_set1_pd(xi.y), yj);
  o.dz = _mm256_sub_pd(_mm256_set1_pd(xi.z), zj);
  o.r2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(o.dx, o.dx), _mm256_mul_pd(o.dy, o.dy)),
                       _mm256_mul_pd(o.dz, o.dz));
  return o;
}

inline __m128i times3(__m128i idx) { return _mm_add_epi32(_mm_add_epi32(idx, idx), idx); }

double density_sum(const Vec3& xi, const Vec3* pos, const std::uint32_t* nbr, std::size_t count,
                   const KernelSet& k) {
  const double* base = &pos[0].x;
  const __m256d h2 = _mm256_set1_pd(k.h2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const Offsets o = offsets(xi, base, times3(load_indices(nbr + n)));
    const __m256d inside = _mm256_cmp_pd(o.r2, h2, _CMP_LT_OQ);
    const __m256d t = _mm256_sub_pd(h2, o.r2);
    const __m256d w = _mm256_mul_pd(_mm256_mul_pd(t, t), t);
    acc = _mm256_add_pd(acc, _mm256_and_pd(w, inside));
  }
  double sum = hsum(acc);
  for (; n < count; ++n) {
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
  const double* base = &pos[0].x;
  const __m256d h2 = _mm256_set1_pd(k.h2);
  const __m256d h = _mm256_set1_pd(k.h);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d grad = _mm256_set1_pd(k.spiky_grad);
  const __m256d ti = _mm256_set1_pd(term_i);
  const __m128i mirror = _mm_set1_epi32(static_cast<int>(mirror_begin));
  __m256d sx = zero, sy = zero, sz = zero;
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const __m128i idx = load_indices(nbr + n);
    const Offsets o = offsets(xi, base, times3(idx));
    const __m256d valid = _mm256_and_pd(_mm256_cmp_pd(o.r2, h2, _CMP_LT_OQ),
                                        _mm256_cmp_pd(o.r2, zero, _CMP_NEQ_OQ));
    const __m256d fluid_lanes =
        _mm256_castsi256_pd(_mm256_cvtepi32_epi64(_mm_cmpgt_epi32(mirror, idx)));
    const __m256d tj = _mm256_mask_i32gather_pd(ti, term, idx, fluid_lanes, 8);
    const __m256d r = _mm256_sqrt_pd(o.r2);
    const __m256d t = _mm256_sub_pd(h, r);
    __m256d f = _mm256_div_pd(_mm256_mul_pd(_mm256_mul_pd(grad, t), t), r);
    f = _mm256_mul_pd(f, _mm256_add_pd(ti, tj));
    f = _mm256_and_pd(f, valid);
    sx = _mm256_add_pd(sx, _mm256_mul_pd(f, o.dx));
    sy = _mm256_add_pd(sy, _mm256_mul_pd(f, o.dy));
    sz = _mm256_add_pd(sz, _mm256_mul_pd(f, o.dz));
  }
  Vec3 out{hsum(sx), hsum(sy), hsum(sz)};
  for (; n < count; ++n) {
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
    out.x += f * dx;
    out.y += f * dy;
    out.z += f * dz;
  }
  return out;
}

Vec3 viscosity_sum(const Vec3& xi, const Vec3& vi, const Vec3* pos, const Vec3* vel,
                   const double* rho, const std::uint32_t* nbr, std::size_t count,
                   const KernelSet& k) {
  const double* base = &pos[0].x;
  const double* vbase = &vel[0].x;
  const __m256d h2 = _mm256_set1_pd(k.h2);
  const __m256d h = _mm256_set1_pd(k.h);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d lap = _mm256_set1_pd(k.visc_lap);
  const __m256d vix = _mm256_set1_pd(vi.x);
  const __m256d viy = _mm256_set1_pd(vi.y);
  const __m256d viz = _mm256_set1_pd(vi.z);
  __m256d sx = zero, sy = zero, sz = zero;
  std::size_t n = 0;
  for (; n + 4 <= count; n += 4) {
    const __m128i idx = load_indices(nbr + n);
    const __m128i idx3 = times3(idx);
    const Offsets o = offsets(xi, base, idx3);
    const __m256d valid = _mm256_and_pd(_mm256_cmp_pd(o.r2, h2, _CMP_LT_OQ),
                                        _mm256_cmp_pd(o.r2, zero, _CMP_NEQ_OQ));
    const __m256d r = _mm256_sqrt_pd(o.r2);
    const __m256d rho_j = _mm256_i32gather_pd(rho, idx, 8);
    __m256d c = _mm256_div_pd(_mm256_mul_pd(lap, _mm256_sub_pd(h, r)), rho_j);
    c = _mm256_and_pd(c, valid);
    const __m256d vx = _mm256_i32gather_pd(vbase, idx3, 8);
    const __m256d vy = _mm256_i32gather_pd(vbase + 1, idx3, 8);
    const __m256d vz = _mm256_i32gather_pd(vbase + 2, idx3, 8);
    sx = _mm256_add_pd(sx, _mm256_mul_pd(c, _mm256_sub_pd(vx, vix)));
    sy = _mm256_add_pd(sy, _mm256_mul_pd(c, _mm256_sub_pd(vy, viy)));
    sz = _mm256_add_pd(sz, _mm256_mul_pd(c, _mm256_sub_pd(vz, viz)));
  }
  Vec3 out{hsum(sx), hsum(sy), hsum(sz)};
  for (; n < count; ++n) {
    const std::uint32_t j = nbr[n];
    const Vec3& xj = pos[j];
    const double dx = xi.x - xj.x;
    const double dy = xi.y - xj.y;
    const double dz = xi.z - xj.z;
    const double r2 = dx * dx + dy * dy + dz * dz;
    if (r2 >= k.h2 || r2 == 0.0) continue;
    const double r = std::sqrt(r2);
    const double c = k.visc_lap * (k.h - r) / rho[j];
    out.x += c * (vel[j].x - vi.x);
    out.y += c * (vel[j].y - vi.y);
    out.z += c * (vel[j].z - vi.z);
  }
  return out;
}

void taylor_predict(Vec3* x, Vec3* v, const Vec3* a, std::size_t n, double dt) {
  if (n == 0) return;
  double* xf = &x[0].x;
  double* vf = &v[0].x;
  const double* af = &a[0].x;
  const double half_dt2 = 0.5 * dt * dt;
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vh = _mm256_set1_pd(half_dt2);
  const std::size_t total = 3 * n;
  std::size_t e = 0;
  for (; e + 4 <= total; e += 4) {
    const __m256d xv = _mm256_loadu_pd(xf + e);
    const __m256d vv = _mm256_loadu_pd(vf + e);
    const __m256d av = _mm256_loadu_pd(af + e);
    const __m256d xn = _mm256_add_pd(_mm256_add_pd(xv, _mm256_mul_pd(vv, vdt)),
                                     _mm256_mul_pd(av, vh));
    _mm256_storeu_pd(xf + e, xn);
    _mm256_storeu_pd(vf + e, _mm256_add_pd(vv, _mm256_mul_pd(av, vdt)));
  }
  for (; e < total; ++e) {
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
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vim = _mm256_set1_pd(inv_mass);
  const std::size_t total = 3 * n;
  std::size_t e = 0;
  for (; e + 4 <= total; e += 4) {
    const __m256d force = _mm256_add_pd(_mm256_loadu_pd(fe + e), _mm256_loadu_pd(fp + e));
    const __m256d vn =
        _mm256_add_pd(_mm256_loadu_pd(vf + e), _mm256_mul_pd(vdt, _mm256_mul_pd(force, vim)));
    _mm256_storeu_pd(vo + e, vn);
    _mm256_storeu_pd(xo + e, _mm256_add_pd(_mm256_loadu_pd(xf + e), _mm256_mul_pd(vdt, vn)));
  }
  for (; e < total; ++e) {
    const double vn = vf[e] + dt * ((fe[e] + fp[e]) * inv_mass);
    vo[e] = vn;
    xo[e] = xf[e] + dt * vn;
  }
}

std::size_t select_within(const Vec3& x, const double* cx, const double* cy, const double* cz,
                          const std::uint32_t* ids, std::size_t count, double r2,
                          std::uint32_t* out) {
  const __m256d px = _mm256_set1_pd(x.x);
  const __m256d py = _mm256_set1_pd(x.y);
  const __m256d pz = _mm256_set1_pd(x.z);
  const __m256d limit = _mm256_set1_pd(r2);
  std::size_t m = 0;
  std::size_t c = 0;
  for (; c + 4 <= count; c += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(cx + c), px);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(cy + c), py);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(cz + c), pz);
    const __m256d d2 = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                     _mm256_mul_pd(dz, dz));
    unsigned mask = static_cast<unsigned>(_mm256_movemask_pd(_mm256_cmp_pd(d2, limit, _CMP_LT_OQ)));
    while (mask) {
      out[m++] = ids[c + static_cast<unsigned>(__builtin_ctz(mask))];
      mask &= mask - 1;
    }
  }
  for (; c < count; ++c) {
    const double dx = cx[c] - x.x;
    const double dy = cy[c] - x.y;
    const double dz = cz[c] - x.z;
    if (dx * dx + dy * dy + dz * dz < r2) out[m++] = ids[c];
  }
  return m;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops table{density_sum,    pressure_sum, viscosity_sum,
                         taylor_predict, kick_drift,   select_within};
  return table;
}

}  // namespace rts::simd::detail
