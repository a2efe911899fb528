#include "rts_sph/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rts_sph/kernels.hpp"

namespace rts {

namespace {
int cell_of(double v, double h) { return static_cast<int>(std::floor(v / h)); }
}  // namespace

std::int64_t NeighborAudit::key(int i, int j, int k) const {
  constexpr std::int64_t span = 1 << 20;
  return ((static_cast<std::int64_t>(k) + span / 2) * span + (j + span / 2)) * span + (i + span / 2);
}

NeighborAudit::NeighborAudit(const Vec3* pos, std::size_t total, double h)
    : pos_(pos), total_(total), h_(h) {
  std::vector<std::pair<std::int64_t, std::uint32_t>> keyed(total);
  for (std::size_t p = 0; p < total; ++p) {
    keyed[p] = {key(cell_of(pos[p].x, h), cell_of(pos[p].y, h), cell_of(pos[p].z, h)),
                static_cast<std::uint32_t>(p)};
  }
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t p = 0; p < total; ++p) {
    if (cell_keys_.empty() || cell_keys_.back() != keyed[p].first) {
      cell_keys_.push_back(keyed[p].first);
      cell_off_.push_back(p);
    }
    cell_idx_.push_back(keyed[p].second);
  }
  cell_off_.push_back(total);
}

void NeighborAudit::neighbors(std::uint32_t i, std::vector<std::uint32_t>& out) const {
  const Vec3& x = pos_[i];
  const int ci = cell_of(x.x, h_), cj = cell_of(x.y, h_), ck = cell_of(x.z, h_);
  const double h2 = h_ * h_;
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const auto it = std::lower_bound(cell_keys_.begin(), cell_keys_.end(),
                                         key(ci + di, cj + dj, ck + dk));
        if (it == cell_keys_.end() || *it != key(ci + di, cj + dj, ck + dk)) continue;
        const std::size_t c = static_cast<std::size_t>(it - cell_keys_.begin());
        for (std::size_t q = cell_off_[c]; q < cell_off_[c + 1]; ++q) {
          const std::uint32_t j = cell_idx_[q];
          if (norm2(pos_[j] - x) < h2) out.push_back(j);
        }
      }
    }
  }
}

std::int64_t NeighborAudit::count_missing(
    std::size_t nf, const std::vector<std::vector<std::uint32_t>>& lists) const {
  std::int64_t missing = 0;
  const std::int64_t n = static_cast<std::int64_t>(nf);
#pragma omp parallel for schedule(static) reduction(+ : missing)
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> truth;
    neighbors(static_cast<std::uint32_t>(i), truth);
    std::vector<std::uint32_t> have = lists[i];
    std::sort(have.begin(), have.end());
    for (std::uint32_t j : truth) {
      if (j == static_cast<std::uint32_t>(i)) continue;
      if (!std::binary_search(have.begin(), have.end(), j)) ++missing;
    }
  }
  return missing;
}

NeighborAudit::DensityError NeighborAudit::density_error(std::size_t nf, double mass,
                                                         double rest_density) const {
  const KernelSet k(h_);
  std::vector<double> err(nf, 0.0);
  const std::int64_t n = static_cast<std::int64_t>(nf);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> nbr;
    neighbors(static_cast<std::uint32_t>(i), nbr);
    double rho = 0.0;
    for (std::uint32_t j : nbr) rho += mass * k.w_density_r2(norm2(pos_[i] - pos_[j]));
    err[i] = std::max(0.0, (rho - rest_density) / rest_density);
  }
  DensityError out;
  for (double e : err) out.max = std::max(out.max, e);
  out.avg = nf ? std::accumulate(err.begin(), err.end(), 0.0) / static_cast<double>(nf) : 0.0;
  return out;
}

}  // namespace rts
