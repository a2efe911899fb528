#include "rts_sph/block_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rts_sph/errors.hpp"
#include "rts_sph/simd.hpp"

namespace rts {

namespace {

constexpr std::int64_t kMaxCells = std::int64_t{1} << 27;

BlockCoord min_coord(const BlockCoord& a, const BlockCoord& b) {
  return {std::min(a.i, b.i), std::min(a.j, b.j), std::min(a.k, b.k)};
}

BlockCoord max_coord(const BlockCoord& a, const BlockCoord& b) {
  return {std::max(a.i, b.i), std::max(a.j, b.j), std::max(a.k, b.k)};
}

}  // namespace

BlockGrid::BlockGrid(const Vec3& origin, double block_size)
    : origin_(origin), size_(block_size), inv_size_(1.0 / block_size) {}

BlockCoord BlockGrid::coord_of(const Vec3& x) const {
  return {static_cast<int>(std::floor((x.x - origin_.x) * inv_size_)),
          static_cast<int>(std::floor((x.y - origin_.y) * inv_size_)),
          static_cast<int>(std::floor((x.z - origin_.z) * inv_size_))};
}

std::int64_t BlockGrid::cell_index(const BlockCoord& c) const {
  const int i = c.i - cell_lo_.i;
  const int j = c.j - cell_lo_.j;
  const int k = c.k - cell_lo_.k;
  if (i < 0 || j < 0 || k < 0 || i >= dims_.i || j >= dims_.j || k >= dims_.k) return -1;
  return (static_cast<std::int64_t>(k) * dims_.j + j) * dims_.i + i;
}

void BlockGrid::layout(const BlockCoord& lo, const BlockCoord& hi) {
  cell_lo_ = lo;
  dims_ = {hi.i - lo.i + 1, hi.j - lo.j + 1, hi.k - lo.k + 1};
  const std::int64_t cells = std::int64_t{dims_.i} * dims_.j * dims_.k;
  if (cells > kMaxCells) {
    throw ValidationError("domain spans too many grid blocks (" + std::to_string(cells) + ")");
  }
  cell_block_.assign(static_cast<std::size_t>(cells), -1);
  for (std::size_t b = 0; b < coords_.size(); ++b) {
    cell_block_[static_cast<std::size_t>(cell_index(coords_[b]))] = static_cast<std::int32_t>(b);
  }

  static_off_.assign(static_cast<std::size_t>(cells) + 1, 0);
  for (const BlockCoord& c : static_coords_) ++static_off_[cell_index(c) + 1];
  for (std::size_t c = 0; c < static_cast<std::size_t>(cells); ++c) {
    static_off_[c + 1] += static_off_[c];
  }
  static_idx_.resize(static_coords_.size());
  std::vector<std::uint32_t> fill(static_off_.begin(), static_off_.end() - 1);
  for (std::size_t p = 0; p < static_coords_.size(); ++p) {
    static_idx_[fill[cell_index(static_coords_[p])]++] = static_first_ + static_cast<std::uint32_t>(p);
  }
}

void BlockGrid::set_static(const Vec3* x, std::size_t n, std::uint32_t first_index) {
  static_first_ = first_index;
  static_coords_.resize(n);
  for (std::size_t p = 0; p < n; ++p) static_coords_[p] = coord_of(x[p]);
  if (n == 0 && dims_.i == 0) return;
  BlockCoord lo = n ? static_coords_[0] : cell_lo_;
  BlockCoord hi = lo;
  for (const BlockCoord& c : static_coords_) {
    lo = min_coord(lo, c);
    hi = max_coord(hi, c);
  }
  if (dims_.i > 0) {
    lo = min_coord(lo, cell_lo_);
    hi = max_coord(hi, {cell_lo_.i + dims_.i - 1, cell_lo_.j + dims_.j - 1, cell_lo_.k + dims_.k - 1});
  }
  layout(lo, hi);
}

void BlockGrid::rebuild(const Vec3* x, std::size_t n, const Vec3& lo, const Vec3& hi) {
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3& q = x[p];
    const bool inside = q.x >= lo.x && q.x <= hi.x && q.y >= lo.y && q.y <= hi.y &&
                        q.z >= lo.z && q.z <= hi.z;
    if (!inside) {
      std::ostringstream msg;
      msg << "particle " << p << " left the domain at (" << q.x << ", " << q.y << ", " << q.z
          << ")";
      throw NumericalAbort(msg.str());
    }
  }

  const BlockCoord clo = coord_of(lo);
  const BlockCoord chi = coord_of(hi);
  const BlockCoord top{cell_lo_.i + dims_.i - 1, cell_lo_.j + dims_.j - 1, cell_lo_.k + dims_.k - 1};
  if (dims_.i == 0 || min_coord(clo, cell_lo_) != cell_lo_ || max_coord(chi, top) != top) {
    coords_.clear();
    BlockCoord a = clo;
    BlockCoord b = chi;
    if (dims_.i > 0) {
      a = min_coord(a, cell_lo_);
      b = max_coord(b, top);
    }
    for (const BlockCoord& c : static_coords_) {
      a = min_coord(a, c);
      b = max_coord(b, c);
    }
    layout(a, b);
  }

  for (const BlockCoord& c : coords_) cell_block_[static_cast<std::size_t>(cell_index(c))] = -1;
  coords_.clear();
  owner_.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const BlockCoord c = coord_of(x[p]);
    std::int32_t& slot = cell_block_[static_cast<std::size_t>(cell_index(c))];
    if (slot < 0) {
      slot = static_cast<std::int32_t>(coords_.size());
      coords_.push_back(c);
    }
    owner_[p] = static_cast<std::uint32_t>(slot);
  }

  const std::size_t nb = coords_.size();
  member_off_.assign(nb + 1, 0);
  for (std::size_t p = 0; p < n; ++p) ++member_off_[owner_[p] + 1];
  for (std::size_t b = 0; b < nb; ++b) member_off_[b + 1] += member_off_[b];
  member_idx_.resize(n);
  std::vector<std::size_t> fill(member_off_.begin(), member_off_.end() - 1);
  for (std::size_t p = 0; p < n; ++p) member_idx_[fill[owner_[p]]++] = static_cast<std::uint32_t>(p);

  adj_off_.assign(nb + 1, 0);
  adj_idx_.clear();
  adj_idx_.reserve(nb * 27);
  for (std::size_t b = 0; b < nb; ++b) {
    const BlockCoord c = coords_[b];
    for (int dk = -1; dk <= 1; ++dk) {
      for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const std::int64_t nbr = find({c.i + di, c.j + dj, c.k + dk});
          if (nbr >= 0) adj_idx_.push_back(static_cast<std::uint32_t>(nbr));
        }
      }
    }
    adj_off_[b + 1] = adj_idx_.size();
  }

  v_max.assign(nb, 0.0);
  f_max.assign(nb, 0.0);
}

void BlockGrid::reduce_maxima(const Vec3* v, const Vec3* f) {
  const std::int64_t nb = static_cast<std::int64_t>(coords_.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nb; ++b) {
    double vm = 0.0;
    double fm = 0.0;
    for (std::uint32_t p : members(static_cast<std::size_t>(b))) {
      vm = std::max(vm, norm(v[p]));
      fm = std::max(fm, norm(f[p]));
    }
    v_max[b] = vm;
    f_max[b] = fm;
  }
}

std::int64_t BlockGrid::find(const BlockCoord& c) const {
  const std::int64_t cell = cell_index(c);
  return cell < 0 ? -1 : cell_block_[static_cast<std::size_t>(cell)];
}

void BlockGrid::candidates(std::size_t b, int layers, std::vector<std::uint32_t>& out) const {
  const BlockCoord c = coords_[b];
  for (int dk = -layers; dk <= layers; ++dk) {
    for (int dj = -layers; dj <= layers; ++dj) {
      for (int di = -layers; di <= layers; ++di) {
        const std::int64_t cell = cell_index({c.i + di, c.j + dj, c.k + dk});
        if (cell < 0) continue;
        if (const std::int32_t nbr = cell_block_[static_cast<std::size_t>(cell)]; nbr >= 0) {
          const auto m = members(static_cast<std::size_t>(nbr));
          out.insert(out.end(), m.begin(), m.end());
        }
        out.insert(out.end(), static_idx_.begin() + static_off_[cell],
                   static_idx_.begin() + static_off_[cell + 1]);
      }
    }
  }
}

std::size_t BlockGrid::active_static_count() const {
  std::size_t count = 0;
  for (std::size_t p = 0; p < static_coords_.size(); ++p) {
    const BlockCoord c = static_coords_[p];
    bool near = false;
    for (int dk = -1; dk <= 1 && !near; ++dk) {
      for (int dj = -1; dj <= 1 && !near; ++dj) {
        for (int di = -1; di <= 1 && !near; ++di) {
          near = find({c.i + di, c.j + dj, c.k + dk}) >= 0;
        }
      }
    }
    if (near) ++count;
  }
  return count;
}

void CandidateSet::gather(const Vec3* pos) {
  const std::size_t n = ids.size();
  x.resize(n);
  y.resize(n);
  z.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    const Vec3& q = pos[ids[c]];
    x[c] = q.x;
    y[c] = q.y;
    z[c] = q.z;
  }
}

void CandidateSet::select(const Vec3& p, double r2, std::vector<std::uint32_t>& out) const {
  out.resize(ids.size());
  out.resize(simd::ops().select_within(p, x.data(), y.data(), z.data(), ids.data(), ids.size(), r2,
                                       out.data()));
}

}  // namespace rts
