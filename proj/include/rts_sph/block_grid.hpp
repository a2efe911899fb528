#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rts_sph/vec3.hpp"

namespace rts {

struct BlockCoord {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const BlockCoord&, const BlockCoord&) = default;
};

/// Virtual uniform grid of cubic blocks anchored at the domain origin. Only
/// occupied blocks are stored, in order of first occupation by particle index;
/// a dense cell table over the domain maps coordinates to them.
///
/// Fluid particles are rebinned by rebuild(); static boundary particles are
/// binned once by set_static() and show up in candidate lists of any fluid
/// block whose neighbourhood reaches their bin, which is what culls inactive
/// boundary particles.
class BlockGrid {
 public:
  BlockGrid() = default;
  BlockGrid(const Vec3& origin, double block_size);

  double block_size() const { return size_; }
  const Vec3& origin() const { return origin_; }

  BlockCoord coord_of(const Vec3& x) const;

  /// Bins static particles. `first_index` is the index of x[0] in the solver's
  /// combined index space.
  void set_static(const Vec3* x, std::size_t n, std::uint32_t first_index);

  /// Bins n fluid positions, all of which must lie in [lo, hi]. Resets the
  /// per-block maxima. Throws NumericalAbort on a stray or non-finite particle.
  void rebuild(const Vec3* x, std::size_t n, const Vec3& lo, const Vec3& hi);

  /// V_max = max |v|, F_max = max |f| over each block's members.
  void reduce_maxima(const Vec3* v, const Vec3* f);

  std::size_t size() const { return coords_.size(); }
  std::size_t particle_count() const { return owner_.size(); }
  const BlockCoord& coord(std::size_t b) const { return coords_[b]; }
  std::span<const std::uint32_t> members(std::size_t b) const {
    return {member_idx_.data() + member_off_[b], member_off_[b + 1] - member_off_[b]};
  }
  /// Occupied blocks of the 3x3x3 neighbourhood, including b itself.
  std::span<const std::uint32_t> adjacent(std::size_t b) const {
    return {adj_idx_.data() + adj_off_[b], adj_off_[b + 1] - adj_off_[b]};
  }
  std::uint32_t owner(std::uint32_t particle) const { return owner_[particle]; }
  /// Index of the occupied block at c, or -1.
  std::int64_t find(const BlockCoord& c) const;

  /// Fluid and static particle indices in the blocks within `layers` of
  /// block b (Chebyshev distance), appended to `out`.
  void candidates(std::size_t b, int layers, std::vector<std::uint32_t>& out) const;
  /// Candidate superset for a particle: the neighbourhood of its owner block.
  void neighbors(std::uint32_t particle, int layers, std::vector<std::uint32_t>& out) const {
    candidates(owner_[particle], layers, out);
  }

  /// Static particles binned next to at least one occupied block.
  std::size_t active_static_count() const;

  std::vector<double> v_max;
  std::vector<double> f_max;

 private:
  Vec3 origin_{};
  double size_ = 1.0;
  double inv_size_ = 1.0;

  std::int64_t cell_index(const BlockCoord& c) const;
  void layout(const BlockCoord& lo, const BlockCoord& hi);

  // Dense cell table covering [cell_lo_, cell_lo_ + dims_).
  BlockCoord cell_lo_{};
  BlockCoord dims_{};
  std::vector<std::int32_t> cell_block_;
  std::vector<std::uint32_t> static_off_{0};
  std::vector<std::uint32_t> static_idx_;

  std::vector<BlockCoord> coords_;
  std::vector<std::size_t> member_off_{0};
  std::vector<std::uint32_t> member_idx_;
  std::vector<std::size_t> adj_off_{0};
  std::vector<std::uint32_t> adj_idx_;
  std::vector<std::uint32_t> owner_;
  std::vector<BlockCoord> static_coords_;
  std::uint32_t static_first_ = 0;
};

/// Candidate indices plus a structure-of-arrays copy of their positions, for
/// filtering many particles against the same candidates.
struct CandidateSet {
  std::vector<std::uint32_t> ids;
  std::vector<double> x, y, z;

  void gather(const Vec3* pos);
  /// Replaces `out` with the candidates closer than sqrt(r2) to p.
  void select(const Vec3& p, double r2, std::vector<std::uint32_t>& out) const;
};

}  // namespace rts
