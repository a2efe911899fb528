#pragma once

#include <cstdint>
#include <vector>

#include "rts_sph/vec3.hpp"

namespace rts {

/// Brute-force checks against an independent cell list of edge h, built from
/// the positions passed in. Indices follow the solvers' combined space: fluid
/// 0..nf-1, static particles after that.
class NeighborAudit {
 public:
  NeighborAudit(const Vec3* pos, std::size_t total, double h);

  /// Pairs (i, j), i fluid, j != i, |x_i - x_j| < h, with j absent from lists[i].
  std::int64_t count_missing(std::size_t nf, const std::vector<std::vector<std::uint32_t>>& lists) const;

  struct DensityError {
    double max = 0.0;
    double avg = 0.0;
  };
  /// Compression error of the first nf particles, from exact neighbour sums.
  DensityError density_error(std::size_t nf, double mass, double rest_density) const;

  /// Exact neighbours of particle i (including i).
  void neighbors(std::uint32_t i, std::vector<std::uint32_t>& out) const;

 private:
  const Vec3* pos_;
  std::size_t total_;
  double h_;
  std::vector<std::int64_t> cell_keys_;
  std::vector<std::size_t> cell_off_;
  std::vector<std::uint32_t> cell_idx_;

  std::int64_t key(int i, int j, int k) const;
};

}  // namespace rts
