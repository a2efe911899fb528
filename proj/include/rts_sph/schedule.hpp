#pragma once

#include <string>
#include <vector>

namespace rts {

/// How many correction iterations each region receives on each minor step of
/// a major step. Region r is scheduled in iteration row k of minor step j iff
/// k < count(j, r); rows run from the top of the table.
class CorrectionSchedule {
 public:
  /// counts[j][r - 1] for minor step j (0-based) and region r.
  explicit CorrectionSchedule(std::vector<std::vector<int>> counts);

  /// 3/2/2/2, 3/1/1/1, 3/2/1/1, 3/1/1/1 for regions 1..4.
  static CorrectionSchedule standard();

  int minor_steps() const { return static_cast<int>(counts_.size()); }
  int regions() const { return counts_.empty() ? 0 : static_cast<int>(counts_[0].size()); }
  /// Length of the longest column.
  int rows() const;

  int count(int minor, int region) const { return counts_[minor][region - 1]; }
  bool turn(int minor, int row, int region) const { return row < count(minor, region); }

 private:
  std::vector<std::vector<int>> counts_;
};

/// Every violated schedule rule, worded for a diagnostic; empty when legal.
/// Rules: at least one iteration per region and minor step; at least two on
/// the first minor step; exactly three for region 1; three per two
/// consecutive minor steps for region 2; and at least three within any
/// (cyclic) window of n minor steps for region n.
std::vector<std::string> schedule_violations(const CorrectionSchedule& schedule);

}  // namespace rts
