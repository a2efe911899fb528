#include "rts_sph/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace rts {

CorrectionSchedule::CorrectionSchedule(std::vector<std::vector<int>> counts)
    : counts_(std::move(counts)) {
  if (counts_.empty()) throw std::invalid_argument("schedule needs at least one minor step");
  for (const auto& row : counts_) {
    if (row.size() != counts_[0].size() || row.empty()) {
      throw std::invalid_argument("schedule rows must list every region");
    }
  }
}

CorrectionSchedule CorrectionSchedule::standard() {
  return CorrectionSchedule({{3, 2, 2, 2}, {3, 1, 1, 1}, {3, 2, 1, 1}, {3, 1, 1, 1}});
}

int CorrectionSchedule::rows() const {
  int m = 0;
  for (const auto& row : counts_) m = std::max(m, *std::max_element(row.begin(), row.end()));
  return m;
}

std::vector<std::string> schedule_violations(const CorrectionSchedule& s) {
  std::vector<std::string> out;
  const int minors = s.minor_steps();
  const int regions = s.regions();
  auto where = [](int j, int r) {
    return "minor step " + std::to_string(j + 1) + ", region " + std::to_string(r);
  };

  for (int j = 0; j < minors; ++j) {
    for (int r = 1; r <= regions; ++r) {
      if (s.count(j, r) < 1) out.push_back(where(j, r) + ": no correction iteration");
      if (j == 0 && s.count(j, r) < 2) out.push_back(where(j, r) + ": fewer than two on the first minor step");
      if (r == 1 && s.count(j, r) != 3) out.push_back(where(j, r) + ": region 1 needs exactly three");
    }
  }
  if (regions >= 2 && minors >= 2) {
    for (int j = 0; j < minors; ++j) {
      const int pair = s.count(j, 2) + s.count((j + 1) % minors, 2);
      if (pair != 3) out.push_back(where(j, 2) + ": two consecutive minor steps do not total three");
    }
  }
  for (int r = 1; r <= regions; ++r) {
    const int window = std::min(r, minors);
    for (int j = 0; j < minors; ++j) {
      int sum = 0;
      for (int w = 0; w < window; ++w) sum += s.count((j + w) % minors, r);
      if (sum < 3) out.push_back(where(j, r) + ": fewer than three within its own step length");
    }
  }
  return out;
}

}  // namespace rts
