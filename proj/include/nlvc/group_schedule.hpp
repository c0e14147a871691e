#pragma once

// Group-wise reveal order. Position (r, c) belongs to group c + r * delta; groups are
// revealed in increasing index and each group is predicted by one model evaluation.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlvc/error.hpp"
#include "nlvc/tiling.hpp"

namespace nlvc {

struct GridPosition {
  std::uint16_t row = 0;
  std::uint16_t col = 0;
  friend bool operator==(const GridPosition&, const GridPosition&) = default;
};

class GroupSchedule {
 public:
  GroupSchedule(std::size_t delta, std::size_t patch_side) : delta_(delta), side_(patch_side) {
    if (patch_side == 0) throw ContractViolation("build_schedule: patch_side must be >= 1");
    group_count_ = (delta + 1) * (patch_side - 1) + 1;
    group_of_.resize(side_ * side_);
    groups_.resize(group_count_);
    // Row-major traversal leaves each group's positions sorted by (row, col).
    for (std::size_t r = 0; r < side_; ++r)
      for (std::size_t c = 0; c < side_; ++c) {
        const std::size_t g = c + r * delta;
        group_of_[r * side_ + c] = static_cast<std::uint32_t>(g);
        groups_[g].push_back({static_cast<std::uint16_t>(r), static_cast<std::uint16_t>(c)});
      }
  }

  std::size_t delta() const noexcept { return delta_; }
  std::size_t patch_side() const noexcept { return side_; }
  std::size_t group_count() const noexcept { return group_count_; }
  std::size_t group_of(std::size_t row, std::size_t col) const { return group_of_[row * side_ + col]; }
  std::size_t group_of(std::size_t flat) const { return group_of_[flat]; }
  const std::vector<GridPosition>& group(std::size_t g) const { return groups_.at(g); }
  const std::vector<std::vector<GridPosition>>& groups() const noexcept { return groups_; }
  std::size_t flat_index(GridPosition p) const noexcept { return std::size_t{p.row} * side_ + p.col; }

  // Row-major; true where the group index is >= step.
  std::vector<bool> mask_pattern(std::size_t step) const {
    if (step > group_count_)
      throw ContractViolation("mask_pattern: step " + std::to_string(step) + " exceeds group count " +
                              std::to_string(group_count_));
    std::vector<bool> masked(side_ * side_);
    for (std::size_t i = 0; i < masked.size(); ++i) masked[i] = group_of_[i] >= step;
    return masked;
  }

 private:
  std::size_t delta_;
  std::size_t side_;
  std::size_t group_count_ = 0;
  std::vector<std::uint32_t> group_of_;
  std::vector<std::vector<GridPosition>> groups_;
};

inline GroupSchedule build_schedule(std::size_t delta, std::size_t patch_side = kPatchSide) {
  return GroupSchedule(delta, patch_side);
}

}  // namespace nlvc
