#include <gtest/gtest.h>

#include <set>

#include "nlvc/group_schedule.hpp"

using namespace nlvc;

TEST(GroupSchedule, GroupCounts) {
  EXPECT_EQ(build_schedule(0).group_count(), 32u);
  EXPECT_EQ(build_schedule(1).group_count(), 63u);
  EXPECT_EQ(build_schedule(2).group_count(), 94u);
}

TEST(GroupSchedule, GroupOf) {
  const auto s = build_schedule(2);
  EXPECT_EQ(s.group_of(0, 0), 0u);
  EXPECT_EQ(s.group_of(31, 31), 93u);
  EXPECT_EQ(s.group_of(1, 0), 2u);
  EXPECT_EQ(s.group_of(0, 5), 5u);
  const auto s0 = build_schedule(0);
  // Columns are coded left to right, one column per group.
  for (std::size_t r = 0; r < 32; ++r) EXPECT_EQ(s0.group_of(r, 7), 7u);
}

TEST(GroupSchedule, PartitionProperty) {
  for (std::size_t delta = 0; delta <= 8; ++delta)
    for (std::size_t side : {1u, 2u, 8u, 32u}) {
      const auto s = build_schedule(delta, side);
      EXPECT_EQ(s.group_count(), (delta + 1) * (side - 1) + 1);
      std::set<std::size_t> covered;
      std::size_t total = 0;
      for (std::size_t g = 0; g < s.group_count(); ++g) {
        const auto& grp = s.group(g);
        // With delta >= side some diagonals hold no position.
        if (delta < side) {
          EXPECT_FALSE(grp.empty()) << "delta " << delta << " side " << side << " group " << g;
        }
        for (std::size_t k = 0; k < grp.size(); ++k) {
          if (k > 0) {
            const auto& a = grp[k - 1];
            const auto& b = grp[k];
            EXPECT_TRUE(a.row < b.row || (a.row == b.row && a.col < b.col));
          }
          EXPECT_EQ(s.group_of(grp[k].row, grp[k].col), g);
          covered.insert(s.flat_index(grp[k]));
          ++total;
        }
      }
      EXPECT_EQ(total, side * side);
      EXPECT_EQ(covered.size(), side * side);
    }
}

TEST(GroupSchedule, MaskPattern) {
  const auto s = build_schedule(1, 8);
  const auto m = s.mask_pattern(3);
  std::size_t masked = 0;
  for (bool b : m) masked += b;
  EXPECT_EQ(masked, 58u);
  EXPECT_FALSE(m[0]);
  EXPECT_FALSE(m[2]);
  EXPECT_TRUE(m[3]);
  EXPECT_FALSE(m[8 + 1]);  // (1,1) is group 2
  const auto all = s.mask_pattern(0);
  EXPECT_EQ(std::count(all.begin(), all.end(), true), 64);
  const auto none = s.mask_pattern(s.group_count());
  EXPECT_EQ(std::count(none.begin(), none.end(), true), 0);
  EXPECT_THROW(s.mask_pattern(s.group_count() + 1), ContractViolation);
}

TEST(GroupSchedule, ZeroSideRejected) { EXPECT_THROW(build_schedule(0, 0), ContractViolation); }
