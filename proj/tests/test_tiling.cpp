#include <gtest/gtest.h>

#include <random>

#include "nlvc/tiling.hpp"

using namespace nlvc;

TEST(Tiling, CifHasNinetyNinePatches) {
  const auto layout = TilingLayout::for_plane(352, 288);
  EXPECT_EQ(layout.padded_width, 352u);
  EXPECT_EQ(layout.padded_height, 288u);
  EXPECT_EQ(layout.patch_count(), 99u);
}

TEST(Tiling, QcifPadsToThirtyPatches) {
  const auto layout = TilingLayout::for_plane(176, 144);
  EXPECT_EQ(layout.padded_width, 192u);
  EXPECT_EQ(layout.padded_height, 160u);
  EXPECT_EQ(layout.patches_per_row, 6u);
  EXPECT_EQ(layout.patches_per_col, 5u);
  EXPECT_EQ(layout.patch_count(), 30u);
}

TEST(Tiling, SinglePixelReplicatesEverywhere) {
  FramePlane p(1, 1, 77);
  auto [padded, layout] = pad_plane(p);
  EXPECT_EQ(padded.width, 32u);
  EXPECT_EQ(padded.height, 32u);
  for (auto s : padded.samples) EXPECT_EQ(s, 77);
  const auto patches = extract_patches(padded, layout);
  ASSERT_EQ(patches.size(), 1u);
  EXPECT_EQ(reassemble(patches, layout), p);
}

TEST(Tiling, EdgeReplication) {
  FramePlane p(33, 2);
  for (std::uint32_t r = 0; r < 2; ++r)
    for (std::uint32_t c = 0; c < 33; ++c) p.at(r, c) = static_cast<std::uint8_t>(r * 100 + c);
  auto [padded, layout] = pad_plane(p);
  EXPECT_EQ(padded.width, 64u);
  EXPECT_EQ(padded.height, 32u);
  EXPECT_EQ(padded.at(0, 63), 32);   // last column repeated
  EXPECT_EQ(padded.at(31, 5), 105);  // last row repeated
  EXPECT_EQ(padded.at(31, 40), 132); // corner
}

TEST(Tiling, RasterOrder) {
  FramePlane p(96, 96);
  auto [padded, layout] = pad_plane(p);
  const auto patches = extract_patches(padded, layout);
  ASSERT_EQ(patches.size(), 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    EXPECT_EQ(patches[k].origin_row, k / 3 * 32);
    EXPECT_EQ(patches[k].origin_col, k % 3 * 32);
  }
}

TEST(Tiling, RandomRoundTrips) {
  std::mt19937 rng(3);
  for (std::uint32_t w = 1; w <= 100; w += 3)
    for (std::uint32_t h = 1; h <= 100; h += 7) {
      FramePlane p(w, h);
      for (auto& s : p.samples) s = static_cast<std::uint8_t>(rng());
      auto [padded, layout] = pad_plane(p);
      auto patches = extract_patches(padded, layout);
      // Order of the patch list does not matter.
      std::reverse(patches.begin(), patches.end());
      ASSERT_EQ(reassemble(patches, layout), p) << w << "x" << h;
    }
}

TEST(Tiling, ReassembleValidatesPatches) {
  FramePlane p(64, 32);
  auto [padded, layout] = pad_plane(p);
  auto patches = extract_patches(padded, layout);
  auto missing = patches;
  missing.pop_back();
  EXPECT_THROW(reassemble(missing, layout), ContractViolation);
  auto dup = patches;
  dup[1] = dup[0];
  EXPECT_THROW(reassemble(dup, layout), ContractViolation);
  auto off = patches;
  off[1].origin_col = 5;
  EXPECT_THROW(reassemble(off, layout), ContractViolation);
  EXPECT_THROW(pad_plane(FramePlane{}), ContractViolation);
}
