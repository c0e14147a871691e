#pragma once

// Edge-replication padding and 32x32 patch tiling of a single plane.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "nlvc/error.hpp"
#include "nlvc/frame_io.hpp"

namespace nlvc {

inline constexpr std::size_t kPatchSide = 32;
inline constexpr std::size_t kPatchArea = kPatchSide * kPatchSide;

struct Patch {
  std::size_t origin_row = 0;
  std::size_t origin_col = 0;
  std::array<std::uint8_t, kPatchArea> samples{};

  std::uint8_t at(std::size_t r, std::size_t c) const { return samples[r * kPatchSide + c]; }
  friend bool operator==(const Patch&, const Patch&) = default;
};

struct TilingLayout {
  std::uint32_t plane_width = 0;
  std::uint32_t plane_height = 0;
  std::uint32_t padded_width = 0;
  std::uint32_t padded_height = 0;
  std::size_t patches_per_row = 0;
  std::size_t patches_per_col = 0;

  static TilingLayout for_plane(std::uint32_t width, std::uint32_t height) {
    if (width == 0 || height == 0) throw ContractViolation("tiling: empty plane");
    auto round_up = [](std::uint32_t v) {
      return static_cast<std::uint32_t>((v + kPatchSide - 1) / kPatchSide * kPatchSide);
    };
    TilingLayout layout;
    layout.plane_width = width;
    layout.plane_height = height;
    layout.padded_width = round_up(width);
    layout.padded_height = round_up(height);
    layout.patches_per_row = layout.padded_width / kPatchSide;
    layout.patches_per_col = layout.padded_height / kPatchSide;
    return layout;
  }

  std::size_t patch_count() const noexcept { return patches_per_row * patches_per_col; }

  friend bool operator==(const TilingLayout&, const TilingLayout&) = default;
};

inline std::pair<FramePlane, TilingLayout> pad_plane(const FramePlane& plane) {
  if (plane.empty()) throw ContractViolation("pad_plane: empty plane");
  const auto layout = TilingLayout::for_plane(plane.width, plane.height);
  FramePlane padded(layout.padded_width, layout.padded_height);
  for (std::size_t r = 0; r < layout.padded_height; ++r) {
    const std::size_t src_r = std::min<std::size_t>(r, plane.height - 1);
    for (std::size_t c = 0; c < layout.padded_width; ++c)
      padded.at(r, c) = plane.at(src_r, std::min<std::size_t>(c, plane.width - 1));
  }
  return {std::move(padded), layout};
}

// Raster order of patch origins.
inline std::vector<Patch> extract_patches(const FramePlane& padded, const TilingLayout& layout) {
  if (padded.width != layout.padded_width || padded.height != layout.padded_height ||
      padded.size() != std::size_t{padded.width} * padded.height)
    throw ContractViolation("extract_patches: plane does not match layout");
  std::vector<Patch> patches;
  patches.reserve(layout.patch_count());
  for (std::size_t pr = 0; pr < layout.patches_per_col; ++pr) {
    for (std::size_t pc = 0; pc < layout.patches_per_row; ++pc) {
      Patch patch;
      patch.origin_row = pr * kPatchSide;
      patch.origin_col = pc * kPatchSide;
      for (std::size_t r = 0; r < kPatchSide; ++r)
        std::copy_n(&padded.samples[(patch.origin_row + r) * padded.width + patch.origin_col],
                    kPatchSide, &patch.samples[r * kPatchSide]);
      patches.push_back(patch);
    }
  }
  return patches;
}

// Rebuilds the original-size plane; pad samples are dropped.
inline FramePlane reassemble(const std::vector<Patch>& patches, const TilingLayout& layout) {
  if (patches.size() != layout.patch_count())
    throw ContractViolation("reassemble: expected " + std::to_string(layout.patch_count()) +
                            " patches, got " + std::to_string(patches.size()));
  std::vector<bool> seen(layout.patch_count(), false);
  FramePlane plane(layout.plane_width, layout.plane_height);
  for (const auto& patch : patches) {
    if (patch.origin_row % kPatchSide != 0 || patch.origin_col % kPatchSide != 0 ||
        patch.origin_row >= layout.padded_height || patch.origin_col >= layout.padded_width)
      throw ContractViolation("reassemble: patch origin outside layout");
    const std::size_t index =
        patch.origin_row / kPatchSide * layout.patches_per_row + patch.origin_col / kPatchSide;
    if (seen[index]) throw ContractViolation("reassemble: duplicate patch origin");
    seen[index] = true;
    for (std::size_t r = 0; r < kPatchSide; ++r) {
      const std::size_t row = patch.origin_row + r;
      if (row >= layout.plane_height) break;
      for (std::size_t c = 0; c < kPatchSide; ++c) {
        const std::size_t col = patch.origin_col + c;
        if (col >= layout.plane_width) break;
        plane.at(row, col) = patch.at(r, c);
      }
    }
  }
  return plane;
}

}  // namespace nlvc
