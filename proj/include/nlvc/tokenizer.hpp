#pragma once

// Bijective pixel <-> token maps.
//
//   I-frame:    token = 2x                      (even ids 0..510)
//   P-frame:    token = (x_t - x_{t-1}) + 255   (ids 0..510)
//   reference:  token = 2 x_{t-1}
//
// Id 511 is the mask token. It only ever appears in model inputs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "nlvc/error.hpp"
#include "nlvc/tiling.hpp"

namespace nlvc {

using Token = std::uint16_t;
// A token as seen by the range coder; always < kAlphabetSize.
using Symbol = Token;

inline constexpr Token kMaskToken = 511;
inline constexpr std::size_t kVocabSize = 512;
inline constexpr std::size_t kAlphabetSize = 511;  // codeable ids 0..510
inline constexpr Token kZeroDifference = 255;

enum class GridKind : std::uint8_t { iframe, pframe, reference };

struct TokenGrid {
  std::array<Token, kPatchArea> tokens{};
  GridKind kind = GridKind::iframe;

  Token operator[](std::size_t i) const { return tokens[i]; }
  Token& operator[](std::size_t i) { return tokens[i]; }

  static TokenGrid all_masked(GridKind kind) {
    TokenGrid grid;
    grid.tokens.fill(kMaskToken);
    grid.kind = kind;
    return grid;
  }

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;
};

inline constexpr Token tokenize_i(std::uint8_t pixel) { return static_cast<Token>(2 * pixel); }

inline constexpr Token tokenize_p(std::uint8_t current, std::uint8_t previous) {
  return static_cast<Token>(int{current} - int{previous} + kZeroDifference);
}

inline TokenGrid tokenize_i(const Patch& patch) {
  TokenGrid grid;
  grid.kind = GridKind::iframe;
  for (std::size_t i = 0; i < kPatchArea; ++i) grid[i] = tokenize_i(patch.samples[i]);
  return grid;
}

inline TokenGrid reference_tokens(const Patch& reference) {
  TokenGrid grid = tokenize_i(reference);
  grid.kind = GridKind::reference;
  return grid;
}

inline TokenGrid tokenize_p(const Patch& current, const Patch& reference) {
  if (current.origin_row != reference.origin_row || current.origin_col != reference.origin_col)
    throw ContractViolation("tokenize_p: patches are not co-located");
  TokenGrid grid;
  grid.kind = GridKind::pframe;
  for (std::size_t i = 0; i < kPatchArea; ++i)
    grid[i] = tokenize_p(current.samples[i], reference.samples[i]);
  return grid;
}

inline Patch detokenize_i(const TokenGrid& grid, std::size_t origin_row = 0,
                          std::size_t origin_col = 0) {
  if (grid.kind != GridKind::iframe && grid.kind != GridKind::reference)
    throw ContractViolation("detokenize_i: grid is not I-tokenized");
  Patch patch;
  patch.origin_row = origin_row;
  patch.origin_col = origin_col;
  for (std::size_t i = 0; i < kPatchArea; ++i) {
    const Token t = grid[i];
    if (t == kMaskToken) throw CorruptGrid("detokenize_i: mask token at position " + std::to_string(i));
    if (t % 2 != 0 || t > 510)
      throw CorruptGrid("detokenize_i: invalid token " + std::to_string(t) + " at position " +
                        std::to_string(i));
    patch.samples[i] = static_cast<std::uint8_t>(t / 2);
  }
  return patch;
}

inline Patch detokenize_p(const TokenGrid& grid, const Patch& reference) {
  if (grid.kind != GridKind::pframe)
    throw ContractViolation("detokenize_p: grid is not P-tokenized");
  Patch patch;
  patch.origin_row = reference.origin_row;
  patch.origin_col = reference.origin_col;
  for (std::size_t i = 0; i < kPatchArea; ++i) {
    const Token t = grid[i];
    if (t > 510)
      throw CorruptGrid("detokenize_p: invalid token " + std::to_string(t) + " at position " +
                        std::to_string(i));
    const int value = int{t} - int{kZeroDifference} + int{reference.samples[i]};
    if (value < 0 || value > 255)
      throw CorruptGrid("detokenize_p: reconstructed value " + std::to_string(value) +
                        " out of range at position " + std::to_string(i));
    patch.samples[i] = static_cast<std::uint8_t>(value);
  }
  return patch;
}

}  // namespace nlvc
