#pragma once

// XXH64 (seed 0 by default), one-shot over a contiguous buffer.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>

namespace nlvc {

namespace detail {

inline constexpr std::uint64_t kPrime64_1 = 0x9E3779B185EBCA87ull;
inline constexpr std::uint64_t kPrime64_2 = 0xC2B2AE3D27D4EB4Full;
inline constexpr std::uint64_t kPrime64_3 = 0x165667B19E3779F9ull;
inline constexpr std::uint64_t kPrime64_4 = 0x85EBCA77C2B2AE63ull;
inline constexpr std::uint64_t kPrime64_5 = 0x27D4EB2F165667C5ull;

inline constexpr std::uint64_t rotl64(std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }

inline std::uint64_t read_le64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline std::uint32_t read_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

inline constexpr std::uint64_t xxh_round(std::uint64_t acc, std::uint64_t input) {
  acc += input * kPrime64_2;
  acc = rotl64(acc, 31);
  return acc * kPrime64_1;
}

inline constexpr std::uint64_t xxh_merge(std::uint64_t acc, std::uint64_t val) {
  acc ^= xxh_round(0, val);
  return acc * kPrime64_1 + kPrime64_4;
}

}  // namespace detail

inline std::uint64_t xxhash64(std::span<const std::uint8_t> data, std::uint64_t seed = 0) {
  using namespace detail;
  const std::uint8_t* p = data.data();
  const std::uint8_t* const end = p + data.size();
  std::uint64_t h;

  if (data.size() >= 32) {
    std::uint64_t v1 = seed + kPrime64_1 + kPrime64_2;
    std::uint64_t v2 = seed + kPrime64_2;
    std::uint64_t v3 = seed;
    std::uint64_t v4 = seed - kPrime64_1;
    const std::uint8_t* const limit = end - 32;
    do {
      v1 = xxh_round(v1, read_le64(p));
      v2 = xxh_round(v2, read_le64(p + 8));
      v3 = xxh_round(v3, read_le64(p + 16));
      v4 = xxh_round(v4, read_le64(p + 24));
      p += 32;
    } while (p <= limit);
    h = rotl64(v1, 1) + rotl64(v2, 7) + rotl64(v3, 12) + rotl64(v4, 18);
    h = xxh_merge(h, v1);
    h = xxh_merge(h, v2);
    h = xxh_merge(h, v3);
    h = xxh_merge(h, v4);
  } else {
    h = seed + kPrime64_5;
  }

  h += static_cast<std::uint64_t>(data.size());

  while (p + 8 <= end) {
    h ^= xxh_round(0, read_le64(p));
    h = rotl64(h, 27) * kPrime64_1 + kPrime64_4;
    p += 8;
  }
  if (p + 4 <= end) {
    h ^= static_cast<std::uint64_t>(read_le32(p)) * kPrime64_1;
    h = rotl64(h, 23) * kPrime64_2 + kPrime64_3;
    p += 4;
  }
  while (p < end) {
    h ^= (*p) * kPrime64_5;
    h = rotl64(h, 11) * kPrime64_1;
    ++p;
  }

  h ^= h >> 33;
  h *= kPrime64_2;
  h ^= h >> 29;
  h *= kPrime64_3;
  h ^= h >> 32;
  return h;
}

}  // namespace nlvc
