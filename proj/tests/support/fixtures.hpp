#pragma once

// Synthetic test videos. All generators are deterministic in their seed.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "nlvc/frame_io.hpp"

namespace nlvc::fixtures {

enum class Fixture { constant, gradient, uniform_noise, moving_square, random_per_frame };

inline const char* fixture_name(Fixture f) {
  switch (f) {
    case Fixture::constant: return "constant";
    case Fixture::gradient: return "gradient";
    case Fixture::uniform_noise: return "uniform-noise";
    case Fixture::moving_square: return "moving-square";
    case Fixture::random_per_frame: return "random-per-frame";
  }
  return "?";
}

inline constexpr Fixture kAllFixtures[] = {Fixture::constant, Fixture::gradient, Fixture::uniform_noise,
                                           Fixture::moving_square, Fixture::random_per_frame};

inline void fill_noise(FramePlane& p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& s : p.samples) s = static_cast<std::uint8_t>(d(rng));
}

// constant:         every sample 97 (chroma 140) in every frame
// gradient:         static diagonal ramp
// uniform-noise:    one frame of i.i.d. uniform noise, held for the whole clip
// moving-square:    noisy static background and a 12x12 textured square moving 3 px right, 2 px down
// random-per-frame: fresh i.i.d. uniform noise in every frame
inline std::vector<FrameYUV420> make_fixture(Fixture kind, std::uint32_t w, std::uint32_t h, std::size_t frames,
                                             Chroma chroma = Chroma::yuv420, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::vector<FrameYUV420> out;
  FrameYUV420 held = FrameYUV420::blank(w, h, chroma);
  switch (kind) {
    case Fixture::constant:
      held = FrameYUV420::blank(w, h, chroma, 97, 140);
      break;
    case Fixture::gradient:
      for (std::size_t p = 0; p < 3; ++p) {
        auto& pl = held.plane(p);
        for (std::uint32_t r = 0; r < pl.height; ++r)
          for (std::uint32_t c = 0; c < pl.width; ++c)
            pl.at(r, c) = static_cast<std::uint8_t>((3 * r + 2 * c + 40 * p) & 0xFF);
      }
      break;
    case Fixture::uniform_noise:
    case Fixture::moving_square:
      for (std::size_t p = 0; p < 3; ++p) fill_noise(held.plane(p), rng);
      break;
    case Fixture::random_per_frame:
      break;
  }
  std::vector<std::uint8_t> texture(144);
  for (auto& t : texture) t = static_cast<std::uint8_t>(rng() & 0xFF);
  for (std::size_t t = 0; t < frames; ++t) {
    FrameYUV420 f = held;
    if (kind == Fixture::random_per_frame)
      for (std::size_t p = 0; p < 3; ++p) fill_noise(f.plane(p), rng);
    if (kind == Fixture::moving_square) {
      const std::size_t r0 = 4 + 2 * t, c0 = 4 + 3 * t;
      for (std::size_t r = 0; r < 12; ++r)
        for (std::size_t c = 0; c < 12; ++c)
          if (r0 + r < h && c0 + c < w) f.y.at(r0 + r, c0 + c) = texture[r * 12 + c];
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline Video make_video(std::vector<FrameYUV420> frames, Chroma chroma = Chroma::yuv420) {
  Video v;
  v.header.width = frames.at(0).y.width;
  v.header.height = frames.at(0).y.height;
  v.header.chroma = chroma;
  v.header.frame_count = frames.size();
  v.frames = std::move(frames);
  return v;
}

}  // namespace nlvc::fixtures
