#pragma once

// Order-0 token entropy and per-frame rate series.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "nlvc/codec.hpp"
#include "nlvc/error.hpp"
#include "nlvc/frame_io.hpp"
#include "nlvc/tiling.hpp"
#include "nlvc/tokenizer.hpp"

namespace nlvc {

struct EntropyEstimate {
  double bits_per_token = 0.0;
  GridKind token_kind = GridKind::iframe;
  std::string source;
  std::size_t token_count = 0;

  // bits/token -> percent of 8-bit raw samples, for `samples` raw samples covered by the tokens.
  double rate_percent(std::size_t samples) const {
    return bits_per_token / 8.0 * static_cast<double>(token_count) / static_cast<double>(samples) * 100.0;
  }
};

using TokenHistogram = std::array<std::uint64_t, kAlphabetSize>;

inline double histogram_entropy(const TokenHistogram& histogram) {
  std::uint64_t total = 0;
  for (auto c : histogram) total += c;
  if (total == 0) return 0.0;
  double bits = 0.0;
  for (auto c : histogram) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    bits -= p * std::log2(p);
  }
  return bits;
}

inline EntropyEstimate order0_entropy(std::span<const TokenGrid> grids, std::string source = {}) {
  if (grids.empty()) throw ContractViolation("order0_entropy: no grids");
  TokenHistogram histogram{};
  for (const auto& g : grids)
    for (Token t : g.tokens) {
      if (t >= kAlphabetSize) throw ContractViolation("order0_entropy: grid contains masked or invalid ids");
      ++histogram[t];
    }
  return {histogram_entropy(histogram), grids.front().kind, std::move(source), grids.size() * kPatchArea};
}

// All padded patches of every plane, I-tokenized, and the P-tokenized differences of each frame
// against its predecessor.
struct VideoTokens {
  std::vector<TokenGrid> iframe;
  std::vector<TokenGrid> pframe;
  std::size_t samples_per_frame = 0;
};

inline VideoTokens tokenize_video(std::span<const FrameYUV420> frames) {
  VideoTokens out;
  if (frames.empty()) return out;
  for (std::size_t p = 0; p < 3; ++p) out.samples_per_frame += frames[0].plane(p).size();
  std::vector<std::vector<Patch>> previous;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::vector<std::vector<Patch>> current;
    for (std::size_t p = 0; p < 3; ++p) {
      if (frames[t].plane(p).empty()) continue;
      auto [padded, layout] = pad_plane(frames[t].plane(p));
      current.push_back(extract_patches(padded, layout));
    }
    for (std::size_t p = 0; p < current.size(); ++p)
      for (std::size_t k = 0; k < current[p].size(); ++k) {
        out.iframe.push_back(tokenize_i(current[p][k]));
        if (t > 0) out.pframe.push_back(tokenize_p(current[p][k], previous[p][k]));
      }
    previous = std::move(current);
  }
  return out;
}

struct FrameRatePoint {
  std::size_t frame = 0;
  FrameType type = FrameType::I;
  double rate_percent = 0.0;
};

inline std::vector<FrameRatePoint> per_frame_rate_series(const RateReport& report) {
  std::vector<FrameRatePoint> rows;
  rows.reserve(report.frames.size());
  for (const auto& f : report.frames) rows.push_back({f.frame, f.type, f.rate_percent()});
  return rows;
}

// frame,rate_percent
inline std::string rate_series_csv(std::span<const FrameRatePoint> rows) {
  std::string csv = "frame,rate_percent\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f\n", r.frame, r.rate_percent);
    csv += buf;
  }
  return csv;
}

struct SeriesSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

inline SeriesSummary summarize(std::span<const FrameRatePoint> rows, FrameType type) {
  SeriesSummary s;
  for (const auto& r : rows)
    if (r.type == type) {
      s.mean += r.rate_percent;
      ++s.count;
    }
  if (s.count == 0) return s;
  s.mean /= static_cast<double>(s.count);
  for (const auto& r : rows)
    if (r.type == type) s.stddev += (r.rate_percent - s.mean) * (r.rate_percent - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(s.count));
  return s;
}

}  // namespace nlvc
