#pragma once

// Y4M (YUV4MPEG2) reading and writing for 8-bit 4:2:0 and monochrome video.

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nlvc/error.hpp"

namespace nlvc {

enum class Chroma : std::uint8_t { mono = 0, yuv420 = 1 };

struct FramePlane {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> samples;  // row-major, width * height

  FramePlane() = default;
  FramePlane(std::uint32_t w, std::uint32_t h, std::uint8_t fill = 0)
      : width(w), height(h), samples(std::size_t{w} * h, fill) {}
  FramePlane(std::uint32_t w, std::uint32_t h, std::vector<std::uint8_t> data)
      : width(w), height(h), samples(std::move(data)) {
    if (samples.size() != std::size_t{w} * h)
      throw ContractViolation("FramePlane: sample count does not match dimensions");
  }

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::uint8_t at(std::size_t row, std::size_t col) const { return samples[row * width + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) { return samples[row * width + col]; }

  friend bool operator==(const FramePlane&, const FramePlane&) = default;
};

inline std::uint32_t chroma_extent(std::uint32_t luma_extent) { return (luma_extent + 1) / 2; }

// Monochrome frames carry empty (0x0) U and V planes.
struct FrameYUV420 {
  FramePlane y;
  FramePlane u;
  FramePlane v;

  FrameYUV420() = default;
  FrameYUV420(FramePlane y_, FramePlane u_, FramePlane v_)
      : y(std::move(y_)), u(std::move(u_)), v(std::move(v_)) {}

  static FrameYUV420 blank(std::uint32_t width, std::uint32_t height, Chroma chroma,
                           std::uint8_t luma = 0, std::uint8_t chroma_fill = 128) {
    if (chroma == Chroma::mono) return {FramePlane(width, height, luma), {}, {}};
    const auto cw = chroma_extent(width), ch = chroma_extent(height);
    return {FramePlane(width, height, luma), FramePlane(cw, ch, chroma_fill),
            FramePlane(cw, ch, chroma_fill)};
  }

  const FramePlane& plane(std::size_t index) const { return index == 0 ? y : index == 1 ? u : v; }
  FramePlane& plane(std::size_t index) { return index == 0 ? y : index == 1 ? u : v; }

  friend bool operator==(const FrameYUV420&, const FrameYUV420&) = default;
};

struct VideoHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::optional<std::size_t> frame_count;  // Y4M does not record it
  Chroma chroma = Chroma::yuv420;
  std::string framerate = "30:1";
  // Every header tag in stream order, verbatim (e.g. "W352", "F30:1", "Ip", "XCOLORRANGE=FULL").
  std::vector<std::string> tags;

  std::size_t plane_count() const noexcept { return chroma == Chroma::mono ? 1 : 3; }
  std::uint32_t chroma_width() const noexcept {
    return chroma == Chroma::mono ? 0 : chroma_extent(width);
  }
  std::uint32_t chroma_height() const noexcept {
    return chroma == Chroma::mono ? 0 : chroma_extent(height);
  }
  std::size_t frame_payload_bytes() const noexcept {
    return std::size_t{width} * height + 2 * std::size_t{chroma_width()} * chroma_height();
  }
};

namespace detail {

inline bool parse_positive(std::string_view digits, std::uint32_t& out) {
  if (digits.empty() || digits.size() > 9) return false;
  std::uint32_t value = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<std::uint32_t>(c - '0');
  }
  if (value == 0) return false;
  out = value;
  return true;
}

inline bool is_rational(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i)
    if (i != colon && (text[i] < '0' || text[i] > '9')) return false;
  return true;
}

}  // namespace detail

// Reads the signature line. On return the stream sits at the first FRAME marker.
// Offsets in errors are relative to the stream position at entry.
inline VideoHeader parse_y4m_header(std::istream& in) {
  static constexpr std::string_view kSignature = "YUV4MPEG2";
  std::size_t offset = 0;
  for (; offset < kSignature.size(); ++offset) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("truncated Y4M signature", offset);
    if (static_cast<char>(c) != kSignature[offset]) throw ParseError("bad Y4M signature", offset);
  }

  if (const int next = in.peek(); next != ' ' && next != '\n')
    throw ParseError("bad Y4M signature", offset);

  VideoHeader header;
  bool have_w = false, have_h = false;
  std::string token;
  std::size_t token_start = offset;
  std::string chroma_tag = "420jpeg";

  auto finish_token = [&]() {
    if (token.empty()) return;
    const char key = token[0];
    const std::string_view value = std::string_view(token).substr(1);
    switch (key) {
      case 'W':
        if (!detail::parse_positive(value, header.width))
          throw ParseError("invalid W tag '" + token + "'", token_start);
        have_w = true;
        break;
      case 'H':
        if (!detail::parse_positive(value, header.height))
          throw ParseError("invalid H tag '" + token + "'", token_start);
        have_h = true;
        break;
      case 'F':
        if (!detail::is_rational(value))
          throw ParseError("invalid F tag '" + token + "'", token_start);
        header.framerate = std::string(value);
        break;
      case 'C':
        chroma_tag = std::string(value);
        break;
      default:
        break;
    }
    header.tags.push_back(token);
    token.clear();
  };

  for (;;) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof())
      throw ParseError("unterminated Y4M header line", offset);
    ++offset;
    if (c == '\n') {
      finish_token();
      break;
    }
    if (c == ' ') {
      finish_token();
      token_start = offset;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }

  if (!have_w || !have_h) throw ParseError("Y4M header lacks W or H tag", offset);

  if (chroma_tag == "420" || chroma_tag == "420jpeg" || chroma_tag == "420paldv" ||
      chroma_tag == "420mpeg2") {
    header.chroma = Chroma::yuv420;
  } else if (chroma_tag == "mono") {
    header.chroma = Chroma::mono;
  } else {
    throw UnsupportedFormat("unsupported Y4M chroma tag C" + chroma_tag);
  }
  if (header.chroma == Chroma::yuv420 && (header.width % 2 != 0 || header.height % 2 != 0))
    throw UnsupportedFormat("odd frame dimensions " + std::to_string(header.width) + "x" +
                            std::to_string(header.height) + " are not supported for 4:2:0");
  return header;
}

// Returns std::nullopt when the stream ends cleanly before a FRAME marker.
inline std::optional<FrameYUV420> read_frame(std::istream& in, const VideoHeader& header) {
  static constexpr std::string_view kMarker = "FRAME";
  std::size_t got = 0;
  for (; got < kMarker.size(); ++got) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (got == 0) return std::nullopt;
      throw TruncationError("truncated FRAME marker", kMarker.size(), got);
    }
    if (static_cast<char>(c) != kMarker[got]) throw ParseError("expected FRAME marker", got);
  }
  for (;;) {  // frame parameters are ignored
    const int c = in.get();
    if (c == std::char_traits<char>::eof())
      throw TruncationError("unterminated FRAME line", got + 1, got);
    ++got;
    if (c == '\n') break;
  }

  const std::size_t expected = header.frame_payload_bytes();
  std::size_t consumed = 0;
  auto read_plane = [&](std::uint32_t w, std::uint32_t h) {
    FramePlane plane(w, h);
    if (plane.empty()) return plane;
    in.read(reinterpret_cast<char*>(plane.samples.data()),
            static_cast<std::streamsize>(plane.size()));
    consumed += static_cast<std::size_t>(in.gcount());
    if (in.gcount() != static_cast<std::streamsize>(plane.size()))
      throw TruncationError("truncated frame payload", expected, consumed);
    return plane;
  };
  FramePlane y = read_plane(header.width, header.height);
  FramePlane u = read_plane(header.chroma_width(), header.chroma_height());
  FramePlane v = read_plane(header.chroma_width(), header.chroma_height());
  return FrameYUV420(std::move(y), std::move(u), std::move(v));
}

inline void write_y4m_header(std::ostream& out, const VideoHeader& header) {
  std::string line = "YUV4MPEG2";
  bool have_w = false, have_h = false, have_f = false, have_c = false;
  for (const auto& tag : header.tags) {
    if (tag.empty()) continue;
    line += ' ';
    switch (tag[0]) {
      case 'W':
        line += 'W' + std::to_string(header.width);
        have_w = true;
        break;
      case 'H':
        line += 'H' + std::to_string(header.height);
        have_h = true;
        break;
      case 'F':
        line += 'F' + header.framerate;
        have_f = true;
        break;
      case 'C':
        line += tag;
        have_c = true;
        break;
      default:
        line += tag;
    }
  }
  if (!have_w) line += " W" + std::to_string(header.width);
  if (!have_h) line += " H" + std::to_string(header.height);
  if (!have_f) line += " F" + header.framerate;
  if (!have_c) line += header.chroma == Chroma::mono ? " Cmono" : " C420";
  line += '\n';
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
}

// Validates every plane before emitting anything.
inline void write_frame(std::ostream& out, const VideoHeader& header, const FrameYUV420& frame) {
  auto check = [](const FramePlane& p, std::uint32_t w, std::uint32_t h, const char* name) {
    if (p.width != w || p.height != h || p.samples.size() != std::size_t{w} * h)
      throw ContractViolation(std::string("write_frame: ") + name + " plane is " +
                              std::to_string(p.width) + "x" + std::to_string(p.height) +
                              ", header implies " + std::to_string(w) + "x" + std::to_string(h));
  };
  check(frame.y, header.width, header.height, "Y");
  check(frame.u, header.chroma_width(), header.chroma_height(), "U");
  check(frame.v, header.chroma_width(), header.chroma_height(), "V");

  out.write("FRAME\n", 6);
  for (const FramePlane* p : {&frame.y, &frame.u, &frame.v})
    if (!p->empty())
      out.write(reinterpret_cast<const char*>(p->samples.data()),
                static_cast<std::streamsize>(p->size()));
}

struct Video {
  VideoHeader header;
  std::vector<FrameYUV420> frames;
};

inline Video read_y4m(std::istream& in) {
  Video video{parse_y4m_header(in), {}};
  while (auto frame = read_frame(in, video.header)) video.frames.push_back(std::move(*frame));
  video.header.frame_count = video.frames.size();
  return video;
}

inline void write_y4m(std::ostream& out, const Video& video) {
  write_y4m_header(out, video.header);
  for (const auto& frame : video.frames) write_frame(out, video.header, frame);
}

}  // namespace nlvc
