#include <gtest/gtest.h>

#include <sstream>

#include "nlvc/frame_io.hpp"
#include "support/fixtures.hpp"

using namespace nlvc;

namespace {

std::istringstream stream_of(const std::string& s) { return std::istringstream(s, std::ios::binary); }

std::string two_by_two() {
  std::string s = "YUV4MPEG2 W2 H2 F25:1 C420jpeg\nFRAME\n";
  s += std::string{'\x01', '\x02', '\x03', '\x04', '\x05', '\x06'};
  return s;
}

}  // namespace

TEST(Y4mHeader, TruncatedSignatureReportsOffset) {
  auto in = stream_of("YUV4MPEG");
  try {
    parse_y4m_header(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
}

TEST(Y4mHeader, WrongSignatureByte) {
  auto in = stream_of("YUV4MPEG3 W2 H2\n");
  try {
    parse_y4m_header(in);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 8u);
  }
}

TEST(Y4mHeader, MissingDimensions) {
  auto in = stream_of("YUV4MPEG2 W2\n");
  EXPECT_THROW(parse_y4m_header(in), ParseError);
  auto bad = stream_of("YUV4MPEG2 Wx H2\n");
  EXPECT_THROW(parse_y4m_header(bad), ParseError);
  auto zero = stream_of("YUV4MPEG2 W0 H2\n");
  EXPECT_THROW(parse_y4m_header(zero), ParseError);
}

TEST(Y4mHeader, ChromaTags) {
  for (const char* tag : {"C420", "C420jpeg", "C420paldv", "C420mpeg2"}) {
    auto in = stream_of(std::string("YUV4MPEG2 W4 H4 ") + tag + "\n");
    EXPECT_EQ(parse_y4m_header(in).chroma, Chroma::yuv420) << tag;
  }
  auto mono = stream_of("YUV4MPEG2 W3 H5 Cmono\n");
  const auto h = parse_y4m_header(mono);
  EXPECT_EQ(h.chroma, Chroma::mono);
  EXPECT_EQ(h.frame_payload_bytes(), 15u);
  auto c444 = stream_of("YUV4MPEG2 W4 H4 C444\n");
  EXPECT_THROW(parse_y4m_header(c444), UnsupportedFormat);
  auto odd = stream_of("YUV4MPEG2 W5 H4 C420\n");
  EXPECT_THROW(parse_y4m_header(odd), UnsupportedFormat);
}

TEST(Y4mHeader, DefaultChromaIs420) {
  auto in = stream_of("YUV4MPEG2 W4 H2\n");
  const auto h = parse_y4m_header(in);
  EXPECT_EQ(h.chroma, Chroma::yuv420);
  EXPECT_EQ(h.chroma_width(), 2u);
  EXPECT_EQ(h.chroma_height(), 1u);
}

TEST(Y4mRead, TwoByTwoFrame) {
  auto in = stream_of(two_by_two());
  const auto video = read_y4m(in);
  ASSERT_EQ(video.frames.size(), 1u);
  EXPECT_EQ(video.header.frame_count, 1u);
  const auto& f = video.frames[0];
  EXPECT_EQ(f.y.samples, (std::vector<std::uint8_t>{1, 2, 3, 4}));
  EXPECT_EQ(f.u.samples, (std::vector<std::uint8_t>{5}));
  EXPECT_EQ(f.v.samples, (std::vector<std::uint8_t>{6}));
}

TEST(Y4mRead, TruncatedPayload) {
  std::string s = "YUV4MPEG2 W2 H2 C420\nFRAME\n";
  s += std::string{'\x01', '\x02', '\x03'};
  auto in = stream_of(s);
  try {
    read_y4m(in);
    FAIL();
  } catch (const TruncationError& e) {
    EXPECT_EQ(e.expected(), 6u);
    EXPECT_EQ(e.actual(), 3u);
  }
}

TEST(Y4mRead, FrameParametersAreAccepted) {
  std::string s = "YUV4MPEG2 W2 H2 C420\nFRAME Ixyz\n";
  s += std::string(6, '\x09');
  auto in = stream_of(s);
  EXPECT_EQ(read_y4m(in).frames.size(), 1u);
}

TEST(Y4mRead, BadFrameMarker) {
  std::string s = "YUV4MPEG2 W2 H2 C420\nFRAMX\n";
  s += std::string(6, '\x09');
  auto in = stream_of(s);
  EXPECT_ANY_THROW(read_y4m(in));
}

TEST(Y4mWrite, PreservesFramerateAndTags) {
  auto in = stream_of("YUV4MPEG2 W2 H2 F25:1 Ip A1:1 C420jpeg XYSCSS=420JPEG\nFRAME\n" +
                      std::string{'\x01', '\x02', '\x03', '\x04', '\x05', '\x06'});
  const auto video = read_y4m(in);
  EXPECT_EQ(video.header.framerate, "25:1");
  std::ostringstream out(std::ios::binary);
  write_y4m(out, video);
  const std::string payload{'\x01', '\x02', '\x03', '\x04', '\x05', '\x06'};
  EXPECT_EQ(out.str(), "YUV4MPEG2 W2 H2 F25:1 Ip A1:1 C420jpeg XYSCSS=420JPEG\nFRAME\n" + payload);
}

TEST(Y4mWrite, RejectsMismatchedPlaneBeforeWriting) {
  VideoHeader header;
  header.width = 4;
  header.height = 4;
  auto frame = FrameYUV420::blank(4, 4, Chroma::yuv420);
  frame.v = FramePlane(3, 2);
  std::ostringstream out(std::ios::binary);
  EXPECT_THROW(write_frame(out, header, frame), ContractViolation);
  EXPECT_TRUE(out.str().empty());
}

TEST(Y4mRoundTrip, SyntheticVideos) {
  for (Chroma chroma : {Chroma::yuv420, Chroma::mono}) {
    auto video = fixtures::make_video(fixtures::make_fixture(fixtures::Fixture::moving_square, 50, 40, 3, chroma),
                                     chroma);
    std::ostringstream out(std::ios::binary);
    write_y4m(out, video);
    auto in = stream_of(out.str());
    const auto back = read_y4m(in);
    EXPECT_EQ(back.header.width, 50u);
    EXPECT_EQ(back.header.chroma, chroma);
    EXPECT_EQ(back.frames, video.frames);
  }
}
