#pragma once

// Video codec: GOP structure, group-wise coding of every 32x32 patch of every plane, and the
// ".nlvc" container.
//
// Container, little-endian throughout:
//   header (27 bytes)
//     "NLVC" | u16 version | u16 width | u16 height | u32 frame_count | u8 chroma (0 mono,
//     1 yuv420) | u8 delta | u16 gop_length | u8 model_kind | u64 model_hash
//   per frame
//     u8 frame_type (0 = I, 1 = P)
//     per plane (Y, then U and V unless mono), per patch in raster order:
//       u32 byte length | range-coded bytes (always 1024 symbols)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlvc/entropy_models.hpp"
#include "nlvc/error.hpp"
#include "nlvc/frame_io.hpp"
#include "nlvc/group_schedule.hpp"
#include "nlvc/parallel.hpp"
#include "nlvc/range_coder.hpp"
#include "nlvc/tiling.hpp"
#include "nlvc/tokenizer.hpp"
#include "nlvc/transformer.hpp"
#include "nlvc/xxhash64.hpp"

namespace nlvc {

enum class FrameType : std::uint8_t { I = 0, P = 1 };

inline bool is_intra_frame(std::size_t index, std::size_t gop_length) {
  return index == 0 || (gop_length > 0 && index % gop_length == 0);
}

struct BitstreamHeader {
  static constexpr char kMagic[4] = {'N', 'L', 'V', 'C'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kSize = 27;

  std::uint16_t version = kVersion;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint32_t frame_count = 0;
  Chroma chroma = Chroma::yuv420;
  std::uint8_t delta = 2;
  std::uint16_t gop_length = 0;
  ModelKind model_kind = ModelKind::adaptive;
  std::uint64_t model_hash = 0;

  std::size_t plane_count() const { return chroma == Chroma::mono ? 1 : 3; }
  std::uint32_t plane_width(std::size_t plane) const { return plane == 0 ? width : chroma_extent(width); }
  std::uint32_t plane_height(std::size_t plane) const { return plane == 0 ? height : chroma_extent(height); }
  std::size_t group_count() const { return std::size_t{delta} * (kPatchSide - 1) + kPatchSide; }

  void write(std::vector<std::uint8_t>& out) const {
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    detail::put_le(out, version);
    detail::put_le(out, width);
    detail::put_le(out, height);
    detail::put_le(out, frame_count);
    detail::put_le(out, static_cast<std::uint8_t>(chroma));
    detail::put_le(out, delta);
    detail::put_le(out, gop_length);
    detail::put_le(out, static_cast<std::uint8_t>(model_kind));
    detail::put_le(out, model_hash);
  }

  static BitstreamHeader parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
      throw FormatError("bitstream: bad magic");
    if (bytes.size() < kSize) throw FormatError("bitstream: truncated header");
    BitstreamHeader h;
    h.version = detail::get_le<std::uint16_t>(bytes, 4);
    if (h.version != kVersion) throw FormatError("bitstream: unsupported version " + std::to_string(h.version));
    h.width = detail::get_le<std::uint16_t>(bytes, 6);
    h.height = detail::get_le<std::uint16_t>(bytes, 8);
    h.frame_count = detail::get_le<std::uint32_t>(bytes, 10);
    const auto chroma = detail::get_le<std::uint8_t>(bytes, 14);
    h.delta = detail::get_le<std::uint8_t>(bytes, 15);
    h.gop_length = detail::get_le<std::uint16_t>(bytes, 16);
    const auto kind = detail::get_le<std::uint8_t>(bytes, 18);
    h.model_hash = detail::get_le<std::uint64_t>(bytes, 19);
    if (chroma > 1) throw FormatError("bitstream: invalid chroma code " + std::to_string(chroma));
    if (kind > 2) throw FormatError("bitstream: invalid model kind " + std::to_string(kind));
    if (h.width == 0 || h.height == 0) throw FormatError("bitstream: zero frame dimension");
    h.chroma = static_cast<Chroma>(chroma);
    h.model_kind = static_cast<ModelKind>(kind);
    return h;
  }

  friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

// Prototype models for I- and P-frames. Every patch is coded with a fresh() replica.
struct ModelSet {
  std::shared_ptr<const EntropyModel> iframe;
  std::shared_ptr<const EntropyModel> pframe;
  ModelKind kind = ModelKind::uniform;
  std::uint64_t hash = 0;

  static ModelSet uniform() {
    auto m = std::make_shared<UniformModel>();
    return {m, m, ModelKind::uniform, 0};
  }

  static ModelSet adaptive() {
    auto m = std::make_shared<AdaptiveModel>();
    return {m, m, ModelKind::adaptive, 0};
  }

  // The P model may lack a reference table; it then codes differences without conditioning.
  static ModelSet transformer(std::shared_ptr<const ModelWeights> iframe_weights,
                              std::shared_ptr<const ModelWeights> pframe_weights) {
    if (!iframe_weights || !pframe_weights) throw ContractViolation("transformer model set needs weights");
    if (iframe_weights->config.has_reference_embedding)
      throw ContractViolation("I-frame weights must not have a reference embedding");
    auto i = std::make_shared<TransformerModel>(std::move(iframe_weights));
    auto p = std::make_shared<TransformerModel>(std::move(pframe_weights));
    return {i, p, ModelKind::transformer, combined_hash(i->content_hash(), p->content_hash())};
  }

  static std::uint64_t combined_hash(std::uint64_t iframe_hash, std::uint64_t pframe_hash) {
    std::vector<std::uint8_t> bytes;
    detail::put_le(bytes, iframe_hash);
    detail::put_le(bytes, pframe_hash);
    return xxhash64(bytes);
  }

  const EntropyModel& for_frame(FrameType type) const { return type == FrameType::I ? *iframe : *pframe; }
};

struct CodecConfig {
  std::size_t delta = 2;
  std::size_t gop_length = 0;  // 0: only the first frame is intra-coded
  std::size_t threads = 0;     // see resolve_threads
};

struct PatchId {
  std::size_t frame = 0;
  std::size_t plane = 0;
  std::size_t patch = 0;  // raster index within the plane
  friend bool operator==(const PatchId&, const PatchId&) = default;
};

// Sees the context of every group step before the model is queried. Must be thread-safe when
// more than one worker thread is used.
using ContextObserver = std::function<void(const ModelContext&)>;
using VideoContextObserver = std::function<void(const PatchId&, const ModelContext&)>;

namespace detail {

inline void check_patch_inputs(const TokenGrid& tokens, const std::optional<TokenGrid>& reference) {
  if (reference.has_value() != (tokens.kind == GridKind::pframe))
    throw ContractViolation("encode_patch: a reference grid is required exactly for P-frame patches");
  if (tokens.kind == GridKind::reference) throw ContractViolation("encode_patch: cannot code a reference grid");
  if (reference && reference->kind != GridKind::reference)
    throw ContractViolation("encode_patch: reference grid has the wrong kind");
  for (Token t : tokens.tokens)
    if (t >= kAlphabetSize) throw ContractViolation("encode_patch: token grid contains masked or invalid ids");
}

}  // namespace detail

// Codes the 1024 tokens of one patch group by group into an independent stream.
inline CodedStream encode_patch(const TokenGrid& tokens, const std::optional<TokenGrid>& reference,
                                EntropyModel& model, const GroupSchedule& schedule,
                                const ContextObserver& observer = {}, double* ideal_bits = nullptr) {
  detail::check_patch_inputs(tokens, reference);
  auto ctx = ModelContext::start(schedule, tokens.kind, reference);
  RangeEncoder encoder;
  std::vector<Symbol> symbols;
  double ideal = 0.0;
  for (std::size_t g = 0; g < schedule.group_count(); ++g) {
    if (observer) observer(ctx);
    const auto cdfs = model.predict_group(ctx);
    const auto& positions = schedule.group(g);
    if (cdfs.size() != positions.size()) throw ContractViolation("model returned wrong number of CDFs");
    symbols.resize(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) {
      symbols[k] = tokens[schedule.flat_index(positions[k])];
      encoder.encode(cdfs[k], symbols[k]);
      ideal += cdfs[k].code_length(symbols[k]);
    }
    model.observe_group(ctx, symbols);
    ctx.reveal(symbols);
  }
  if (ideal_bits) *ideal_bits = ideal;
  return std::move(encoder).finish();
}

inline TokenGrid decode_patch(const CodedStream& stream, const std::optional<TokenGrid>& reference,
                              EntropyModel& model, const GroupSchedule& schedule,
                              const ContextObserver& observer = {}) {
  if (reference && reference->kind != GridKind::reference)
    throw ContractViolation("decode_patch: reference grid has the wrong kind");
  if (stream.symbol_count != kPatchArea)
    throw ContractViolation("decode_patch: a patch stream holds exactly 1024 symbols");
  auto ctx = ModelContext::start(schedule, reference ? GridKind::pframe : GridKind::iframe, reference);
  RangeDecoder decoder(stream.bytes);
  std::vector<Symbol> symbols;
  for (std::size_t g = 0; g < schedule.group_count(); ++g) {
    if (observer) observer(ctx);
    const auto cdfs = model.predict_group(ctx);
    const auto& positions = schedule.group(g);
    if (cdfs.size() != positions.size()) throw ContractViolation("model returned wrong number of CDFs");
    symbols.resize(positions.size());
    for (std::size_t k = 0; k < positions.size(); ++k) symbols[k] = decoder.decode(cdfs[k]);
    if (decoder.overrun())
      throw CorruptStream("decode_patch: stream exhausted at group " + std::to_string(g));
    model.observe_group(ctx, symbols);
    ctx.reveal(symbols);
  }
  return ctx.tokens;
}

struct PatchTrace {
  PatchId id;
  FrameType type = FrameType::I;
  std::size_t patch_row = 0;
  std::size_t patch_col = 0;
  std::size_t coded_bits = 0;
  double ideal_bits = 0.0;
};

struct EncodeTrace {
  std::vector<FrameType> frame_types;
  std::vector<PatchTrace> patches;
};

namespace detail {

struct PlaneTiles {
  TilingLayout layout;
  std::vector<Patch> patches;
};

inline PlaneTiles tile(const FramePlane& plane) {
  auto [padded, layout] = pad_plane(plane);
  auto patches = extract_patches(padded, layout);
  return {layout, std::move(patches)};
}

inline void check_frame_geometry(const FrameYUV420& f, std::uint32_t w, std::uint32_t h, Chroma chroma) {
  const bool mono = chroma == Chroma::mono;
  const std::uint32_t cw = mono ? 0 : chroma_extent(w), ch = mono ? 0 : chroma_extent(h);
  if (f.y.width != w || f.y.height != h || f.u.width != cw || f.u.height != ch || f.v.width != cw ||
      f.v.height != ch || f.y.size() != std::size_t{w} * h || f.u.size() != std::size_t{cw} * ch ||
      f.v.size() != std::size_t{cw} * ch)
    throw ContractViolation("encode_video: frames must share the first frame's geometry");
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t offset = 0)
      : bytes_(bytes), offset_(offset) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - offset_ < n)
      throw FormatError(std::string("bitstream: truncated ") + what + " at byte " + std::to_string(offset_));
    auto out = bytes_.subspan(offset_, n);
    offset_ += n;
    return out;
  }
  template <class T>
  T read(const char* what) {
    auto raw = take(sizeof(T), what);
    return get_le<T>(raw, 0);
  }
  std::size_t offset() const { return offset_; }
  bool at_end() const { return offset_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t offset_;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_video(const std::vector<FrameYUV420>& frames, Chroma chroma,
                                              const CodecConfig& config, const ModelSet& models,
                                              EncodeTrace* trace = nullptr,
                                              const VideoContextObserver& observer = {}) {
  if (frames.empty()) throw ContractViolation("encode_video: no frames");
  if (config.delta > 255) throw ContractViolation("encode_video: delta must fit in 8 bits");
  if (config.gop_length > 0xFFFF) throw ContractViolation("encode_video: gop_length must fit in 16 bits");
  const auto w = frames[0].y.width, h = frames[0].y.height;
  if (w == 0 || h == 0 || w > 0xFFFF || h > 0xFFFF)
    throw ContractViolation("encode_video: frame dimensions must be in [1, 65535]");
  for (const auto& f : frames) detail::check_frame_geometry(f, w, h, chroma);

  BitstreamHeader header;
  header.width = static_cast<std::uint16_t>(w);
  header.height = static_cast<std::uint16_t>(h);
  header.frame_count = static_cast<std::uint32_t>(frames.size());
  header.chroma = chroma;
  header.delta = static_cast<std::uint8_t>(config.delta);
  header.gop_length = static_cast<std::uint16_t>(config.gop_length);
  header.model_kind = models.kind;
  header.model_hash = models.hash;

  std::vector<std::uint8_t> out;
  header.write(out);
  const auto schedule = build_schedule(config.delta);
  const std::size_t threads = resolve_threads(config.threads);
  if (trace) *trace = {};

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const FrameType type = is_intra_frame(t, config.gop_length) ? FrameType::I : FrameType::P;
    out.push_back(static_cast<std::uint8_t>(type));
    if (trace) trace->frame_types.push_back(type);
    const EntropyModel& prototype = models.for_frame(type);

    for (std::size_t p = 0; p < header.plane_count(); ++p) {
      const auto current = detail::tile(frames[t].plane(p));
      std::optional<detail::PlaneTiles> previous;
      if (type == FrameType::P) previous = detail::tile(frames[t - 1].plane(p));

      const std::size_t n = current.patches.size();
      std::vector<CodedStream> streams(n);
      std::vector<double> ideal(n, 0.0);
      parallel_for(n, threads, [&](std::size_t k) {
        auto model = prototype.fresh();
        TokenGrid tokens;
        std::optional<TokenGrid> reference;
        if (type == FrameType::I) {
          tokens = tokenize_i(current.patches[k]);
        } else {
          tokens = tokenize_p(current.patches[k], previous->patches[k]);
          reference = reference_tokens(previous->patches[k]);
        }
        ContextObserver patch_observer;
        if (observer) patch_observer = [&, id = PatchId{t, p, k}](const ModelContext& c) { observer(id, c); };
        streams[k] = encode_patch(tokens, reference, *model, schedule, patch_observer, &ideal[k]);
      });

      for (std::size_t k = 0; k < n; ++k) {
        detail::put_le(out, static_cast<std::uint32_t>(streams[k].bytes.size()));
        out.insert(out.end(), streams[k].bytes.begin(), streams[k].bytes.end());
        if (trace)
          trace->patches.push_back({PatchId{t, p, k}, type, k / current.layout.patches_per_row,
                                    k % current.layout.patches_per_row, streams[k].bits(), ideal[k]});
      }
    }
  }
  return out;
}

inline std::vector<std::uint8_t> encode_video(const Video& video, const CodecConfig& config,
                                              const ModelSet& models, EncodeTrace* trace = nullptr) {
  return encode_video(video.frames, video.header.chroma, config, models, trace);
}

struct DecodedVideo {
  BitstreamHeader header;
  std::vector<FrameYUV420> frames;
  std::vector<FrameType> frame_types;
};

inline BitstreamHeader read_header(std::span<const std::uint8_t> bytes) { return BitstreamHeader::parse(bytes); }

// Refuses to decode (before producing any frame) when the models do not match the header.
inline DecodedVideo decode_video(std::span<const std::uint8_t> bytes, const ModelSet& models,
                                 std::size_t threads = 0, const VideoContextObserver& observer = {}) {
  const auto header = BitstreamHeader::parse(bytes);
  if (header.model_kind != models.kind)
    throw HashMismatch(std::string("bitstream was coded with the ") + model_kind_name(header.model_kind) +
                       " model, decoder was given " + model_kind_name(models.kind));
  if (header.model_hash != models.hash)
    throw HashMismatch("model hash mismatch: stream expects " + std::to_string(header.model_hash) +
                       ", weights provide " + std::to_string(models.hash));

  const auto schedule = build_schedule(header.delta);
  threads = resolve_threads(threads);
  detail::ByteReader reader(bytes, BitstreamHeader::kSize);
  DecodedVideo video{header, {}, {}};
  video.frames.reserve(std::min<std::size_t>(header.frame_count, bytes.size()));

  for (std::size_t t = 0; t < header.frame_count; ++t) {
    const auto type_byte = reader.read<std::uint8_t>("frame type");
    if (type_byte > 1) throw FormatError("bitstream: invalid frame type " + std::to_string(type_byte));
    const auto type = static_cast<FrameType>(type_byte);
    if (type != (is_intra_frame(t, header.gop_length) ? FrameType::I : FrameType::P))
      throw FormatError("bitstream: frame " + std::to_string(t) + " type contradicts the GOP structure");
    const EntropyModel& prototype = models.for_frame(type);

    FrameYUV420 frame;
    for (std::size_t p = 0; p < header.plane_count(); ++p) {
      const auto layout = TilingLayout::for_plane(header.plane_width(p), header.plane_height(p));
      const std::size_t n = layout.patch_count();
      std::vector<CodedStream> streams(n);
      for (std::size_t k = 0; k < n; ++k) {
        const auto len = reader.read<std::uint32_t>("patch length");
        const auto payload = reader.take(len, "patch payload");
        streams[k] = CodedStream{{payload.begin(), payload.end()}, kPatchArea};
      }
      std::optional<detail::PlaneTiles> previous;
      if (type == FrameType::P) previous = detail::tile(video.frames[t - 1].plane(p));

      std::vector<Patch> patches(n);
      parallel_for(n, threads, [&](std::size_t k) {
        auto model = prototype.fresh();
        std::optional<TokenGrid> reference;
        if (type == FrameType::P) reference = reference_tokens(previous->patches[k]);
        ContextObserver patch_observer;
        if (observer) patch_observer = [&, id = PatchId{t, p, k}](const ModelContext& c) { observer(id, c); };
        const TokenGrid grid = decode_patch(streams[k], reference, *model, schedule, patch_observer);
        const std::size_t row = k / layout.patches_per_row * kPatchSide;
        const std::size_t col = k % layout.patches_per_row * kPatchSide;
        patches[k] = type == FrameType::I ? detokenize_i(grid, row, col) : detokenize_p(grid, previous->patches[k]);
      });
      frame.plane(p) = reassemble(patches, layout);
    }
    video.frames.push_back(std::move(frame));
    video.frame_types.push_back(type);
  }
  if (!reader.at_end()) throw FormatError("bitstream: trailing bytes after last frame");
  return video;
}

struct PatchRate {
  std::size_t frame = 0;
  FrameType type = FrameType::I;
  std::size_t plane = 0;
  std::size_t patch_row = 0;
  std::size_t patch_col = 0;
  std::size_t bits = 0;
};

struct FrameRate {
  std::size_t frame = 0;
  FrameType type = FrameType::I;
  std::size_t raw_bits = 0;
  std::size_t payload_bits = 0;   // sum of patch stream bits
  std::size_t overhead_bits = 0;  // type byte and length prefixes; frame 0 also carries the header
  std::size_t total_bits() const { return payload_bits + overhead_bits; }
  double rate_percent() const { return 100.0 * static_cast<double>(total_bits()) / static_cast<double>(raw_bits); }
};

struct RateReport {
  BitstreamHeader header;
  std::vector<PatchRate> patches;
  std::vector<FrameRate> frames;
  std::size_t header_bits = 0;
  std::size_t total_bits = 0;  // whole stream
  std::size_t raw_bits = 0;    // 8 bits per sample of Y, U and V

  double video_rate_percent() const { return 100.0 * static_cast<double>(total_bits) / static_cast<double>(raw_bits); }

  std::size_t bits_of(FrameType type) const {
    std::size_t bits = 0;
    for (const auto& f : frames)
      if (f.type == type) bits += f.total_bits();
    return bits;
  }
  double share_of(FrameType type) const {
    return static_cast<double>(bits_of(type)) / static_cast<double>(total_bits);
  }

  // frame,type,plane,patch_row,patch_col,bits
  std::string patch_csv() const {
    std::string csv = "frame,type,plane,patch_row,patch_col,bits\n";
    static constexpr const char* kPlane[] = {"Y", "U", "V"};
    for (const auto& p : patches)
      csv += std::to_string(p.frame) + ',' + (p.type == FrameType::I ? "I" : "P") + ',' + kPlane[p.plane] +
             ',' + std::to_string(p.patch_row) + ',' + std::to_string(p.patch_col) + ',' +
             std::to_string(p.bits) + '\n';
    return csv;
  }
};

// Walks the container without decoding any symbols.
inline RateReport rate_report(std::span<const std::uint8_t> bytes) {
  RateReport report;
  report.header = BitstreamHeader::parse(bytes);
  const auto& h = report.header;
  report.header_bits = BitstreamHeader::kSize * 8;
  detail::ByteReader reader(bytes, BitstreamHeader::kSize);
  std::size_t raw_per_frame = 0;
  for (std::size_t p = 0; p < h.plane_count(); ++p) raw_per_frame += std::size_t{h.plane_width(p)} * h.plane_height(p) * 8;

  for (std::size_t t = 0; t < h.frame_count; ++t) {
    FrameRate frame;
    frame.frame = t;
    frame.raw_bits = raw_per_frame;
    frame.overhead_bits = 8 + (t == 0 ? report.header_bits : 0);
    const auto type_byte = reader.read<std::uint8_t>("frame type");
    if (type_byte > 1) throw FormatError("bitstream: invalid frame type");
    frame.type = static_cast<FrameType>(type_byte);
    for (std::size_t p = 0; p < h.plane_count(); ++p) {
      const auto layout = TilingLayout::for_plane(h.plane_width(p), h.plane_height(p));
      for (std::size_t k = 0; k < layout.patch_count(); ++k) {
        const auto len = reader.read<std::uint32_t>("patch length");
        reader.take(len, "patch payload");
        frame.overhead_bits += 32;
        frame.payload_bits += std::size_t{len} * 8;
        report.patches.push_back({t, frame.type, p, k / layout.patches_per_row, k % layout.patches_per_row,
                                  std::size_t{len} * 8});
      }
    }
    report.raw_bits += frame.raw_bits;
    report.total_bits += frame.total_bits();
    report.frames.push_back(frame);
  }
  if (!reader.at_end()) throw FormatError("bitstream: trailing bytes after last frame");
  return report;
}

}  // namespace nlvc
