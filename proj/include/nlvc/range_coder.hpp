#pragma once

// Byte-oriented range coder with carry propagation into the output buffer.
//
// State is a 32-bit window [low, low + range) over an infinite-precision code value, with
// range kept in [2^24, 2^32). Each symbol splits range into 2^16 slots of width range >> 16.
// When range falls below 2^24 the top byte of low is final (modulo a later carry) and is
// shifted out. A carry out of low is added into the bytes already emitted.
//
// The encoder terminates with the shortest byte string that pins a value inside the final
// interval; the decoder reads zeros past the end of the stream. Streams are not
// self-delimiting: the symbol count travels out of band.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nlvc/error.hpp"
#include "nlvc/quantized_cdf.hpp"

namespace nlvc {

struct CodedStream {
  std::vector<std::uint8_t> bytes;
  std::size_t symbol_count = 0;

  std::size_t bits() const noexcept { return bytes.size() * 8; }
  friend bool operator==(const CodedStream&, const CodedStream&) = default;
};

class RangeEncoder {
 public:
  void encode(std::uint32_t cum_low, std::uint32_t freq) {
    if (freq == 0) throw ContractViolation("range coder: symbol has zero frequency");
    const std::uint64_t slot = range_ >> kCdfPrecisionBits;
    low_ += slot * cum_low;
    range_ = static_cast<std::uint32_t>(slot * freq);
    if (low_ >> 32) carry();
    while (range_ < kTop) {
      bytes_.push_back(static_cast<std::uint8_t>(low_ >> 24));
      low_ = (low_ << 8) & 0xFFFFFFFFu;
      range_ <<= 8;
    }
    ++count_;
  }

  void encode(const QuantizedCdf& cdf, Symbol symbol) {
    if (symbol >= kAlphabetSize)
      throw ContractViolation("range coder: symbol " + std::to_string(symbol) + " outside alphabet");
    encode(cdf.low(symbol), cdf.freq(symbol));
  }

  CodedStream finish() && {
    // Fewest leading bytes n such that some v in [low, low + range) has zero low-order bytes.
    for (unsigned n = 0; n <= 4; ++n) {
      const unsigned drop = 32 - 8 * n;
      const std::uint64_t mask = drop == 32 ? 0xFFFFFFFFull : (std::uint64_t{1} << drop) - 1;
      const std::uint64_t v = (low_ + mask) & ~mask;
      if (v < low_ + range_) {
        low_ = v;
        if (low_ >> 32) carry();
        for (unsigned i = 0; i < n; ++i)
          bytes_.push_back(static_cast<std::uint8_t>(low_ >> (24 - 8 * i)));
        break;
      }
    }
    return CodedStream{std::move(bytes_), count_};
  }

 private:
  static constexpr std::uint32_t kTop = 1u << 24;

  void carry() {
    low_ &= 0xFFFFFFFFu;
    // The code value never reaches 1.0, so a carry always lands inside the buffer.
    for (auto it = bytes_.rbegin(); it != bytes_.rend(); ++it)
      if (++*it != 0) return;
    throw ContractViolation("range coder: carry past start of stream");
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> bytes_;
  std::size_t count_ = 0;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  // Never reads out of bounds and always returns a symbol in the alphabet; a mismatched CDF
  // sequence yields garbage symbols, not undefined behaviour.
  Symbol decode(const QuantizedCdf& cdf) {
    const std::uint32_t slot = range_ >> kCdfPrecisionBits;
    std::uint32_t target = code_ / slot;
    if (target >= kCdfTotal) target = kCdfTotal - 1;
    const std::size_t symbol = cdf.find(target);
    code_ -= slot * cdf.low(symbol);
    range_ = slot * cdf.freq(symbol);
    while (range_ < kTop) {
      code_ = (code_ << 8) | next_byte();
      range_ <<= 8;
    }
    return static_cast<Symbol>(symbol);
  }

  // A valid stream is never read more than 4 bytes past its end.
  bool overrun() const noexcept { return position_ > bytes_.size() + 4; }
  std::size_t consumed() const noexcept { return position_; }

 private:
  static constexpr std::uint32_t kTop = 1u << 24;

  std::uint32_t next_byte() {
    const std::uint32_t b = position_ < bytes_.size() ? bytes_[position_] : 0u;
    ++position_;
    return b;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t position_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

inline CodedStream encode_stream(std::span<const Symbol> symbols, std::span<const QuantizedCdf> cdfs) {
  if (symbols.size() != cdfs.size())
    throw ContractViolation("encode_stream: symbol and CDF sequences differ in length");
  RangeEncoder encoder;
  for (std::size_t i = 0; i < symbols.size(); ++i) encoder.encode(cdfs[i], symbols[i]);
  return std::move(encoder).finish();
}

// The provider receives the index of the next symbol and everything decoded so far.
using CdfProvider = std::function<QuantizedCdf(std::size_t, std::span<const Symbol>)>;

inline std::vector<Symbol> decode_stream(const CodedStream& stream, const CdfProvider& next_cdf) {
  RangeDecoder decoder(stream.bytes);
  std::vector<Symbol> symbols;
  symbols.reserve(stream.symbol_count);
  for (std::size_t i = 0; i < stream.symbol_count; ++i) {
    symbols.push_back(decoder.decode(next_cdf(i, symbols)));
    if (decoder.overrun())
      throw CorruptStream("decode_stream: stream exhausted after " + std::to_string(i + 1) + " of " +
                          std::to_string(stream.symbol_count) + " symbols");
  }
  return symbols;
}

inline double ideal_code_length(std::span<const Symbol> symbols, std::span<const QuantizedCdf> cdfs) {
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) bits += cdfs[i].code_length(symbols[i]);
  return bits;
}

}  // namespace nlvc
