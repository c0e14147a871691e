#include <gtest/gtest.h>

#include <random>

#include "nlvc/range_coder.hpp"

using namespace nlvc;

namespace {

QuantizedCdf random_cdf(std::mt19937_64& rng) {
  std::vector<double> p(kAlphabetSize);
  std::exponential_distribution<double> d(1.0);
  const double sharp = 1.0 + static_cast<double>(rng() % 12);
  for (auto& x : p) x = std::pow(d(rng), sharp);
  return quantize_cdf(p);
}

Symbol sample(const QuantizedCdf& cdf, std::mt19937_64& rng) {
  return static_cast<Symbol>(cdf.find(static_cast<std::uint32_t>(rng() % kCdfTotal)));
}

}  // namespace

TEST(RangeCoder, EmptyStream) {
  RangeEncoder enc;
  const auto s = std::move(enc).finish();
  EXPECT_LE(s.bytes.size(), 8u);
  EXPECT_EQ(s.symbol_count, 0u);
}

TEST(RangeCoder, HighlyProbableSymbolsAreNearlyFree) {
  std::vector<double> p(kAlphabetSize, 0.0);
  p[42] = 1.0;
  const auto cdf = quantize_cdf(p);
  ASSERT_EQ(cdf.freq(42), 65026u);
  std::vector<Symbol> symbols(1000, 42);
  std::vector<QuantizedCdf> cdfs(1000, cdf);
  const auto s = encode_stream(symbols, cdfs);
  EXPECT_LE(s.bytes.size(), 10u);
  EXPECT_EQ(decode_stream(s, [&](std::size_t, std::span<const Symbol>) { return cdf; }), symbols);
}

TEST(RangeCoder, UniformStreamRate) {
  std::mt19937_64 rng(11);
  const auto cdf = uniform_cdf();
  std::vector<Symbol> symbols(4096);
  for (auto& s : symbols) s = static_cast<Symbol>(rng() % kAlphabetSize);
  std::vector<QuantizedCdf> cdfs(symbols.size(), cdf);
  const auto s = encode_stream(symbols, cdfs);
  const double bps = static_cast<double>(s.bits()) / 4096.0;
  EXPECT_GE(bps, 8.99);
  EXPECT_LE(bps, 9.02);
  EXPECT_EQ(decode_stream(s, [&](std::size_t, std::span<const Symbol>) { return cdf; }), symbols);
}

TEST(RangeCoder, RandomStreamsRoundTripNearIdeal) {
  std::mt19937_64 rng(12);
  std::vector<QuantizedCdf> pool;
  for (int i = 0; i < 32; ++i) pool.push_back(random_cdf(rng));
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = rng() % 3000;
    std::vector<Symbol> symbols(n);
    std::vector<QuantizedCdf> cdfs(n);
    for (std::size_t i = 0; i < n; ++i) {
      cdfs[i] = pool[rng() % pool.size()];
      // Mostly well-predicted symbols, with some worst-case ones sprinkled in.
      symbols[i] = rng() % 8 == 0 ? static_cast<Symbol>(rng() % kAlphabetSize) : sample(cdfs[i], rng);
    }
    const auto s = encode_stream(symbols, cdfs);
    ASSERT_EQ(s.symbol_count, n);
    EXPECT_LE(static_cast<double>(s.bits()), ideal_code_length(symbols, cdfs) + 64.0);
    const auto back = decode_stream(s, [&](std::size_t i, std::span<const Symbol>) { return cdfs[i]; });
    ASSERT_EQ(back, symbols) << "trial " << trial;
  }
}

TEST(RangeCoder, CarryPropagation) {
  // Top-of-range symbols at minimum frequency push low upward and force carries.
  std::vector<double> p(kAlphabetSize, 1.0);
  p[0] = 1e9;
  const auto cdf = quantize_cdf(p);
  std::vector<Symbol> symbols;
  for (int i = 0; i < 5000; ++i) symbols.push_back(i % 3 == 0 ? 510 : 0);
  std::vector<QuantizedCdf> cdfs(symbols.size(), cdf);
  const auto s = encode_stream(symbols, cdfs);
  EXPECT_EQ(decode_stream(s, [&](std::size_t, std::span<const Symbol>) { return cdf; }), symbols);
}

TEST(RangeCoder, AdaptiveProviderSeesDecodedPrefix) {
  std::mt19937_64 rng(4);
  std::vector<QuantizedCdf> pool;
  for (int i = 0; i < 4; ++i) pool.push_back(random_cdf(rng));
  std::vector<Symbol> symbols{3};
  for (int i = 1; i < 500; ++i) symbols.push_back(sample(pool[symbols.back() % 4], rng));
  std::vector<QuantizedCdf> cdfs{pool[0]};
  for (std::size_t i = 1; i < symbols.size(); ++i) cdfs.push_back(pool[symbols[i - 1] % 4]);
  const auto s = encode_stream(symbols, cdfs);
  const auto back = decode_stream(s, [&](std::size_t i, std::span<const Symbol> prefix) {
    EXPECT_EQ(prefix.size(), i);
    return i == 0 ? pool[0] : pool[prefix.back() % 4];
  });
  EXPECT_EQ(back, symbols);
}

TEST(RangeCoder, MismatchedCdfsAndGarbageNeverCrash) {
  std::mt19937_64 rng(99);
  std::vector<QuantizedCdf> pool;
  for (int i = 0; i < 8; ++i) pool.push_back(random_cdf(rng));
  for (int trial = 0; trial < 300; ++trial) {
    CodedStream s;
    s.bytes.resize(rng() % 64);
    for (auto& b : s.bytes) b = static_cast<std::uint8_t>(rng());
    s.symbol_count = 1 + rng() % 2000;
    try {
      const auto out = decode_stream(s, [&](std::size_t i, std::span<const Symbol>) { return pool[i % 8]; });
      for (auto sym : out) ASSERT_LT(sym, kAlphabetSize);
    } catch (const CorruptStream&) {
    }
  }
}

TEST(RangeCoder, RejectsBadSymbols) {
  RangeEncoder enc;
  EXPECT_THROW(enc.encode(uniform_cdf(), 511), ContractViolation);
  EXPECT_THROW(enc.encode(0, 0), ContractViolation);
  std::vector<Symbol> one{1};
  EXPECT_THROW(encode_stream(one, {}), ContractViolation);
}
