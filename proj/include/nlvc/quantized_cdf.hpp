#pragma once

// Integer cumulative frequency tables over the 511-symbol coding alphabet.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nlvc/error.hpp"
#include "nlvc/tokenizer.hpp"

namespace nlvc {

inline constexpr unsigned kCdfPrecisionBits = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecisionBits;

struct QuantizedCdf {
  // cum[s] is the total frequency of symbols < s; cum[kAlphabetSize] == kCdfTotal.
  std::array<std::uint32_t, kAlphabetSize + 1> cum{};

  std::uint32_t low(std::size_t symbol) const { return cum[symbol]; }
  std::uint32_t freq(std::size_t symbol) const { return cum[symbol + 1] - cum[symbol]; }

  // Symbol s with cum[s] <= target < cum[s+1]; target must be < kCdfTotal.
  std::size_t find(std::uint32_t target) const {
    const auto it = std::upper_bound(cum.begin() + 1, cum.end(), target);
    return static_cast<std::size_t>(it - cum.begin()) - 1;
  }

  double code_length(std::size_t symbol) const {
    return -std::log2(static_cast<double>(freq(symbol)) / kCdfTotal);
  }

  bool valid() const {
    if (cum.front() != 0 || cum.back() != kCdfTotal) return false;
    for (std::size_t s = 0; s < kAlphabetSize; ++s)
      if (cum[s + 1] <= cum[s]) return false;
    return true;
  }

  static QuantizedCdf from_frequencies(std::span<const std::uint32_t> freq) {
    if (freq.size() != kAlphabetSize)
      throw ContractViolation("QuantizedCdf: expected 511 frequencies");
    QuantizedCdf cdf;
    for (std::size_t s = 0; s < kAlphabetSize; ++s) cdf.cum[s + 1] = cdf.cum[s] + freq[s];
    if (!cdf.valid()) throw ContractViolation("QuantizedCdf: frequencies must be >= 1 and sum to 65536");
    return cdf;
  }

  friend bool operator==(const QuantizedCdf&, const QuantizedCdf&) = default;
};

// freq_s = max(1, floor(p_s * 65536)); the rounding surplus or deficit is absorbed by the most
// probable symbol (lowest index on ties). If that symbol cannot absorb a surplus on its own the
// remainder is taken from the next largest frequencies, still leaving every symbol >= 1.
inline QuantizedCdf quantize_cdf(std::span<const double> probabilities) {
  if (probabilities.size() != kAlphabetSize)
    throw ContractViolation("quantize_cdf: expected 511 probabilities, got " +
                            std::to_string(probabilities.size()));
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0)
      throw ContractViolation("quantize_cdf: probabilities must be finite and non-negative");
    sum += p;
  }
  if (!(sum > 0.0)) throw ContractViolation("quantize_cdf: probabilities sum to zero");

  std::array<std::uint32_t, kAlphabetSize> freq{};
  std::int64_t total = 0;
  std::size_t argmax = 0;
  for (std::size_t s = 0; s < kAlphabetSize; ++s) {
    const double scaled = probabilities[s] / sum * kCdfTotal;
    // scaled is non-negative, so truncation is floor.
    const auto f = static_cast<std::uint32_t>(std::min<double>(scaled, kCdfTotal));
    freq[s] = std::max<std::uint32_t>(1, f);
    total += freq[s];
    if (probabilities[s] > probabilities[argmax]) argmax = s;
  }

  std::int64_t excess = total - std::int64_t{kCdfTotal};
  if (excess < 0) {
    freq[argmax] += static_cast<std::uint32_t>(-excess);
  } else if (excess > 0) {
    const auto take = std::min<std::int64_t>(excess, std::int64_t{freq[argmax]} - 1);
    freq[argmax] -= static_cast<std::uint32_t>(take);
    excess -= take;
    if (excess > 0) {
      std::array<std::size_t, kAlphabetSize> order{};
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
      for (std::size_t s : order) {
        if (excess == 0) break;
        const auto t = std::min<std::int64_t>(excess, std::int64_t{freq[s]} - 1);
        freq[s] -= static_cast<std::uint32_t>(t);
        excess -= t;
      }
    }
  }
  return QuantizedCdf::from_frequencies(freq);
}

inline QuantizedCdf uniform_cdf() {
  static const QuantizedCdf cdf = [] {
    std::vector<double> p(kAlphabetSize, 1.0 / kAlphabetSize);
    return quantize_cdf(p);
  }();
  return cdf;
}

}  // namespace nlvc
