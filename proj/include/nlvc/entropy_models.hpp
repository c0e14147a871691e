#pragma once

// Probability-model contract shared by encoder and decoder, plus the two non-neural models.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlvc/error.hpp"
#include "nlvc/group_schedule.hpp"
#include "nlvc/quantized_cdf.hpp"
#include "nlvc/tokenizer.hpp"

namespace nlvc {

enum class ModelKind : std::uint8_t { uniform = 0, adaptive = 1, transformer = 2 };

inline const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::uniform: return "uniform";
    case ModelKind::adaptive: return "adaptive";
    case ModelKind::transformer: return "transformer";
  }
  return "unknown";
}

// What the model may see before coding group `step`: ground truth for groups < step and the
// mask token everywhere else.
struct ModelContext {
  TokenGrid tokens = TokenGrid::all_masked(GridKind::iframe);
  std::optional<TokenGrid> reference;  // P-frame patches only
  std::size_t step = 0;
  const GroupSchedule* schedule = nullptr;

  static ModelContext start(const GroupSchedule& schedule, GridKind kind,
                            std::optional<TokenGrid> reference = std::nullopt) {
    if (schedule.patch_side() != kPatchSide)
      throw ContractViolation("ModelContext: schedule must cover a 32x32 patch");
    ModelContext ctx;
    ctx.tokens = TokenGrid::all_masked(kind);
    ctx.reference = std::move(reference);
    ctx.schedule = &schedule;
    return ctx;
  }

  std::span<const GridPosition> group() const { return schedule->group(step); }

  // Writes the symbols of group `step` into the grid and advances to the next step.
  void reveal(std::span<const Symbol> symbols) {
    const auto& positions = schedule->group(step);
    if (symbols.size() != positions.size())
      throw ContractViolation("ModelContext::reveal: symbol count does not match group size");
    for (std::size_t k = 0; k < positions.size(); ++k)
      tokens[schedule->flat_index(positions[k])] = symbols[k];
    ++step;
  }

  friend bool operator==(const ModelContext& a, const ModelContext& b) {
    return a.tokens == b.tokens && a.reference == b.reference && a.step == b.step;
  }
};

class EntropyModel {
 public:
  virtual ~EntropyModel() = default;

  virtual ModelKind kind() const = 0;

  // One CDF per position of group ctx.step, in the schedule's intra-group order. For a given
  // model state the result depends only on ctx.
  virtual std::vector<QuantizedCdf> predict_group(const ModelContext& ctx) = 0;

  // Called once per group with the symbols just coded (encoder) or decoded (decoder), before
  // ctx is advanced.
  virtual void observe_group(const ModelContext& ctx, std::span<const Symbol> symbols) {
    (void)ctx;
    (void)symbols;
  }

  // A replica in the state every patch starts from.
  virtual std::unique_ptr<EntropyModel> fresh() const = 0;

  // Identifies learned parameters; 0 for models without any.
  virtual std::uint64_t content_hash() const { return 0; }
};

class UniformModel final : public EntropyModel {
 public:
  ModelKind kind() const override { return ModelKind::uniform; }

  std::vector<QuantizedCdf> predict_group(const ModelContext& ctx) override {
    return std::vector<QuantizedCdf>(ctx.group().size(), uniform_cdf());
  }

  std::unique_ptr<EntropyModel> fresh() const override { return std::make_unique<UniformModel>(); }
};

// Order-0 Laplace-smoothed symbol counts: p(s) = (n_s + 1) / (N + 511). Separate histograms for
// I-tokens and P-tokens. Counts are halved (rounding up) whenever one reaches 2^16.
class AdaptiveModel final : public EntropyModel {
 public:
  static constexpr std::uint32_t kHalvingThreshold = 1u << 16;

  ModelKind kind() const override { return ModelKind::adaptive; }

  std::vector<QuantizedCdf> predict_group(const ModelContext& ctx) override {
    return std::vector<QuantizedCdf>(ctx.group().size(), current_cdf(ctx.tokens.kind));
  }

  void observe_group(const ModelContext& ctx, std::span<const Symbol> symbols) override {
    for (std::size_t k = 0; k < symbols.size(); ++k) update(ctx.tokens.kind, symbols[k]);
  }

  std::unique_ptr<EntropyModel> fresh() const override { return std::make_unique<AdaptiveModel>(); }

  void update(GridKind kind, Symbol symbol) {
    if (symbol >= kAlphabetSize)
      throw ContractViolation("adaptive_update: symbol " + std::to_string(symbol) + " outside alphabet");
    auto& h = histogram(kind);
    h.cached.reset();
    h.total += 1;
    if (++h.counts[symbol] >= kHalvingThreshold) {
      h.total = 0;
      for (auto& c : h.counts) {
        c = (c + 1) / 2;
        h.total += c;
      }
    }
  }

  std::array<double, kAlphabetSize> probabilities(GridKind kind) const {
    const auto& h = histogram(kind);
    std::array<double, kAlphabetSize> p{};
    const double denom = static_cast<double>(h.total) + kAlphabetSize;
    for (std::size_t s = 0; s < kAlphabetSize; ++s) p[s] = (h.counts[s] + 1.0) / denom;
    return p;
  }

  std::span<const std::uint32_t> counts(GridKind kind) const { return histogram(kind).counts; }

  QuantizedCdf current_cdf(GridKind kind) {
    auto& h = histogram(kind);
    if (!h.cached) h.cached = quantize_cdf(probabilities(kind));
    return *h.cached;
  }

 private:
  struct Histogram {
    std::array<std::uint32_t, kAlphabetSize> counts{};
    std::uint64_t total = 0;
    std::optional<QuantizedCdf> cached;
  };

  Histogram& histogram(GridKind kind) { return kind == GridKind::pframe ? pframe_ : iframe_; }
  const Histogram& histogram(GridKind kind) const {
    return kind == GridKind::pframe ? pframe_ : iframe_;
  }

  Histogram iframe_;
  Histogram pframe_;
};

}  // namespace nlvc
