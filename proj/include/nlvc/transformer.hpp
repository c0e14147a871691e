#pragma once

// Bidirectional masked-token transformer used as an entropy model, and its weight file format.
//
// Architecture (pre-norm):
//   h_i   = TokEmb[token_i] + PosEmb[i] (+ RefEmb[ref_i] when the model has a reference table)
//   block: h += Attn(LN1(h));  h += MLP(LN2(h))      full self-attention, no causal mask
//   out   = LN_f(h) * W_head + b_head                 logits over 512 ids; id 511 is never coded
// MLP is Linear(d, 4d) -> GELU(erf) -> Linear(4d, d). LayerNorm eps is 1e-5. Every linear layer
// computes y = b + x * W with W stored row-major as [in][out].
//
// Weight file ("NLVW", version 1), all little-endian:
//   magic[4] | u16 version | u32 layers, dim, heads, seq_len, vocab, has_ref, mlp_ratio
//   | f32 tensors in ModelWeights::for_each_tensor order, row-major, no padding
//   | u64 XXH64 (seed 0) of every preceding byte
//
// Inference is float32 with a fixed summation order, so repeated evaluations in one build are
// bit-identical. Results are not promised to match across compilers or machines.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nlvc/entropy_models.hpp"
#include "nlvc/error.hpp"
#include "nlvc/quantized_cdf.hpp"
#include "nlvc/tokenizer.hpp"
#include "nlvc/xxhash64.hpp"

namespace nlvc {

static_assert(std::endian::native == std::endian::little, "weight I/O assumes a little-endian host");

struct ModelConfig {
  std::uint32_t layers = 8;
  std::uint32_t dim = 384;
  std::uint32_t heads = 6;
  std::uint32_t seq_len = static_cast<std::uint32_t>(kPatchArea);
  std::uint32_t vocab = static_cast<std::uint32_t>(kVocabSize);
  bool has_reference_embedding = false;
  std::uint32_t mlp_ratio = 4;

  // 8 layers, width 384, 6 heads.
  static ModelConfig full(bool with_reference) {
    ModelConfig c;
    c.has_reference_embedding = with_reference;
    return c;
  }

  // Small enough to drive the codec on a single CPU core.
  static ModelConfig tiny(bool with_reference) {
    ModelConfig c;
    c.layers = 1;
    c.dim = 8;
    c.heads = 2;
    c.has_reference_embedding = with_reference;
    return c;
  }

  std::uint32_t head_dim() const { return dim / heads; }
  std::uint32_t hidden() const { return dim * mlp_ratio; }

  void validate() const {
    if (layers == 0 || dim == 0 || heads == 0 || mlp_ratio == 0)
      throw FormatError("model config: layers, dim, heads and mlp_ratio must be positive");
    if (dim % heads != 0) throw FormatError("model config: dim must be divisible by heads");
    if (seq_len != kPatchArea) throw FormatError("model config: seq_len must be 1024");
    if (vocab != kVocabSize) throw FormatError("model config: vocab must be 512");
    if (layers > 1024 || dim > 16384 || mlp_ratio > 64)
      throw FormatError("model config: layers, dim or mlp_ratio implausibly large");
  }

  std::size_t parameter_count() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerWeights {
  std::vector<float> q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
  std::vector<float> ln1_scale, ln1_shift, ln2_scale, ln2_shift;
  std::vector<float> mlp_in_w, mlp_in_b, mlp_out_w, mlp_out_b;
};

struct ModelWeights {
  ModelConfig config;
  std::vector<float> token_embedding;       // vocab x dim
  std::vector<float> positional_embedding;  // seq_len x dim
  std::vector<float> reference_embedding;   // vocab x dim, empty without reference table
  std::vector<LayerWeights> layers;
  std::vector<float> final_scale, final_shift;
  std::vector<float> head_w;  // dim x vocab
  std::vector<float> head_b;  // vocab
  std::uint64_t hash = 0;     // XXH64 of the serialized payload

  // `unallocated` leaves every tensor empty; the loader sizes each one only once its bytes are
  // known to be present.
  enum class Init { zeros, identity_norms, unallocated };

  explicit ModelWeights(ModelConfig cfg = ModelConfig::tiny(false), Init init = Init::identity_norms)
      : config(cfg) {
    config.validate();
    layers.resize(config.layers);
    if (init == Init::unallocated) return;
    for_each_tensor([&](const std::string& name, std::vector<float>& t, std::size_t n) {
      const bool is_scale = name.ends_with("_scale");
      t.assign(n, init == Init::identity_norms && is_scale ? 1.0f : 0.0f);
    });
  }

  // Visits (name, tensor, element count) in serialization order.
  template <class Fn>
  void for_each_tensor(Fn&& fn) {
    const std::size_t d = config.dim, v = config.vocab, s = config.seq_len, f = config.hidden();
    fn("token_embedding", token_embedding, v * d);
    fn("positional_embedding", positional_embedding, s * d);
    if (config.has_reference_embedding) fn("reference_embedding", reference_embedding, v * d);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& L = layers[l];
      const std::string p = "layer" + std::to_string(l) + ".";
      fn(p + "q_w", L.q_w, d * d);
      fn(p + "q_b", L.q_b, d);
      fn(p + "k_w", L.k_w, d * d);
      fn(p + "k_b", L.k_b, d);
      fn(p + "v_w", L.v_w, d * d);
      fn(p + "v_b", L.v_b, d);
      fn(p + "o_w", L.o_w, d * d);
      fn(p + "o_b", L.o_b, d);
      fn(p + "ln1_scale", L.ln1_scale, d);
      fn(p + "ln1_shift", L.ln1_shift, d);
      fn(p + "ln2_scale", L.ln2_scale, d);
      fn(p + "ln2_shift", L.ln2_shift, d);
      fn(p + "mlp_in_w", L.mlp_in_w, d * f);
      fn(p + "mlp_in_b", L.mlp_in_b, f);
      fn(p + "mlp_out_w", L.mlp_out_w, f * d);
      fn(p + "mlp_out_b", L.mlp_out_b, d);
    }
    fn("final_scale", final_scale, d);
    fn("final_shift", final_shift, d);
    fn("head_w", head_w, d * v);
    fn("head_b", head_b, v);
  }

  template <class Fn>
  void for_each_tensor(Fn&& fn) const {
    const_cast<ModelWeights*>(this)->for_each_tensor(
        [&](const std::string& name, std::vector<float>& t, std::size_t n) {
          fn(name, static_cast<const std::vector<float>&>(t), n);
        });
  }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for_each_tensor([&](const std::string&, const std::vector<float>& t, std::size_t) { total += t.size(); });
    return total;
  }
};

inline std::size_t ModelConfig::parameter_count() const {
  const std::size_t d = dim, v = vocab, s = seq_len, f = hidden();
  const std::size_t per_layer = 4 * (d * d + d) + 4 * d + (d * f + f) + (f * d + d);
  return v * d + s * d + (has_reference_embedding ? v * d : 0) + layers * per_layer + 2 * d +
         d * v + v;
}

inline std::uint64_t compute_weights_hash(const ModelWeights& weights);

// Matrices and embeddings ~ N(0, std), biases 0, norm scales 1.
inline ModelWeights random_weights(const ModelConfig& config, std::uint64_t seed, float stddev = 0.02f) {
  ModelWeights w(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, stddev);
  w.for_each_tensor([&](const std::string& name, std::vector<float>& t, std::size_t) {
    const bool matrix = name.ends_with("_w") || name.ends_with("embedding");
    if (matrix)
      for (auto& x : t) x = normal(rng);
  });
  w.hash = compute_weights_hash(w);
  return w;
}

namespace detail {

inline constexpr char kWeightMagic[4] = {'N', 'L', 'V', 'W'};
inline constexpr std::uint16_t kWeightVersion = 1;

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

}  // namespace detail

inline std::vector<std::uint8_t> serialize_weights(const ModelWeights& weights) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 2 + 7 * 4 + weights.parameter_count() * 4 + 8);
  out.insert(out.end(), std::begin(detail::kWeightMagic), std::end(detail::kWeightMagic));
  detail::put_le<std::uint16_t>(out, detail::kWeightVersion);
  const auto& c = weights.config;
  for (std::uint32_t field : {c.layers, c.dim, c.heads, c.seq_len, c.vocab,
                              static_cast<std::uint32_t>(c.has_reference_embedding), c.mlp_ratio})
    detail::put_le<std::uint32_t>(out, field);
  weights.for_each_tensor([&](const std::string& name, const std::vector<float>& t, std::size_t n) {
    if (t.size() != n) throw ContractViolation("serialize_weights: tensor " + name + " has wrong size");
    const auto* raw = reinterpret_cast<const std::uint8_t*>(t.data());
    out.insert(out.end(), raw, raw + n * sizeof(float));
  });
  detail::put_le<std::uint64_t>(out, xxhash64(out));
  return out;
}

inline ModelWeights load_weights(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeaderBytes = 4 + 2 + 7 * 4;
  if (bytes.size() < 6 || !std::equal(std::begin(detail::kWeightMagic), std::end(detail::kWeightMagic),
                                      bytes.begin()))
    throw FormatError("weight file: bad magic");
  if (const auto version = detail::get_le<std::uint16_t>(bytes, 4); version != detail::kWeightVersion)
    throw FormatError("weight file: unsupported version " + std::to_string(version));
  if (bytes.size() < kHeaderBytes) throw FormatError("weight file: truncated config block");

  ModelConfig config;
  std::uint32_t fields[7];
  for (std::size_t i = 0; i < 7; ++i) fields[i] = detail::get_le<std::uint32_t>(bytes, 6 + 4 * i);
  config.layers = fields[0];
  config.dim = fields[1];
  config.heads = fields[2];
  config.seq_len = fields[3];
  config.vocab = fields[4];
  if (fields[5] > 1) throw FormatError("weight file: has_ref flag must be 0 or 1");
  config.has_reference_embedding = fields[5] == 1;
  config.mlp_ratio = fields[6];
  config.validate();

  ModelWeights weights(config, ModelWeights::Init::unallocated);
  std::size_t offset = kHeaderBytes;
  weights.for_each_tensor([&](const std::string& name, std::vector<float>& t, std::size_t n) {
    const std::size_t need = n * sizeof(float);
    if (bytes.size() - offset < need)
      throw FormatError("weight file: truncated tensor " + name + " (need " + std::to_string(need) +
                        " bytes, have " + std::to_string(bytes.size() - offset) + ")");
    t.resize(n);
    std::memcpy(t.data(), bytes.data() + offset, need);
    offset += need;
    for (float x : t)
      if (!std::isfinite(x)) throw FormatError("weight file: non-finite value in tensor " + name);
  });
  if (bytes.size() - offset < 8) throw FormatError("weight file: missing content hash");
  if (bytes.size() - offset > 8)
    throw FormatError("weight file: " + std::to_string(bytes.size() - offset - 8) + " trailing bytes");
  const auto stored = detail::get_le<std::uint64_t>(bytes, offset);
  const auto computed = xxhash64(bytes.first(offset));
  if (stored != computed) throw FormatError("weight file: content hash mismatch");
  weights.hash = computed;
  return weights;
}

inline ModelWeights load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open weight file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_weights(bytes);
}

// Also stamps weights.hash.
inline void save_weights_file(ModelWeights& weights, const std::string& path) {
  const auto bytes = serialize_weights(weights);
  weights.hash = detail::get_le<std::uint64_t>(bytes, bytes.size() - 8);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot create weight file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing weight file " + path);
}

inline std::uint64_t compute_weights_hash(const ModelWeights& weights) {
  const auto bytes = serialize_weights(weights);
  return detail::get_le<std::uint64_t>(bytes, bytes.size() - 8);
}

namespace kernels {

// exp(x) for x <= 0 in float: x = n ln 2 + f with |f| <= ln2 / 2, e^f by a degree-6 polynomial.
// Relative error ~2e-7. Only + * and bit operations, so loops over it vectorize.
inline float exp_nonpositive(float x) {
  // Clamp to -87 on the bit pattern: for x <= 0 a larger unsigned pattern means a more negative
  // value. An integer select keeps the loop branch-free without relaxed float semantics.
  constexpr std::uint32_t kFloor = 0xC2AE0000u;  // -87.0f
  const std::uint32_t u = std::bit_cast<std::uint32_t>(x);
  x = std::bit_cast<float>(u > kFloor ? kFloor : u);
  const float n = (x * 1.44269504088896341f + 12582912.0f) - 12582912.0f;  // round to nearest
  // ln 2 split in two so n * hi is exact; keeps the error flat in |x|.
  const float f = (x - n * 0.693359375f) + n * 2.12194440e-4f;
  float p = 1.0f / 720.0f;
  p = p * f + 1.0f / 120.0f;
  p = p * f + 1.0f / 24.0f;
  p = p * f + 1.0f / 6.0f;
  p = p * f + 0.5f;
  p = p * f + 1.0f;
  p = p * f + 1.0f;
  const auto bits = static_cast<std::uint32_t>(static_cast<std::int32_t>(n) + 127) << 23;
  return p * std::bit_cast<float>(bits);
}

// Dot product with eight interleaved partial sums, combined pairwise.
inline float dot(const float* a, const float* b, std::size_t n) {
  float acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t u = 0; u < 8; ++u) acc[u] += a[i + u] * b[i + u];
  for (std::size_t u = 0; i < n; ++i, ++u) acc[u] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

// Maximum of finite values, compared as order-preserving integer keys so the loop stays
// branch-free.
inline float max(const float* a, std::size_t n) {
  auto key = [](float f) {
    const auto b = std::bit_cast<std::int32_t>(f);
    return b ^ ((b >> 31) & 0x7FFFFFFF);
  };
  std::int32_t acc[8];
  std::fill_n(acc, 8, key(a[0]));
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t u = 0; u < 8; ++u) acc[u] = std::max(acc[u], key(a[i + u]));
  for (; i < n; ++i) acc[0] = std::max(acc[0], key(a[i]));
  const std::int32_t m = *std::max_element(acc, acc + 8);
  return std::bit_cast<float>(m ^ ((m >> 31) & 0x7FFFFFFF));
}

// y[i] = exp(x[i] - m) for x[i] <= m.
inline void exp_shifted(const float* x, float m, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = exp_nonpositive(x[i] - m);
}

inline float sum(const float* a, std::size_t n) {
  float acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    for (std::size_t u = 0; u < 8; ++u) acc[u] += a[i + u];
  for (std::size_t u = 0; i < n; ++i, ++u) acc[u] += a[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

// y = b + x W, W is [in][out].
inline void linear(const float* x, const float* w, const float* b, float* y, std::size_t in,
                   std::size_t out) {
  std::copy_n(b, out, y);
  for (std::size_t i = 0; i < in; ++i) {
    const float xi = x[i];
    const float* row = w + i * out;
    for (std::size_t o = 0; o < out; ++o) y[o] += xi * row[o];
  }
}

inline void layer_norm(const float* x, const float* scale, const float* shift, float* y, std::size_t d) {
  float mean = 0.0f;
  for (std::size_t i = 0; i < d; ++i) mean += x[i];
  mean /= static_cast<float>(d);
  float var = 0.0f;
  for (std::size_t i = 0; i < d; ++i) var += (x[i] - mean) * (x[i] - mean);
  var /= static_cast<float>(d);
  const float inv = 1.0f / std::sqrt(var + 1e-5f);
  for (std::size_t i = 0; i < d; ++i) y[i] = (x[i] - mean) * inv * scale[i] + shift[i];
}

inline float gelu(float x) { return 0.5f * x * (1.0f + std::erf(x * 0.70710678118654752f)); }

}  // namespace kernels

// Stateful evaluator bound to one set of weights. It caches the first block's per-position
// inputs (embedding, LN1, q/k/v) keyed by the token and reference ids at each position, so
// consecutive calls that differ in few positions recompute only those. Per-position work is
// the same code path either way, so cached and uncached results are bit-identical.
class TransformerEvaluator {
 public:
  explicit TransformerEvaluator(std::shared_ptr<const ModelWeights> weights)
      : w_(std::move(weights)) {
    const auto& c = w_->config;
    c.validate();
    d_ = c.dim;
    s_ = c.seq_len;
    heads_ = c.heads;
    hd_ = c.head_dim();
    f_ = c.hidden();
    cached_token_.assign(s_, kNoToken);
    cached_ref_.assign(s_, kNoToken);
    h0_.assign(s_ * d_, 0.0f);
    q0_.assign(s_ * d_, 0.0f);
    kt0_.assign(s_ * d_, 0.0f);
    vt0_.assign(s_ * d_, 0.0f);
    scores_.resize(s_);
    x_.resize(std::max(d_, f_));
    tmp_.resize(std::max(d_, f_));
    all_.resize(s_);
    for (std::size_t i = 0; i < s_; ++i) all_[i] = static_cast<std::uint16_t>(i);
  }

  const ModelWeights& weights() const { return *w_; }

  // Logits for the requested positions, row-major [positions.size()][vocab]. `reference` must
  // be empty exactly when the model has no reference table.
  void forward(std::span<const Token> tokens, std::span<const Token> reference,
               std::span<const std::uint16_t> positions, std::vector<float>& logits) {
    const auto& c = w_->config;
    if (tokens.size() != s_) throw ContractViolation("forward: token sequence must have seq_len entries");
    if (c.has_reference_embedding && reference.size() != s_)
      throw ContractViolation("forward: model requires a reference grid");
    if (!c.has_reference_embedding && !reference.empty())
      throw ContractViolation("forward: model has no reference embedding");
    for (auto p : positions)
      if (p >= s_) throw ContractViolation("forward: requested position out of range");
    for (std::size_t i = 0; i < s_; ++i) {
      if (tokens[i] >= c.vocab || (!reference.empty() && reference[i] >= c.vocab))
        throw ContractViolation("forward: token id out of vocabulary");
    }

    refresh_first_block(tokens, reference);

    const std::size_t nl = c.layers;
    // Residual stream after the current block, for the rows that block produced.
    auto& h = h_;
    auto& h_next = h_next_;
    const std::vector<float>* h_in = &h0_;
    const std::vector<float>* q = &q0_;
    const std::vector<float>* kt = &kt0_;
    const std::vector<float>* vt = &vt0_;

    for (std::size_t l = 0; l < nl; ++l) {
      const bool last = l + 1 == nl;
      const auto& L = w_->layers[l];
      if (l > 0) {
        qn_.resize(s_ * d_);
        ktn_.resize(s_ * d_);
        vtn_.resize(s_ * d_);
        for (std::size_t i = 0; i < s_; ++i) project_qkv(L, &(*h_in)[i * d_], qn_, ktn_, vtn_, i);
        q = &qn_;
        kt = &ktn_;
        vt = &vtn_;
      }
      const auto active = last ? positions : std::span<const std::uint16_t>(all_);
      h_next.resize(active.size() * d_);
      for (std::size_t r = 0; r < active.size(); ++r) {
        const std::size_t i = active[r];
        float* out = &h_next[r * d_];
        attend(&(*q)[i * d_], *kt, *vt, tmp_.data());
        kernels::linear(tmp_.data(), L.o_w.data(), L.o_b.data(), x_.data(), d_, d_);
        for (std::size_t e = 0; e < d_; ++e) out[e] = (*h_in)[i * d_ + e] + x_[e];
        mlp(L, out);
      }
      h.swap(h_next);
      h_in = &h;
    }

    // h holds rows for `positions` in order.
    logits.resize(positions.size() * c.vocab);
    for (std::size_t r = 0; r < positions.size(); ++r) {
      kernels::layer_norm(&h[r * d_], w_->final_scale.data(), w_->final_shift.data(), x_.data(), d_);
      kernels::linear(x_.data(), w_->head_w.data(), w_->head_b.data(), &logits[r * c.vocab], d_, c.vocab);
    }
  }

 private:
  static constexpr Token kNoToken = 0xFFFF;

  void refresh_first_block(std::span<const Token> tokens, std::span<const Token> reference) {
    const auto& L = w_->layers[0];
    for (std::size_t i = 0; i < s_; ++i) {
      const Token ref = reference.empty() ? kNoToken : reference[i];
      if (cached_token_[i] == tokens[i] && cached_ref_[i] == ref) continue;
      float* h = &h0_[i * d_];
      const float* te = &w_->token_embedding[std::size_t{tokens[i]} * d_];
      const float* pe = &w_->positional_embedding[i * d_];
      for (std::size_t e = 0; e < d_; ++e) h[e] = te[e] + pe[e];
      if (!reference.empty()) {
        const float* re = &w_->reference_embedding[std::size_t{ref} * d_];
        for (std::size_t e = 0; e < d_; ++e) h[e] += re[e];
      }
      project_qkv(L, h, q0_, kt0_, vt0_, i);
      cached_token_[i] = tokens[i];
      cached_ref_[i] = ref;
    }
  }

  // q is [pos][dim]; k and v are stored transposed as [dim][pos].
  void project_qkv(const LayerWeights& L, const float* h, std::vector<float>& q, std::vector<float>& kt,
                   std::vector<float>& vt, std::size_t i) {
    kernels::layer_norm(h, L.ln1_scale.data(), L.ln1_shift.data(), x_.data(), d_);
    kernels::linear(x_.data(), L.q_w.data(), L.q_b.data(), &q[i * d_], d_, d_);
    kernels::linear(x_.data(), L.k_w.data(), L.k_b.data(), tmp_.data(), d_, d_);
    for (std::size_t e = 0; e < d_; ++e) kt[e * s_ + i] = tmp_[e];
    kernels::linear(x_.data(), L.v_w.data(), L.v_b.data(), tmp_.data(), d_, d_);
    for (std::size_t e = 0; e < d_; ++e) vt[e * s_ + i] = tmp_[e];
  }

  // Multi-head attention output (before the output projection) for one query row.
  void attend(const float* q, const std::vector<float>& kt, const std::vector<float>& vt, float* out) {
    const float scale = 1.0f / std::sqrt(static_cast<float>(hd_));
    float* s = scores_.data();
    for (std::size_t hh = 0; hh < heads_; ++hh) {
      std::fill_n(s, s_, 0.0f);
      for (std::size_t e = hh * hd_; e < (hh + 1) * hd_; ++e) {
        const float qe = q[e] * scale;
        const float* krow = &kt[e * s_];
        for (std::size_t j = 0; j < s_; ++j) s[j] += qe * krow[j];
      }
      kernels::exp_shifted(s, kernels::max(s, s_), s, s_);
      const float inv = 1.0f / kernels::sum(s, s_);
      for (std::size_t e = hh * hd_; e < (hh + 1) * hd_; ++e)
        out[e] = kernels::dot(s, &vt[e * s_], s_) * inv;
    }
  }

  // h += MLP(LN2(h)), in place.
  void mlp(const LayerWeights& L, float* h) {
    std::vector<float>& hidden = mlp_hidden_;
    hidden.resize(f_);
    kernels::layer_norm(h, L.ln2_scale.data(), L.ln2_shift.data(), x_.data(), d_);
    kernels::linear(x_.data(), L.mlp_in_w.data(), L.mlp_in_b.data(), hidden.data(), d_, f_);
    for (auto& v : hidden) v = kernels::gelu(v);
    kernels::linear(hidden.data(), L.mlp_out_w.data(), L.mlp_out_b.data(), tmp_.data(), f_, d_);
    for (std::size_t e = 0; e < d_; ++e) h[e] += tmp_[e];
  }

  std::shared_ptr<const ModelWeights> w_;
  std::size_t d_ = 0, s_ = 0, heads_ = 0, hd_ = 0, f_ = 0;
  std::vector<Token> cached_token_, cached_ref_;
  std::vector<float> h0_, q0_, kt0_, vt0_;
  std::vector<float> scores_, x_, tmp_, mlp_hidden_;
  std::vector<float> h_, h_next_, qn_, ktn_, vtn_;
  std::vector<std::uint16_t> all_;
};

// Stateless convenience wrapper: a fresh evaluator per call.
inline std::vector<float> forward(std::shared_ptr<const ModelWeights> weights, std::span<const Token> tokens,
                                  std::span<const Token> reference, std::span<const std::uint16_t> positions) {
  TransformerEvaluator evaluator(std::move(weights));
  std::vector<float> logits;
  evaluator.forward(tokens, reference, positions, logits);
  return logits;
}

// Max-subtracted softmax over ids 0..510; the mask id's logit is ignored. The exponentials use
// the float kernel (relative error ~2e-7), which is ample for 16-bit quantization.
inline std::array<double, kAlphabetSize> softmax_over_alphabet(std::span<const float> logits) {
  if (logits.size() < kAlphabetSize) throw ContractViolation("softmax_over_alphabet: too few logits");
  std::array<float, kAlphabetSize> e;
  kernels::exp_shifted(logits.data(), kernels::max(logits.data(), kAlphabetSize), e.data(), kAlphabetSize);
  double total = 0.0;
  for (float x : e) total += x;
  std::array<double, kAlphabetSize> p;
  for (std::size_t s = 0; s < kAlphabetSize; ++s) p[s] = e[s] / total;
  return p;
}

class TransformerModel final : public EntropyModel {
 public:
  explicit TransformerModel(std::shared_ptr<const ModelWeights> weights)
      : weights_(std::move(weights)),
        evaluator_(weights_),
        hash_(weights_->hash != 0 ? weights_->hash : compute_weights_hash(*weights_)) {}

  ModelKind kind() const override { return ModelKind::transformer; }

  // A model without a reference table codes P-tokens from their difference context alone.
  std::vector<QuantizedCdf> predict_group(const ModelContext& ctx) override {
    const auto group = ctx.group();
    positions_.resize(group.size());
    for (std::size_t k = 0; k < group.size(); ++k)
      positions_[k] = static_cast<std::uint16_t>(ctx.schedule->flat_index(group[k]));
    std::span<const Token> reference;
    if (weights_->config.has_reference_embedding) {
      if (!ctx.reference) throw ContractViolation("transformer model requires a reference grid");
      reference = ctx.reference->tokens;
    }
    evaluator_.forward(ctx.tokens.tokens, reference, positions_, logits_);
    std::vector<QuantizedCdf> cdfs;
    cdfs.reserve(group.size());
    const std::size_t v = weights_->config.vocab;
    for (std::size_t k = 0; k < group.size(); ++k)
      cdfs.push_back(quantize_cdf(softmax_over_alphabet(std::span<const float>(&logits_[k * v], v))));
    return cdfs;
  }

  std::unique_ptr<EntropyModel> fresh() const override {
    return std::unique_ptr<EntropyModel>(new TransformerModel(weights_, hash_));
  }

  std::uint64_t content_hash() const override { return hash_; }

  const ModelWeights& weights() const { return *weights_; }

 private:
  TransformerModel(std::shared_ptr<const ModelWeights> weights, std::uint64_t hash)
      : weights_(std::move(weights)), evaluator_(weights_), hash_(hash) {}

  std::shared_ptr<const ModelWeights> weights_;
  TransformerEvaluator evaluator_;
  std::uint64_t hash_;
  std::vector<std::uint16_t> positions_;
  std::vector<float> logits_;
};

}  // namespace nlvc
