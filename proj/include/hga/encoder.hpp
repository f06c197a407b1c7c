#pragma once

#include <optional>
#include <random>
#include <span>
#include <utility>

#include "hga/document.hpp"
#include "hga/params.hpp"
#include "hga/tape.hpp"

namespace hga {

struct EncoderConfig {
  std::size_t hidden = 128;
  std::size_t layers = 4;
  std::size_t attn_heads = 4;
  std::size_t ffn_size = 0;  // 0 means 4 * hidden
  std::size_t max_seq_len = 512;
  bool use_layout = true;
  std::size_t layout_buckets = 32;
  // Applied to the embedding sum and to each block's attention and FFN
  // outputs, only when encode() is given a dropout rng.
  double dropout = 0.1;

  std::size_t ffn() const { return ffn_size ? ffn_size : 4 * hidden; }
};

void validate(const EncoderConfig& cfg);

enum class InitMode {
  // normal(0, 0.02) weights, zero biases, zero block output projections.
  kStandard,
  // Every tensor random with the given scale; used for gradient checks.
  kRandom,
};

void init_encoder(ParamStore& params, const EncoderConfig& cfg, std::size_t vocab_size, std::mt19937_64& rng,
                  InitMode mode = InitMode::kStandard, double random_scale = 0.5);

using PageSize = std::pair<int, int>;
inline constexpr PageSize kDefaultPage{1000, 1000};

// Bucket of a coordinate normalized by the page extent.
int layout_bucket(int coord, int extent, std::size_t buckets);

// h = token + position (+ layout) embeddings through `layers` pre-norm
// self-attention blocks; padding is masked out as an attention key.
// `boxes` may be empty (no layout) or hold one entry per token.
Var encode(Tape& tape, const ParamStore& params, const EncoderConfig& cfg, const TokenSequence& seq,
           std::span<const std::optional<Box>> boxes = {}, PageSize page = kDefaultPage,
           std::mt19937_64* dropout_rng = nullptr);

Tensor encode(const ParamStore& params, const EncoderConfig& cfg, const TokenSequence& seq,
              std::span<const std::optional<Box>> boxes = {}, PageSize page = kDefaultPage);

}  // namespace hga
