#pragma once

#include <random>
#include <vector>

#include "hga/document.hpp"
#include "hga/params.hpp"
#include "hga/tape.hpp"

namespace hga {

// Token-classification heads over BIO tags (2D + 1 classes, coded as in
// bio.hpp), used as comparison baselines for the hypergraph head.

// lin.w (H x 2D+1), lin.b
void init_linear_head(ParamStore& params, std::size_t num_types, std::size_t hidden, std::mt19937_64& rng);
Var linear_logits(Tape& tape, Var h, const ParamStore& params);

enum class Activation { kTanh, kGelu };

struct MlpConfig {
  std::size_t hidden = 0;  // 0 means the encoder width
  Activation activation = Activation::kGelu;
  double dropout = 0.1;
};

// mlp.w1 (H x hidden), mlp.b1, mlp.w2 (hidden x 2D+1), mlp.b2
void init_mlp_head(ParamStore& params, std::size_t num_types, std::size_t hidden, const MlpConfig& cfg,
                   std::mt19937_64& rng);
// Dropout is applied only when `dropout_rng` is non-null.
Var mlp_logits(Tape& tape, Var h, const ParamStore& params, const MlpConfig& cfg, std::mt19937_64* dropout_rng);

// Row-wise softmax of the logits.
Tensor tag_probabilities(const Tensor& logits);

// Per-token argmax (lowest index on ties) over kept tokens, then BIO spans
// with seqeval-style repair. Padding tokens are forced to O.
std::vector<int> argmax_tags(const Tensor& logits, const std::vector<bool>& keep);
EntitySet decode_tags(const Tensor& logits, const std::vector<bool>& keep, std::size_t num_types);

// Gold BIO tag per token, -1 on padding (excluded from the loss).
std::vector<int> tag_targets(const EntitySet& gold, const std::vector<bool>& keep, std::size_t num_types);

}  // namespace hga
