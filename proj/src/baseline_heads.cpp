#include "hga/baseline_heads.hpp"

#include <algorithm>
#include <cmath>

#include "hga/bio.hpp"
#include "hga/error.hpp"

namespace hga {
namespace {

constexpr double kInitStd = 0.02;

}  // namespace

void init_linear_head(ParamStore& params, std::size_t num_types, std::size_t hidden, std::mt19937_64& rng) {
  const std::size_t classes = tag_count(num_types);
  params.add("lin.w", normal_tensor({hidden, classes}, kInitStd, rng));
  params.add("lin.b", Tensor({classes}));
}

Var linear_logits(Tape& tape, Var h, const ParamStore& params) {
  return tape.add_row(tape.matmul(h, tape.param(params, "lin.w")), tape.param(params, "lin.b"));
}

void init_mlp_head(ParamStore& params, std::size_t num_types, std::size_t hidden, const MlpConfig& cfg,
                   std::mt19937_64& rng) {
  const std::size_t width = cfg.hidden ? cfg.hidden : hidden;
  const std::size_t classes = tag_count(num_types);
  params.add("mlp.w1", normal_tensor({hidden, width}, kInitStd, rng));
  params.add("mlp.b1", Tensor({width}));
  params.add("mlp.w2", normal_tensor({width, classes}, kInitStd, rng));
  params.add("mlp.b2", Tensor({classes}));
}

Var mlp_logits(Tape& tape, Var h, const ParamStore& params, const MlpConfig& cfg, std::mt19937_64* dropout_rng) {
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw InvalidArgument("mlp dropout must lie in [0, 1)");
  Var z = tape.add_row(tape.matmul(h, tape.param(params, "mlp.w1")), tape.param(params, "mlp.b1"));
  z = cfg.activation == Activation::kTanh ? tape.tanh(z) : tape.gelu(z);
  if (dropout_rng) z = tape.dropout(z, cfg.dropout, *dropout_rng);
  return tape.add_row(tape.matmul(z, tape.param(params, "mlp.w2")), tape.param(params, "mlp.b2"));
}

Tensor tag_probabilities(const Tensor& logits) {
  Tape tape(Tape::Mode::kInference);
  return tape.value(tape.softmax_rows(tape.constant(logits)));
}

std::vector<int> argmax_tags(const Tensor& logits, const std::vector<bool>& keep) {
  std::vector<int> tags(logits.rows(), 0);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (i < keep.size() && !keep[i]) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    tags[i] = static_cast<int>(best);
  }
  return tags;
}

EntitySet decode_tags(const Tensor& logits, const std::vector<bool>& keep, std::size_t num_types) {
  return tag_ids_to_entities(argmax_tags(logits, keep), num_types);
}

std::vector<int> tag_targets(const EntitySet& gold, const std::vector<bool>& keep, std::size_t num_types) {
  std::vector<int> tags = entities_to_tag_ids(gold, keep.size(), num_types);
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (!keep[i]) tags[i] = -1;
  return tags;
}

}  // namespace hga
