#include "hga/pipeline_check.hpp"

#include <random>

#include "hga/error.hpp"
#include "hga/synth.hpp"

namespace hga {

PipelineFixture make_pipeline_fixture(const PipelineCheckConfig& cfg) {
  if (cfg.padding >= cfg.length) throw InvalidArgument("pipeline check needs at least one real token");
  PipelineFixture fx;
  std::mt19937_64 rng(derive_seed(cfg.seed, 0));

  fx.encoder.hidden = cfg.hidden;
  fx.encoder.layers = cfg.layers;
  fx.encoder.attn_heads = cfg.attn_heads;
  fx.encoder.ffn_size = 2 * cfg.hidden;
  fx.encoder.max_seq_len = cfg.length;
  fx.encoder.use_layout = true;
  fx.encoder.layout_buckets = 8;
  fx.head.num_types = cfg.types;
  fx.head.head_hidden = cfg.head_hidden;
  fx.head.position_mode = PositionMode::kSpan;
  fx.balance.b = cfg.balance_b;

  // Real tokens grouped into nodes of 1..3 tokens; trailing padding.
  const std::size_t real = cfg.length - cfg.padding;
  std::uniform_int_distribution<int> node_len(1, 3);
  std::uniform_int_distribution<int> word(2, static_cast<int>(cfg.vocab_size) - 1);
  std::uniform_int_distribution<int> coord(0, 999);
  std::vector<std::pair<int, int>> nodes;
  int node = 0;
  for (std::size_t i = 0; i < real; ++node) {
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(node_len(rng)), real - i);
    nodes.emplace_back(static_cast<int>(i), static_cast<int>(i + n - 1));
    for (std::size_t k = 0; k < n; ++k, ++i) {
      fx.seq.token_ids.push_back(word(rng));
      fx.seq.node_of_token.push_back(node);
      fx.seq.span_positions.push_back(node);
      fx.seq.attention_keep.push_back(true);
      const int x = coord(rng);
      const int y = coord(rng);
      fx.boxes.push_back(Box{x, y, std::min(999, x + 40), std::min(999, y + 20)});
    }
  }
  for (std::size_t i = real; i < cfg.length; ++i) {
    fx.seq.token_ids.push_back(0);
    fx.seq.node_of_token.push_back(node - 1);
    fx.seq.span_positions.push_back(node - 1);
    fx.seq.attention_keep.push_back(false);
    fx.boxes.push_back(std::nullopt);
  }
  std::uniform_int_distribution<int> type(0, static_cast<int>(cfg.types) - 1);
  std::bernoulli_distribution labeled(0.6);
  for (const auto& [s, e] : nodes)
    if (labeled(rng)) fx.gold.push_back(Entity{type(rng), s, e});
  fx.labels = build_labels(fx.gold, cfg.length, cfg.types, fx.seq.attention_keep);

  init_encoder(fx.params, fx.encoder, cfg.vocab_size, rng, InitMode::kRandom, cfg.init_scale);
  init_hga_head(fx.params, fx.head, cfg.hidden, rng, cfg.init_scale, /*random_bias=*/true);
  return fx;
}

LossGraph PipelineFixture::graph() const {
  return [this](Tape& tape, const ParamStore& p) {
    const Var h = encode(tape, p, encoder, seq, boxes);
    const auto per_type = score(tape, h, span_positions(seq), p, head, seq.attention_keep);
    return balanced_loss(tape, per_type, labels, balance);
  };
}

}  // namespace hga
