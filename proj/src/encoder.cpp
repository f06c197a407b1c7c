#include "hga/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "hga/error.hpp"

namespace hga {
namespace {

constexpr double kInitStd = 0.02;
constexpr double kAttentionMaskFill = -1e30;
constexpr const char* kLayoutNames[4] = {"x0", "y0", "x1", "y1"};

std::string layer_prefix(std::size_t l) { return "enc.l" + std::to_string(l) + "."; }

}  // namespace

void validate(const EncoderConfig& cfg) {
  if (cfg.hidden == 0 || cfg.attn_heads == 0 || cfg.hidden % cfg.attn_heads != 0) {
    throw InvalidArgument("encoder hidden size must be a positive multiple of attn_heads");
  }
  if (cfg.max_seq_len < 1) throw InvalidArgument("encoder max_seq_len must be at least 1");
  if (cfg.use_layout && cfg.layout_buckets < 1) throw InvalidArgument("encoder layout_buckets must be positive");
  if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw InvalidArgument("encoder dropout must lie in [0, 1)");
}

void init_encoder(ParamStore& params, const EncoderConfig& cfg, std::size_t vocab_size, std::mt19937_64& rng,
                  InitMode mode, double random_scale) {
  validate(cfg);
  const bool rnd = mode == InitMode::kRandom;
  const double w_std = rnd ? random_scale : kInitStd;
  const std::size_t h = cfg.hidden;
  auto weight = [&](Shape s) { return normal_tensor(std::move(s), w_std, rng); };
  auto bias = [&](std::size_t n) { return rnd ? normal_tensor({n}, random_scale, rng) : Tensor({n}); };
  auto out_proj = [&](Shape s) { return rnd ? normal_tensor(std::move(s), random_scale, rng) : Tensor(std::move(s)); };
  auto gain = [&](std::size_t n) {
    Tensor g({n}, 1.0);
    if (rnd) {
      Tensor noise = normal_tensor({n}, random_scale, rng);
      for (std::size_t i = 0; i < n; ++i) g[i] += noise[i];
    }
    return g;
  };

  params.add("enc.tok_emb", weight({vocab_size, h}));
  params.add("enc.pos_emb", weight({cfg.max_seq_len, h}));
  if (cfg.use_layout) {
    for (const char* name : kLayoutNames) params.add(std::string("enc.layout.") + name, weight({cfg.layout_buckets, h}));
  }
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = layer_prefix(l);
    params.add(p + "ln1.g", gain(h));
    params.add(p + "ln1.b", bias(h));
    // No key bias: q.b_k is constant along each softmax row, so it never
    // changes the output and its gradient is identically zero.
    params.add(p + "attn.wq", weight({h, h}));
    params.add(p + "attn.bq", bias(h));
    params.add(p + "attn.wk", weight({h, h}));
    params.add(p + "attn.wv", weight({h, h}));
    params.add(p + "attn.bv", bias(h));
    params.add(p + "attn.wo", out_proj({h, h}));
    params.add(p + "attn.bo", bias(h));
    params.add(p + "ln2.g", gain(h));
    params.add(p + "ln2.b", bias(h));
    params.add(p + "ffn.w1", weight({h, cfg.ffn()}));
    params.add(p + "ffn.b1", bias(cfg.ffn()));
    params.add(p + "ffn.w2", out_proj({cfg.ffn(), h}));
    params.add(p + "ffn.b2", bias(h));
  }
}

int layout_bucket(int coord, int extent, std::size_t buckets) {
  if (extent <= 0) extent = 1;
  const auto b = static_cast<long long>(std::floor(static_cast<double>(coord) * static_cast<double>(buckets) /
                                                   static_cast<double>(extent)));
  return static_cast<int>(std::clamp<long long>(b, 0, static_cast<long long>(buckets) - 1));
}

Var encode(Tape& tape, const ParamStore& params, const EncoderConfig& cfg, const TokenSequence& seq,
           std::span<const std::optional<Box>> boxes, PageSize page, std::mt19937_64* dropout_rng) {
  const std::size_t len = seq.length();
  if (len > cfg.max_seq_len) {
    throw InvalidArgument("sequence of length " + std::to_string(len) + " exceeds encoder max_seq_len " +
                          std::to_string(cfg.max_seq_len));
  }
  if (!boxes.empty() && boxes.size() != len) throw InvalidArgument("token box count does not match sequence length");
  const std::size_t h = cfg.hidden;
  const std::size_t heads = cfg.attn_heads;
  const std::size_t head_dim = h / heads;

  std::vector<int> positions(len);
  for (std::size_t i = 0; i < len; ++i) positions[i] = static_cast<int>(i);
  Var x = tape.add(tape.embedding(tape.param(params, "enc.tok_emb"), seq.token_ids),
                   tape.embedding(tape.param(params, "enc.pos_emb"), positions));

  if (cfg.use_layout) {
    std::vector<int> coords[4];
    for (auto& c : coords) c.assign(len, 0);
    for (std::size_t i = 0; i < len && !boxes.empty(); ++i) {
      if (!boxes[i] || !seq.attention_keep[i]) continue;
      const Box& b = *boxes[i];
      coords[0][i] = layout_bucket(b.x0, page.first, cfg.layout_buckets);
      coords[1][i] = layout_bucket(b.y0, page.second, cfg.layout_buckets);
      coords[2][i] = layout_bucket(b.x1, page.first, cfg.layout_buckets);
      coords[3][i] = layout_bucket(b.y1, page.second, cfg.layout_buckets);
    }
    for (int k = 0; k < 4; ++k) {
      x = tape.add(x, tape.embedding(tape.param(params, std::string("enc.layout.") + kLayoutNames[k]), coords[k]));
    }
  }

  auto drop = [&](Var v) { return dropout_rng ? tape.dropout(v, cfg.dropout, *dropout_rng) : v; };
  x = drop(x);

  std::vector<std::uint8_t> key_mask(len * len, 0);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j) key_mask[i * len + j] = seq.attention_keep[j] ? 0 : 1;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  auto linear = [&](Var in, const std::string& w, const std::string& b) {
    return tape.add_row(tape.matmul(in, tape.param(params, w)), tape.param(params, b));
  };

  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::string p = layer_prefix(l);
    const Var a = tape.layer_norm(x, tape.param(params, p + "ln1.g"), tape.param(params, p + "ln1.b"));
    const Var q = linear(a, p + "attn.wq", p + "attn.bq");
    const Var k = tape.matmul(a, tape.param(params, p + "attn.wk"));
    const Var v = linear(a, p + "attn.wv", p + "attn.bv");
    std::vector<Var> ctx;
    ctx.reserve(heads);
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const std::size_t c0 = hd * head_dim;
      const Var scores = tape.scale(tape.matmul_nt(tape.slice_cols(q, c0, head_dim), tape.slice_cols(k, c0, head_dim)),
                                    inv_scale);
      const Var probs = tape.softmax_rows(tape.masked_fill(scores, key_mask, kAttentionMaskFill));
      ctx.push_back(tape.matmul(probs, tape.slice_cols(v, c0, head_dim)));
    }
    const Var merged = heads == 1 ? ctx[0] : tape.concat_cols(ctx);
    x = tape.add(x, drop(linear(merged, p + "attn.wo", p + "attn.bo")));

    const Var f = tape.layer_norm(x, tape.param(params, p + "ln2.g"), tape.param(params, p + "ln2.b"));
    const Var hidden = tape.gelu(linear(f, p + "ffn.w1", p + "ffn.b1"));
    x = tape.add(x, drop(linear(hidden, p + "ffn.w2", p + "ffn.b2")));
  }
  return x;
}

Tensor encode(const ParamStore& params, const EncoderConfig& cfg, const TokenSequence& seq,
              std::span<const std::optional<Box>> boxes, PageSize page) {
  Tape tape(Tape::Mode::kInference);
  return tape.value(encode(tape, params, cfg, seq, boxes, page));
}

}  // namespace hga
