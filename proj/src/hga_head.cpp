#include "hga/hga_head.hpp"

#include "hga/error.hpp"
#include "hga/kernels.hpp"

namespace hga {

const char* to_string(PositionMode mode) {
  switch (mode) {
    case PositionMode::kNone:
      return "none";
    case PositionMode::kToken:
      return "token";
    case PositionMode::kSpan:
      return "span";
  }
  return "?";
}

PositionMode parse_position_mode(const std::string& s) {
  if (s == "none") return PositionMode::kNone;
  if (s == "token") return PositionMode::kToken;
  if (s == "span") return PositionMode::kSpan;
  throw InvalidArgument("unknown position mode '" + s + "' (expected none, token or span)");
}

void validate(const HeadConfig& cfg) {
  if (cfg.num_types < 1) throw InvalidArgument("head needs at least one entity type");
  if (cfg.head_hidden == 0 || cfg.head_hidden % 2 != 0) {
    throw InvalidArgument("head hidden size must be even for rotary pairs, got " + std::to_string(cfg.head_hidden));
  }
  if (!(cfg.rope_base > 1.0)) throw InvalidArgument("rope_base must exceed 1");
}

void init_hga_head(ParamStore& params, const HeadConfig& cfg, std::size_t hidden, std::mt19937_64& rng,
                   double weight_std, bool random_bias) {
  validate(cfg);
  const std::size_t width = cfg.num_types * cfg.head_hidden;
  for (const char* m : {"q", "k"}) {
    params.add(std::string("head.w") + m, normal_tensor({hidden, width}, weight_std, rng));
    params.add(std::string("head.b") + m, random_bias ? normal_tensor({width}, weight_std, rng) : Tensor({width}));
  }
}

std::vector<int> span_positions(const TokenSequence& seq) { return seq.node_of_token; }

std::vector<int> head_positions(const TokenSequence& seq, PositionMode mode) {
  std::vector<int> p(seq.length(), 0);
  if (mode == PositionMode::kToken) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
  } else if (mode == PositionMode::kSpan) {
    p = span_positions(seq);
  }
  return p;
}

Tensor rotary_apply(const Tensor& v, std::span<const int> positions, double base) {
  Tensor out = v;
  kernels::rotate_pairs(out, positions, base);
  return out;
}

Tensor score_mask(const std::vector<bool>& keep, double mask_value) {
  const std::size_t len = keep.size();
  Tensor m({len, len});
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < len; ++j)
      if (i > j || !keep[i] || !keep[j]) m(i, j) = mask_value;
  return m;
}

std::vector<Var> score(Tape& tape, Var h, std::span<const int> positions, const ParamStore& params,
                       const HeadConfig& cfg, const std::vector<bool>& keep) {
  validate(cfg);
  const Tensor& hv = tape.value(h);
  const std::size_t len = hv.rows();
  const std::size_t d = cfg.head_hidden;
  if (params.value("head.wq").rows() != hv.cols() || params.value("head.wq").cols() != cfg.num_types * d) {
    throw InvalidArgument("head projection shape " + shape_string(params.value("head.wq").shape()) +
                          " does not match features " + shape_string(hv.shape()) + " with D=" +
                          std::to_string(cfg.num_types) + ", d=" + std::to_string(d));
  }
  if (keep.size() != len) throw InvalidArgument("attention_keep length does not match features");
  const bool rotate = cfg.position_mode != PositionMode::kNone;
  if (rotate && positions.size() != len) throw InvalidArgument("position count does not match features");

  const Var q_all = tape.add_row(tape.matmul(h, tape.param(params, "head.wq")), tape.param(params, "head.bq"));
  const Var k_all = tape.add_row(tape.matmul(h, tape.param(params, "head.wk")), tape.param(params, "head.bk"));
  const Var mask = tape.constant(score_mask(keep, cfg.mask_value));

  std::vector<Var> out;
  out.reserve(cfg.num_types);
  for (std::size_t t = 0; t < cfg.num_types; ++t) {
    Var q = tape.slice_cols(q_all, t * d, d);
    Var k = tape.slice_cols(k_all, t * d, d);
    if (rotate) {
      q = tape.rotary(q, positions, cfg.rope_base);
      k = tape.rotary(k, positions, cfg.rope_base);
    }
    out.push_back(tape.add(tape.matmul_nt(q, k), mask));
  }
  return out;
}

ScoreTensor to_score_tensor(const Tape& tape, std::span<const Var> per_type, const std::vector<bool>& keep) {
  ScoreTensor s;
  s.types = per_type.size();
  s.length = keep.size();
  s.keep = keep;
  s.values.reserve(s.types * s.length * s.length);
  for (Var v : per_type) {
    const auto vals = tape.value(v).values();
    s.values.insert(s.values.end(), vals.begin(), vals.end());
  }
  return s;
}

ScoreTensor score(const Tensor& h, std::span<const int> positions, const ParamStore& params, const HeadConfig& cfg,
                  const std::vector<bool>& keep) {
  Tape tape(Tape::Mode::kInference);
  const Var hv = tape.constant(h);
  const auto per_type = score(tape, hv, positions, params, cfg, keep);
  return to_score_tensor(tape, per_type, keep);
}

}  // namespace hga
