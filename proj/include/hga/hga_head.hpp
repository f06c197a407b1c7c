#pragma once

#include <random>
#include <span>
#include <vector>

#include "hga/document.hpp"
#include "hga/params.hpp"
#include "hga/tape.hpp"

namespace hga {

// Which positions drive the rotary encoding of the head.
enum class PositionMode {
  kNone,   // no rotary encoding
  kToken,  // token index
  kSpan,   // index of the token's text node
};

const char* to_string(PositionMode mode);
PositionMode parse_position_mode(const std::string& s);

struct HeadConfig {
  std::size_t num_types = 1;
  std::size_t head_hidden = 64;
  double rope_base = 10000.0;
  double mask_value = -1e12;
  PositionMode position_mode = PositionMode::kSpan;
};

void validate(const HeadConfig& cfg);

// Per-type projections stored stacked along columns: type t owns columns
// [t*d, (t+1)*d) of head.wq / head.wk (H x D*d) and head.bq / head.bk.
void init_hga_head(ParamStore& params, const HeadConfig& cfg, std::size_t hidden, std::mt19937_64& rng,
                   double weight_std = 0.02, bool random_bias = false);

// D x L x L hyperedge scores; cell (t, i, j) scores span [i, j] as type t.
struct ScoreTensor {
  std::size_t types = 0;
  std::size_t length = 0;
  std::vector<double> values;
  std::vector<bool> keep;

  double at(std::size_t t, std::size_t i, std::size_t j) const { return values[(t * length + i) * length + j]; }
  double& at(std::size_t t, std::size_t i, std::size_t j) { return values[(t * length + i) * length + j]; }
};

// Node index of every token.
std::vector<int> span_positions(const TokenSequence& seq);
std::vector<int> head_positions(const TokenSequence& seq, PositionMode mode);

// Pairwise rotation of row i by angles p[i] * base^(-2t/d).
Tensor rotary_apply(const Tensor& v, std::span<const int> positions, double base);

// Additive mask: mask_value below the diagonal and on any padding row/column.
Tensor score_mask(const std::vector<bool>& keep, double mask_value);

// Per type t: s_t = rot(h Wq_t + bq_t) rot(h Wk_t + bk_t)^T + mask.
// `positions` is ignored when cfg.position_mode is kNone.
std::vector<Var> score(Tape& tape, Var h, std::span<const int> positions, const ParamStore& params,
                       const HeadConfig& cfg, const std::vector<bool>& keep);

ScoreTensor score(const Tensor& h, std::span<const int> positions, const ParamStore& params, const HeadConfig& cfg,
                  const std::vector<bool>& keep);

ScoreTensor to_score_tensor(const Tape& tape, std::span<const Var> per_type, const std::vector<bool>& keep);

}  // namespace hga
