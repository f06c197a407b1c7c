#include "hga/loss.hpp"

#include "hga/error.hpp"
#include "hga/kernels.hpp"

namespace hga {

std::size_t HyperedgeLabels::negative_count() const {
  std::size_t n = 0;
  for (const auto& cells : negative_cells)
    for (auto c : cells) n += c;
  return n;
}

void validate(const BalanceConfig& cfg) {
  if (!(cfg.b >= 0.0 && cfg.b < 1.0)) throw InvalidArgument("balance factor b must lie in [0, 1)");
}

HyperedgeLabels build_labels(const EntitySet& gold, std::size_t length, std::size_t types,
                             const std::vector<bool>& keep) {
  if (keep.size() != length) throw InvalidArgument("attention_keep length does not match L");
  HyperedgeLabels labels;
  labels.types = types;
  labels.length = length;
  labels.positives.resize(types);
  labels.positive_cells.assign(types, std::vector<std::uint8_t>(length * length, 0));
  labels.negative_cells.assign(types, std::vector<std::uint8_t>(length * length, 0));
  for (const Entity& e : gold) {
    if (e.type < 0 || static_cast<std::size_t>(e.type) >= types) {
      throw InvalidArgument("gold entity type " + std::to_string(e.type) + " out of range");
    }
    if (e.start < 0 || e.start > e.end || static_cast<std::size_t>(e.end) >= length) {
      throw InvalidArgument("gold entity span out of range");
    }
    if (!keep[static_cast<std::size_t>(e.start)] || !keep[static_cast<std::size_t>(e.end)]) {
      throw InvalidArgument("gold entity touches padding at [" + std::to_string(e.start) + "," +
                            std::to_string(e.end) + "]");
    }
    const auto t = static_cast<std::size_t>(e.type);
    const std::size_t cell = static_cast<std::size_t>(e.start) * length + static_cast<std::size_t>(e.end);
    if (!labels.positive_cells[t][cell]) {
      labels.positive_cells[t][cell] = 1;
      labels.positives[t].emplace_back(e.start, e.end);
    }
  }
  for (std::size_t t = 0; t < types; ++t)
    for (std::size_t i = 0; i < length; ++i)
      for (std::size_t j = i; j < length; ++j) {
        const std::size_t cell = i * length + j;
        if (keep[i] && keep[j] && !labels.positive_cells[t][cell]) labels.negative_cells[t][cell] = 1;
      }
  return labels;
}

LossParts balanced_loss_parts(const ScoreTensor& s, const HyperedgeLabels& labels, const BalanceConfig& cfg) {
  validate(cfg);
  if (s.types != labels.types || s.length != labels.length) throw InvalidArgument("score/label shape mismatch");
  LossParts parts;
  const std::size_t cells = s.length * s.length;
  for (std::size_t t = 0; t < s.types; ++t) {
    std::span<const double> grid(s.values.data() + t * cells, cells);
    parts.positive.push_back(kernels::log1p_sum_exp(grid, labels.positive_cells[t], -1.0));
    parts.negative.push_back(kernels::log1p_sum_exp(grid, labels.negative_cells[t], 1.0));
    parts.total += (1.0 + cfg.b) * parts.positive.back() + (1.0 - cfg.b) * parts.negative.back();
  }
  return parts;
}

double balanced_loss(const ScoreTensor& s, const HyperedgeLabels& labels, const BalanceConfig& cfg) {
  return balanced_loss_parts(s, labels, cfg).total;
}

Var balanced_loss(Tape& tape, std::span<const Var> per_type, const HyperedgeLabels& labels, const BalanceConfig& cfg) {
  validate(cfg);
  if (per_type.size() != labels.types) throw InvalidArgument("score/label type count mismatch");
  std::optional<Var> total;
  for (std::size_t t = 0; t < per_type.size(); ++t) {
    const Var lp = tape.log1p_sum_exp(per_type[t], labels.positive_cells[t], -1.0);
    const Var ln = tape.log1p_sum_exp(per_type[t], labels.negative_cells[t], 1.0);
    const Var term = tape.add(tape.scale(lp, 1.0 + cfg.b), tape.scale(ln, 1.0 - cfg.b));
    total = total ? tape.add(*total, term) : term;
  }
  return total ? *total : tape.constant(Tensor::scalar(0.0));
}

}  // namespace hga
