#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hga/document.hpp"
#include "hga/hga_head.hpp"
#include "hga/tape.hpp"

namespace hga {

// Positive and negative cells per type over an L x L grid. Negatives are the
// upper-triangle (i <= j), non-padding cells that are not positive; every
// other cell belongs to neither set.
struct HyperedgeLabels {
  std::size_t types = 0;
  std::size_t length = 0;
  std::vector<std::vector<std::pair<int, int>>> positives;
  std::vector<std::vector<std::uint8_t>> positive_cells;
  std::vector<std::vector<std::uint8_t>> negative_cells;

  std::size_t negative_count() const;
};

struct BalanceConfig {
  double b = 0.0;
};

void validate(const BalanceConfig& cfg);

HyperedgeLabels build_labels(const EntitySet& gold, std::size_t length, std::size_t types,
                             const std::vector<bool>& keep);

struct LossParts {
  std::vector<double> positive;  // L_p per type
  std::vector<double> negative;  // L_n per type
  double total = 0.0;
};

// Per type: L_p = log(1 + sum_P e^{-s}), L_n = log(1 + sum_N e^{s});
// total = sum over types of (1+b) L_p + (1-b) L_n.
LossParts balanced_loss_parts(const ScoreTensor& s, const HyperedgeLabels& labels, const BalanceConfig& cfg);
double balanced_loss(const ScoreTensor& s, const HyperedgeLabels& labels, const BalanceConfig& cfg);

Var balanced_loss(Tape& tape, std::span<const Var> per_type, const HyperedgeLabels& labels, const BalanceConfig& cfg);

}  // namespace hga
