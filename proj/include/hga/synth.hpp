#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hga/document.hpp"

namespace hga {

struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t n_docs = 200;
  LabelSet labels;
  std::pair<int, int> nodes_per_doc{6, 14};
  std::pair<int, int> tokens_per_node{1, 4};
  double other_fraction = 0.3;
  int vocab_size_per_type = 40;
};

// Share of each type's word pool that is common to all pools.
inline constexpr double kSharedWordFraction = 0.1;

void validate(const SynthConfig& cfg);

// Mixes a base seed with an index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Per-label word pools: index t < D for entity types, index D for "other".
std::vector<std::vector<std::string>> synth_word_pools(const SynthConfig& cfg);

// Form-like documents on a virtual 1000x1000 page: node k sits in column
// k mod 2 of row k / 2 of a two-column grid.
// Node words come from the pool of the node's label. Labeled nodes of
// document n cycle through the types starting at n mod D before shuffling,
// so every type appears in every document with at least D labeled nodes.
// Document n depends only on (seed, n).
std::vector<Document> gen_dataset(const SynthConfig& cfg);
Document gen_document(const SynthConfig& cfg, const std::vector<std::vector<std::string>>& pools, std::size_t index);

// Default type names: header/question/answer for D <= 3, else type00...
LabelSet synth_label_set(std::size_t num_types);

}  // namespace hga
