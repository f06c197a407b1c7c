#pragma once

#include <optional>
#include <vector>

#include "hga/document.hpp"
#include "hga/vocab.hpp"

namespace hga {

// Whitespace word-level tokenization. Real tokens come first, truncated at
// max_seq_len, then padding up to max_seq_len with attention_keep = false.
// Padding repeats the last real node index in node_of_token/span_positions
// (0 for an empty document) so both stay nondecreasing.
TokenSequence tokenize(const Document& doc, const Vocabulary& vocab, std::size_t max_seq_len);

// One entity per labeled node, spanning that node's tokens. Nodes cut by
// truncation are dropped. Throws InvalidArgument for a label that is
// neither "other" nor in the label set.
EntitySet gold_entities(const Document& doc, const TokenSequence& seq, const LabelSet& labels);

// Per-token layout box at segment level: every token of a node carries the
// node box. Without a node box the word box is used when the node's words
// line up with its whitespace split. Padding gets no box.
std::vector<std::optional<Box>> token_boxes(const Document& doc, const TokenSequence& seq);

}  // namespace hga
