#include "hga/tokenizer.hpp"

#include "hga/error.hpp"

namespace hga {

TokenSequence tokenize(const Document& doc, const Vocabulary& vocab, std::size_t max_seq_len) {
  if (max_seq_len < 1) throw InvalidArgument("max_seq_len must be at least 1");
  TokenSequence seq;
  seq.token_ids.reserve(max_seq_len);
  for (const TextNode& node : doc.nodes) {
    for (const std::string& w : split_words(node.text)) {
      if (seq.token_ids.size() == max_seq_len) break;
      seq.token_ids.push_back(vocab.id(w));
      seq.node_of_token.push_back(node.id);
      seq.span_positions.push_back(node.id);
      seq.attention_keep.push_back(true);
    }
  }
  const int tail = seq.node_of_token.empty() ? 0 : seq.node_of_token.back();
  while (seq.token_ids.size() < max_seq_len) {
    seq.token_ids.push_back(Vocabulary::kPad);
    seq.node_of_token.push_back(tail);
    seq.span_positions.push_back(tail);
    seq.attention_keep.push_back(false);
  }
  return seq;
}

EntitySet gold_entities(const Document& doc, const TokenSequence& seq, const LabelSet& labels) {
  const std::size_t real = seq.real_length();
  EntitySet out;
  std::size_t i = 0;
  for (const TextNode& node : doc.nodes) {
    std::optional<int> type;
    if (node.label != kOtherLabel) {
      type = labels.index_of(node.label);
      if (!type) throw InvalidArgument("node label '" + node.label + "' is not in the label set");
    }
    const std::size_t words = split_words(node.text).size();
    const std::size_t first = i;
    while (i < real && seq.node_of_token[i] == node.id) ++i;
    const std::size_t kept = i - first;
    if (type && kept > 0 && kept == words) {
      out.push_back(Entity{*type, static_cast<int>(first), static_cast<int>(i - 1)});
    }
  }
  return out;
}

std::vector<std::optional<Box>> token_boxes(const Document& doc, const TokenSequence& seq) {
  std::vector<std::optional<Box>> out(seq.length());
  const std::size_t real = seq.real_length();
  std::size_t i = 0;
  for (const TextNode& node : doc.nodes) {
    const bool word_boxes = node.words.size() == split_words(node.text).size();
    for (std::size_t w = 0; i < real && seq.node_of_token[i] == node.id; ++i, ++w) {
      out[i] = node.box ? node.box : (word_boxes ? node.words[w].box : std::nullopt);
    }
  }
  return out;
}

}  // namespace hga
