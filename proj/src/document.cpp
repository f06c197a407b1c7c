#include "hga/document.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "hga/error.hpp"

namespace hga {

void validate(const Document& doc) {
  for (std::size_t i = 0; i < doc.nodes.size(); ++i) {
    const TextNode& n = doc.nodes[i];
    const std::string where = "document '" + doc.id + "' node " + std::to_string(i);
    if (n.id != static_cast<int>(i)) throw SchemaError(where + ": node ids must be contiguous from 0");
    if (n.text.empty()) throw SchemaError(where + ": empty text");
    if (n.box && (n.box->x0 > n.box->x1 || n.box->y0 > n.box->y1)) throw SchemaError(where + ": inverted box");
  }
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

LabelSet::LabelSet(std::vector<std::string> types) : types_(std::move(types)) {
  std::unordered_set<std::string> seen;
  for (const auto& t : types_) {
    if (t == kOtherLabel) throw InvalidArgument("label set must not contain \"other\"");
    if (t.empty()) throw InvalidArgument("label set contains an empty name");
    if (!seen.insert(t).second) throw InvalidArgument("duplicate label in label set: " + t);
  }
}

std::optional<int> LabelSet::index_of(const std::string& name) const {
  auto it = std::find(types_.begin(), types_.end(), name);
  if (it == types_.end()) return std::nullopt;
  return static_cast<int>(it - types_.begin());
}

void sort_entities(EntitySet& entities) { std::sort(entities.begin(), entities.end()); }

bool overlaps(const Entity& a, const Entity& b) { return a.start <= b.end && b.start <= a.end; }

std::size_t TokenSequence::real_length() const {
  std::size_t n = 0;
  while (n < attention_keep.size() && attention_keep[n]) ++n;
  return n;
}

TokenSequence TokenSequence::trimmed() const {
  const auto n = static_cast<std::ptrdiff_t>(real_length());
  TokenSequence out;
  out.token_ids.assign(token_ids.begin(), token_ids.begin() + n);
  out.node_of_token.assign(node_of_token.begin(), node_of_token.begin() + n);
  out.span_positions.assign(span_positions.begin(), span_positions.begin() + n);
  out.attention_keep.assign(attention_keep.begin(), attention_keep.begin() + n);
  return out;
}

}  // namespace hga
