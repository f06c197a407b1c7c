#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hga {

inline constexpr const char* kOtherLabel = "other";

struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct Word {
  std::string text;
  std::optional<Box> box;
  friend bool operator==(const Word&, const Word&) = default;
};

struct TextNode {
  int id = 0;
  std::string text;
  std::optional<Box> box;
  std::string label = kOtherLabel;
  std::vector<Word> words;
  friend bool operator==(const TextNode&, const TextNode&) = default;
};

struct Document {
  std::string id;
  std::vector<TextNode> nodes;
  std::optional<std::pair<int, int>> page_size;
  friend bool operator==(const Document&, const Document&) = default;
};

// Throws SchemaError naming the offending node if ids are not 0..m-1, a text
// is empty or a box is inverted.
void validate(const Document& doc);

// Whitespace-split words of a node's text.
std::vector<std::string> split_words(const std::string& text);

// Ordered entity-type names; "other" is never a member.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<std::string> types);

  std::size_t size() const { return types_.size(); }
  const std::string& name(std::size_t index) const { return types_.at(index); }
  const std::vector<std::string>& types() const { return types_; }
  std::optional<int> index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_of(name).has_value(); }

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> types_;
};

// Typed token span [start, end], both inclusive.
struct Entity {
  int type = 0;
  int start = 0;
  int end = 0;
  friend bool operator==(const Entity&, const Entity&) = default;
  // Reading order: (start, end, type).
  friend std::strong_ordering operator<=>(const Entity& a, const Entity& b) {
    if (auto c = a.start <=> b.start; c != 0) return c;
    if (auto c = a.end <=> b.end; c != 0) return c;
    return a.type <=> b.type;
  }
};

// Kept sorted by (start, end, type).
using EntitySet = std::vector<Entity>;

void sort_entities(EntitySet& entities);
bool overlaps(const Entity& a, const Entity& b);

struct TokenSequence {
  std::vector<int> token_ids;
  // Token -> originating node; padding repeats the last real node index.
  std::vector<int> node_of_token;
  // Per-token span position: the node index for real tokens, 0 on padding.
  std::vector<int> span_positions;
  std::vector<bool> attention_keep;

  std::size_t length() const { return token_ids.size(); }
  // Number of leading non-padding tokens.
  std::size_t real_length() const;
  // Copy with trailing padding removed.
  TokenSequence trimmed() const;
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

}  // namespace hga
