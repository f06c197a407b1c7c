#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "hga/document.hpp"

namespace hga {

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  int id(const std::string& word) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // UTF-8 lines "word<TAB>id", ids ascending.
  std::string serialize() const;
  static Vocabulary parse(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  void append(const std::string& word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;

  friend Vocabulary build_vocab(const std::vector<Document>& docs, int min_count);
};

// Words with count >= min_count after the reserved <pad>/<unk>, ordered by
// count descending then lexicographically.
Vocabulary build_vocab(const std::vector<Document>& docs, int min_count = 1);

}  // namespace hga
