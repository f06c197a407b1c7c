#include "hga/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "hga/error.hpp"

namespace hga {

Vocabulary::Vocabulary() {
  append("<pad>");
  append("<unk>");
}

void Vocabulary::append(const std::string& word) {
  if (index_.count(word)) throw InvalidArgument("duplicate vocabulary entry: " + word);
  index_.emplace(word, static_cast<int>(words_.size()));
  words_.push_back(word);
}

int Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < words_.size(); ++i) out += words_[i] + "\t" + std::to_string(i) + "\n";
  return out;
}

Vocabulary Vocabulary::parse(const std::string& text) {
  Vocabulary v;
  v.words_.clear();
  v.index_.clear();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw ParseError("vocabulary line " + std::to_string(lineno) + ": missing TAB");
    const std::string word = line.substr(0, tab);
    int id = 0;
    try {
      id = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw ParseError("vocabulary line " + std::to_string(lineno) + ": bad id");
    }
    if (id != static_cast<int>(v.words_.size())) {
      throw ParseError("vocabulary line " + std::to_string(lineno) + ": ids must be contiguous from 0");
    }
    v.append(word);
  }
  if (v.size() < 2 || v.words_[kPad] != "<pad>" || v.words_[kUnk] != "<unk>") {
    throw ParseError("vocabulary must start with <pad>=0 and <unk>=1");
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize();
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Vocabulary build_vocab(const std::vector<Document>& docs, int min_count) {
  if (docs.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");
  std::map<std::string, long> counts;
  for (const Document& d : docs)
    for (const TextNode& n : d.nodes)
      for (const std::string& w : split_words(n.text)) ++counts[w];
  if (counts.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [w, c] : counts)
    if (c >= min_count && w != "<pad>" && w != "<unk>") kept.emplace_back(w, c);
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (const auto& [w, _] : kept) v.append(w);
  return v;
}

}  // namespace hga
