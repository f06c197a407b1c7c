#include "hga/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "hga/error.hpp"

namespace hga {
namespace {

constexpr int kPageSize = 1000;
constexpr int kMargin = 20;
constexpr int kCharWidth = 10;
constexpr int kWordGap = 8;
// Two-column form grid: node k occupies column k % 2 of row k / 2.
constexpr int kColumnWidth = 480;
constexpr int kRowHeight = 36;
constexpr int kTextHeight = 20;

std::string make_word(std::mt19937_64& rng) {
  static constexpr std::string_view kConsonants = "bcdfghjklmnprstvz";
  static constexpr std::string_view kVowels = "aeiou";
  std::uniform_int_distribution<int> syllables(2, 3);
  std::uniform_int_distribution<std::size_t> cons(0, kConsonants.size() - 1);
  std::uniform_int_distribution<std::size_t> vow(0, kVowels.size() - 1);
  std::string w;
  const int n = syllables(rng);
  for (int s = 0; s < n; ++s) {
    w += kConsonants[cons(rng)];
    w += kVowels[vow(rng)];
  }
  return w;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.labels.size() == 0) throw InvalidArgument("synth: label set is empty");
  if (cfg.nodes_per_doc.first < 0 || cfg.nodes_per_doc.first > cfg.nodes_per_doc.second) {
    throw InvalidArgument("synth: nodes_per_doc must satisfy 0 <= min <= max");
  }
  if (cfg.tokens_per_node.first < 1 || cfg.tokens_per_node.first > cfg.tokens_per_node.second) {
    throw InvalidArgument("synth: tokens_per_node must satisfy 1 <= min <= max");
  }
  if (!(cfg.other_fraction >= 0.0 && cfg.other_fraction <= 1.0)) {
    throw InvalidArgument("synth: other_fraction must lie in [0, 1]");
  }
  if (cfg.vocab_size_per_type <= 0) throw InvalidArgument("synth: vocab_size_per_type must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<std::string>> synth_word_pools(const SynthConfig& cfg) {
  validate(cfg);
  const std::size_t pools = cfg.labels.size() + 1;
  const auto per_pool = static_cast<std::size_t>(cfg.vocab_size_per_type);
  const auto shared = static_cast<std::size_t>(std::lround(kSharedWordFraction * static_cast<double>(per_pool)));

  std::mt19937_64 rng(derive_seed(cfg.seed, 0xFFFFFFFFULL));
  std::set<std::string> used;
  auto fresh = [&] {
    for (;;) {
      std::string w = make_word(rng);
      if (used.insert(w).second) return w;
    }
  };
  std::vector<std::string> common;
  for (std::size_t i = 0; i < shared; ++i) common.push_back(fresh());
  std::vector<std::vector<std::string>> out(pools);
  for (auto& pool : out) {
    for (std::size_t i = shared; i < per_pool; ++i) pool.push_back(fresh());
    pool.insert(pool.end(), common.begin(), common.end());
  }
  return out;
}

Document gen_document(const SynthConfig& cfg, const std::vector<std::vector<std::string>>& pools, std::size_t index) {
  std::mt19937_64 rng(derive_seed(cfg.seed, index));
  const int num_types = static_cast<int>(cfg.labels.size());
  const int n_nodes = std::uniform_int_distribution<int>(cfg.nodes_per_doc.first, cfg.nodes_per_doc.second)(rng);
  const int n_other = static_cast<int>(std::lround(cfg.other_fraction * n_nodes));

  // -1 marks "other".
  std::vector<int> label_of(static_cast<std::size_t>(n_nodes), -1);
  for (int k = 0; k < n_nodes - n_other; ++k) {
    label_of[static_cast<std::size_t>(k)] = static_cast<int>((index + static_cast<std::size_t>(k)) % static_cast<std::size_t>(num_types));
  }
  std::shuffle(label_of.begin(), label_of.end(), rng);

  Document doc;
  char name[32];
  std::snprintf(name, sizeof(name), "doc_%05zu", index);
  doc.id = name;
  doc.page_size = std::make_pair(kPageSize, kPageSize);

  std::uniform_int_distribution<int> n_tokens(cfg.tokens_per_node.first, cfg.tokens_per_node.second);
  for (int k = 0; k < n_nodes; ++k) {
    const int label = label_of[static_cast<std::size_t>(k)];
    const auto& pool = pools[label < 0 ? static_cast<std::size_t>(num_types) : static_cast<std::size_t>(label)];
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const int count = n_tokens(rng);
    std::vector<std::string> words;
    for (int w = 0; w < count; ++w) {
      words.push_back(pool[pick(rng)]);
    }
    const int x = kMargin + (k % 2) * kColumnWidth;
    const int y = kMargin + (k / 2) * kRowHeight;
    TextNode node;
    node.id = k;
    node.label = label < 0 ? kOtherLabel : cfg.labels.name(static_cast<std::size_t>(label));
    int wx = x;
    for (const auto& w : words) {
      const int ww = static_cast<int>(w.size()) * kCharWidth;
      const Box box{std::min(wx, kPageSize), std::min(y, kPageSize), std::min(wx + ww, kPageSize),
                    std::min(y + kTextHeight, kPageSize)};
      node.words.push_back(Word{w, box});
      if (!node.text.empty()) node.text += ' ';
      node.text += w;
      wx += ww + kWordGap;
    }
    node.box = Box{node.words.front().box->x0, node.words.front().box->y0, node.words.back().box->x1,
                   node.words.back().box->y1};
    doc.nodes.push_back(std::move(node));
  }
  return doc;
}

std::vector<Document> gen_dataset(const SynthConfig& cfg) {
  const auto pools = synth_word_pools(cfg);
  std::vector<Document> docs;
  docs.reserve(cfg.n_docs);
  for (std::size_t n = 0; n < cfg.n_docs; ++n) docs.push_back(gen_document(cfg, pools, n));
  return docs;
}

LabelSet synth_label_set(std::size_t num_types) {
  static const std::vector<std::string> kFormTypes = {"header", "question", "answer"};
  if (num_types <= kFormTypes.size()) {
    return LabelSet(std::vector<std::string>(kFormTypes.begin(), kFormTypes.begin() + static_cast<std::ptrdiff_t>(num_types)));
  }
  std::vector<std::string> names;
  for (std::size_t t = 0; t < num_types; ++t) {
    const std::string digits = std::to_string(t);
    names.push_back("type" + std::string(digits.size() < 2 ? 1 : 0, '0') + digits);
  }
  return LabelSet(std::move(names));
}

}  // namespace hga
