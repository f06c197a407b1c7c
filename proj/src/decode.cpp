#include "hga/decode.hpp"

#include <algorithm>

namespace hga {
namespace {

struct Candidate {
  double score;
  Entity entity;
};

bool outranks(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.entity.start != b.entity.start) return a.entity.start < b.entity.start;
  const int len_a = a.entity.end - a.entity.start;
  const int len_b = b.entity.end - b.entity.start;
  if (len_a != len_b) return len_a < len_b;
  return a.entity.type < b.entity.type;
}

}  // namespace

EntitySet decode(const ScoreTensor& s, const DecodeConfig& cfg) {
  const std::size_t len = s.length;
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < len; ++i) {
    if (!s.keep.empty() && !s.keep[i]) continue;
    for (std::size_t j = i; j < len; ++j) {
      if (!s.keep.empty() && !s.keep[j]) continue;
      int best = -1;
      for (std::size_t t = 0; t < s.types; ++t) {
        const double v = s.at(t, i, j);
        if (v > cfg.threshold && (best < 0 || v > s.at(static_cast<std::size_t>(best), i, j))) best = static_cast<int>(t);
      }
      if (best >= 0) {
        candidates.push_back(
            {s.at(static_cast<std::size_t>(best), i, j), Entity{best, static_cast<int>(i), static_cast<int>(j)}});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), outranks);

  EntitySet accepted;
  for (const Candidate& c : candidates) {
    const bool clash = std::any_of(accepted.begin(), accepted.end(), [&](const Entity& e) { return overlaps(e, c.entity); });
    if (!clash) accepted.push_back(c.entity);
  }
  sort_entities(accepted);
  return accepted;
}

}  // namespace hga
