#pragma once

#include <string>
#include <vector>

#include "hga/document.hpp"

namespace hga {

struct Counts {
  long gold = 0;
  long predicted = 0;
  long correct = 0;
};

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = correct/predicted, R = correct/gold, F1 = 2PR/(P+R); each 0 when its
// denominator is 0.
Scores scores_from(const Counts& c);

struct TypeReport {
  std::string type;
  Counts counts;
  Scores scores;
};

struct EvalReport {
  Counts counts;
  Scores scores;
  std::vector<TypeReport> per_type;
};

// Entity-level exact-match (type, start, end) counting. Both sides pass
// through BIO tags and back before matching, so results equal BIO-based
// span scoring. Throws InvalidArgument if a set has overlapping entities.
class EvalAccumulator {
 public:
  explicit EvalAccumulator(const LabelSet& labels);

  void add(const EntitySet& predicted, const EntitySet& gold);
  EvalReport report() const;

 private:
  LabelSet labels_;
  Counts total_;
  std::vector<Counts> per_type_;
};

EvalReport evaluate(const EntitySet& predicted, const EntitySet& gold, const LabelSet& labels);

// Same counts computed directly on the span sets, without the BIO round trip.
Counts count_matches_direct(const EntitySet& predicted, const EntitySet& gold);

std::string to_json(const EvalReport& report, int indent = 2);

}  // namespace hga
