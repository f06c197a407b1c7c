#include "hga/evaluate.hpp"

#include <algorithm>
#include <json.hpp>

#include "hga/bio.hpp"

namespace hga {
namespace {

std::size_t span_extent(const EntitySet& a, const EntitySet& b) {
  int end = -1;
  for (const Entity& e : a) end = std::max(end, e.end);
  for (const Entity& e : b) end = std::max(end, e.end);
  return static_cast<std::size_t>(end + 1);
}

nlohmann::ordered_json scores_json(const Counts& c, const Scores& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
          {"gold", c.gold},           {"predicted", c.predicted}, {"correct", c.correct}};
}

}  // namespace

Scores scores_from(const Counts& c) {
  Scores s;
  s.precision = c.predicted ? static_cast<double>(c.correct) / static_cast<double>(c.predicted) : 0.0;
  s.recall = c.gold ? static_cast<double>(c.correct) / static_cast<double>(c.gold) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

EvalAccumulator::EvalAccumulator(const LabelSet& labels) : labels_(labels), per_type_(labels.size()) {}

void EvalAccumulator::add(const EntitySet& predicted, const EntitySet& gold) {
  const std::size_t len = span_extent(predicted, gold);
  const std::size_t d = labels_.size();
  const EntitySet p = tag_ids_to_entities(entities_to_tag_ids(predicted, len, d), d);
  const EntitySet g = tag_ids_to_entities(entities_to_tag_ids(gold, len, d), d);
  for (const Entity& e : p) ++per_type_[static_cast<std::size_t>(e.type)].predicted;
  for (const Entity& e : g) ++per_type_[static_cast<std::size_t>(e.type)].gold;
  // Both are sorted and non-overlapping.
  std::size_t a = 0;
  std::size_t b = 0;
  while (a < p.size() && b < g.size()) {
    if (p[a] == g[b]) {
      ++per_type_[static_cast<std::size_t>(p[a].type)].correct;
      ++a;
      ++b;
    } else if (p[a] < g[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  total_.predicted += static_cast<long>(p.size());
  total_.gold += static_cast<long>(g.size());
  total_.correct = 0;
  for (const Counts& c : per_type_) total_.correct += c.correct;
}

EvalReport EvalAccumulator::report() const {
  EvalReport r;
  r.counts = total_;
  r.scores = scores_from(total_);
  for (std::size_t t = 0; t < per_type_.size(); ++t) {
    r.per_type.push_back(TypeReport{labels_.name(t), per_type_[t], scores_from(per_type_[t])});
  }
  return r;
}

EvalReport evaluate(const EntitySet& predicted, const EntitySet& gold, const LabelSet& labels) {
  EvalAccumulator acc(labels);
  acc.add(predicted, gold);
  return acc.report();
}

Counts count_matches_direct(const EntitySet& predicted, const EntitySet& gold) {
  Counts c;
  c.predicted = static_cast<long>(predicted.size());
  c.gold = static_cast<long>(gold.size());
  for (const Entity& e : predicted) c.correct += std::count(gold.begin(), gold.end(), e) > 0 ? 1 : 0;
  return c;
}

std::string to_json(const EvalReport& report, int indent) {
  nlohmann::ordered_json j = scores_json(report.counts, report.scores);
  nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
  for (const TypeReport& t : report.per_type) per_type[t.type] = scores_json(t.counts, t.scores);
  j["per_type"] = std::move(per_type);
  return j.dump(indent);
}

}  // namespace hga
