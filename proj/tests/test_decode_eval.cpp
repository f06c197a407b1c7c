#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "hga/baseline_heads.hpp"
#include "hga/bio.hpp"
#include "hga/decode.hpp"
#include "hga/error.hpp"
#include "hga/evaluate.hpp"

namespace hga {
namespace {

// Scores drawn from a coarse grid so that ties occur often.
ScoreTensor grid_scores(std::size_t types, std::size_t len, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> g(-6, 6);
  ScoreTensor s;
  s.types = types;
  s.length = len;
  s.keep.assign(len, true);
  std::uniform_int_distribution<std::size_t> pad(0, len / 2);
  const std::size_t padding = rng() % 3 == 0 ? pad(rng) : 0;
  for (std::size_t k = 0; k < padding; ++k) s.keep[len - 1 - k] = false;
  s.values.resize(types * len * len);
  for (double& v : s.values) v = 0.5 * g(rng);
  return s;
}

struct Candidate {
  int type;
  int start;
  int end;
  double score;
};

// Literal reading of the three decode rules: threshold, per-span argmax type
// with lowest index on ties, then repeatedly accept the best remaining
// candidate that does not intersect anything accepted so far.
EntitySet oracle_decode(const ScoreTensor& s, double threshold) {
  std::vector<Candidate> cands;
  for (int i = 0; i < static_cast<int>(s.length); ++i) {
    for (int j = i; j < static_cast<int>(s.length); ++j) {
      if (!s.keep[i] || !s.keep[j]) continue;
      std::optional<Candidate> best;
      for (int t = 0; t < static_cast<int>(s.types); ++t) {
        const double v = s.at(t, i, j);
        if (!(v > threshold)) continue;
        if (!best || v > best->score) best = Candidate{t, i, j, v};
      }
      if (best) cands.push_back(*best);
    }
  }
  auto better = [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    if (a.end - a.start != b.end - b.start) return a.end - a.start < b.end - b.start;
    return a.type < b.type;
  };
  EntitySet accepted;
  std::vector<bool> used(cands.size(), false);
  for (;;) {
    std::optional<std::size_t> pick;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (used[c]) continue;
      bool clash = false;
      for (const Entity& e : accepted)
        if (cands[c].start <= e.end && e.start <= cands[c].end) clash = true;
      if (clash) continue;
      if (!pick || better(cands[c], cands[*pick])) pick = c;
    }
    if (!pick) break;
    used[*pick] = true;
    accepted.push_back(Entity{cands[*pick].type, cands[*pick].start, cands[*pick].end});
  }
  sort_entities(accepted);
  return accepted;
}

TEST(Decode, AllNegativeGivesEmpty) {
  ScoreTensor s;
  s.types = 2;
  s.length = 3;
  s.keep.assign(3, true);
  s.values.assign(18, -0.5);
  EXPECT_TRUE(decode(s).empty());
}

TEST(Decode, TypeUniquenessPerSpan) {
  ScoreTensor s;
  s.types = 2;
  s.length = 6;
  s.keep.assign(6, true);
  s.values.assign(72, -5.0);
  s.at(0, 2, 4) = 3.0;
  s.at(1, 2, 4) = 1.0;
  EXPECT_EQ(decode(s), (EntitySet{Entity{0, 2, 4}}));
}

TEST(Decode, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> len(1, 6), types(1, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto s = grid_scores(types(rng), len(rng), rng);
    const double threshold = trial % 4 == 0 ? 0.5 : 0.0;
    EXPECT_EQ(decode(s, DecodeConfig{threshold}), oracle_decode(s, threshold)) << "trial " << trial;
  }
}

TEST(Decode, OutputIsValidAndScaleCovariant) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreTensor s;
    s.types = 3;
    s.length = 7;
    s.keep = {true, true, true, true, true, trial % 2 == 0, false};
    s.values.resize(3 * 49);
    for (double& v : s.values) v = n(rng);
    const auto out = decode(s);
    for (std::size_t a = 0; a < out.size(); ++a) {
      EXPECT_LE(out[a].start, out[a].end);
      EXPECT_TRUE(s.keep[out[a].start] && s.keep[out[a].end]);
      for (std::size_t b = a + 1; b < out.size(); ++b) EXPECT_FALSE(overlaps(out[a], out[b]));
    }
    ScoreTensor scaled = s;
    for (double& v : scaled.values) v *= 3.5;
    EXPECT_EQ(decode(scaled), out);
  }
}

TEST(Decode, GreedyPrefersHigherScoreThenEarlierShorter) {
  ScoreTensor s;
  s.types = 1;
  s.length = 4;
  s.keep.assign(4, true);
  s.values.assign(16, -1.0);
  s.at(0, 0, 2) = 2.0;
  s.at(0, 1, 3) = 3.0;
  s.at(0, 0, 0) = 1.0;
  EXPECT_EQ(decode(s), (EntitySet{Entity{0, 0, 0}, Entity{0, 1, 3}}));
  s.at(0, 1, 3) = 2.0;
  s.at(0, 0, 1) = 2.0;
  // Equal scores: start 0 before start 1, and [0,1] before [0,2].
  EXPECT_EQ(decode(s), (EntitySet{Entity{0, 0, 1}}));
}

LabelSet three_types() { return LabelSet({"header", "question", "answer"}); }

TEST(Evaluate, PerfectAndEmpty) {
  const EntitySet gold{Entity{0, 0, 1}, Entity{1, 2, 2}, Entity{2, 3, 5}, Entity{1, 6, 6}, Entity{0, 8, 9}};
  const auto perfect = evaluate(gold, gold, three_types());
  EXPECT_EQ(perfect.scores.precision, 1.0);
  EXPECT_EQ(perfect.scores.recall, 1.0);
  EXPECT_EQ(perfect.scores.f1, 1.0);
  const auto empty = evaluate({}, gold, three_types());
  EXPECT_EQ(empty.scores.precision, 0.0);
  EXPECT_EQ(empty.scores.recall, 0.0);
  EXPECT_EQ(empty.scores.f1, 0.0);
}

TEST(Evaluate, WorkedCounts) {
  const EntitySet gold{Entity{0, 0, 1}, Entity{1, 2, 2}, Entity{2, 3, 5}, Entity{1, 7, 7}};
  const EntitySet pred{Entity{0, 0, 1}, Entity{1, 2, 2}, Entity{2, 3, 5}, Entity{2, 7, 7}, Entity{0, 9, 9}};
  const auto r = evaluate(pred, gold, three_types());
  EXPECT_EQ(r.counts.gold, 4);
  EXPECT_EQ(r.counts.predicted, 5);
  EXPECT_EQ(r.counts.correct, 3);
  EXPECT_DOUBLE_EQ(r.scores.precision, 0.6);
  EXPECT_DOUBLE_EQ(r.scores.recall, 0.75);
  EXPECT_NEAR(r.scores.f1, 2 * 0.6 * 0.75 / 1.35, 1e-12);
  ASSERT_EQ(r.per_type.size(), 3u);
  EXPECT_EQ(r.per_type[1].counts.gold, 2);
  EXPECT_EQ(r.per_type[1].counts.correct, 1);
}

TEST(Evaluate, OverlappingSetThrows) {
  const EntitySet bad{Entity{0, 0, 2}, Entity{1, 2, 3}};
  EXPECT_THROW(evaluate(bad, {}, three_types()), InvalidArgument);
  EXPECT_THROW(evaluate({}, bad, three_types()), InvalidArgument);
}

EntitySet random_entities(std::mt19937_64& rng, int length, int types) {
  EntitySet out;
  int i = 0;
  while (i < length) {
    if (rng() % 3 == 0) {
      const int end = std::min(length - 1, i + static_cast<int>(rng() % 3));
      out.push_back(Entity{static_cast<int>(rng() % static_cast<unsigned>(types)), i, end});
      i = end + 1;
    } else {
      ++i;
    }
  }
  return out;
}

TEST(Evaluate, BioPathAgreesWithDirectPath) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const auto gold = random_entities(rng, 20, 3);
    const auto pred = random_entities(rng, 20, 3);
    const auto r = evaluate(pred, gold, three_types());
    const Counts direct = count_matches_direct(pred, gold);
    EXPECT_EQ(r.counts.gold, direct.gold);
    EXPECT_EQ(r.counts.predicted, direct.predicted);
    EXPECT_EQ(r.counts.correct, direct.correct);
    const auto self = evaluate(gold, gold, three_types());
    if (!gold.empty()) EXPECT_EQ(self.scores.f1, 1.0);
  }
}

TEST(Evaluate, F1Definition) {
  EXPECT_EQ(scores_from(Counts{0, 0, 0}).f1, 0.0);
  const Scores s = scores_from(Counts{10, 8, 6});
  EXPECT_DOUBLE_EQ(s.f1, 2 * s.precision * s.recall / (s.precision + s.recall));
}

TEST(BaselineHeads, ZeroLinearWeightsGiveUniformAndLowestTag) {
  ParamStore params;
  std::mt19937_64 rng(14);
  init_linear_head(params, 2, 4, rng);
  params.value("lin.w").fill(0.0);
  params.value("lin.b").fill(0.0);
  Tape tape(Tape::Mode::kInference);
  const Var h = tape.constant(normal_tensor({3, 4}, 1.0, rng));
  const Tensor logits = tape.value(linear_logits(tape, h, params));
  const Tensor probs = tag_probabilities(logits);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t c = 0; c < 5; ++c) EXPECT_DOUBLE_EQ(probs(i, c), 0.2);
  EXPECT_EQ(argmax_tags(logits, {true, true, true}), (std::vector<int>{0, 0, 0}));
  EXPECT_TRUE(decode_tags(logits, {true, true, true}, 2).empty());
}

TEST(BaselineHeads, ZeroMlpGivesUniform) {
  ParamStore params;
  std::mt19937_64 rng(15);
  MlpConfig cfg;
  init_mlp_head(params, 3, 4, cfg, rng);
  for (const char* name : {"mlp.w1", "mlp.b1", "mlp.w2", "mlp.b2"}) params.value(name).fill(0.0);
  Tape tape(Tape::Mode::kInference);
  const Var h = tape.constant(normal_tensor({2, 4}, 1.0, rng));
  const Tensor probs = tag_probabilities(tape.value(mlp_logits(tape, h, params, cfg, nullptr)));
  for (double p : probs.values()) EXPECT_NEAR(p, 1.0 / 7.0, 1e-15);
}

TEST(BaselineHeads, CrossEntropyVanishesForScaledTeacherLogits) {
  const std::vector<int> targets{0, 3, 4, 1};
  double previous = 1e9;
  for (double scale : {1.0, 5.0, 20.0, 60.0}) {
    Tensor logits({4, 5});
    for (std::size_t i = 0; i < 4; ++i) logits(i, static_cast<std::size_t>(targets[i])) = scale;
    Tape tape(Tape::Mode::kInference);
    const double ce = tape.value(tape.cross_entropy_rows(tape.constant(logits), targets)).item();
    EXPECT_LT(ce, previous);
    previous = ce;
  }
  EXPECT_LT(previous, 1e-20);
}

TEST(BaselineHeads, PaddingForcedToOAndTargetsExcluded) {
  Tensor logits({3, 3});
  logits(0, 1) = 5.0;
  logits(1, 2) = 5.0;
  logits(2, 1) = 5.0;
  const std::vector<bool> keep{true, true, false};
  EXPECT_EQ(argmax_tags(logits, keep), (std::vector<int>{1, 2, 0}));
  EXPECT_EQ(decode_tags(logits, keep, 1), (EntitySet{Entity{0, 0, 1}}));
  EXPECT_EQ(tag_targets({Entity{0, 0, 1}}, keep, 1), (std::vector<int>{1, 2, -1}));
}

}  // namespace
}  // namespace hga
