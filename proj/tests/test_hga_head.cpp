#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hga/error.hpp"
#include "hga/gradcheck.hpp"
#include "hga/hga_head.hpp"

namespace hga {
namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  return normal_tensor({rows, cols}, scale, rng);
}

HeadConfig head_cfg(std::size_t types, std::size_t d, PositionMode mode = PositionMode::kSpan) {
  HeadConfig cfg;
  cfg.num_types = types;
  cfg.head_hidden = d;
  cfg.position_mode = mode;
  return cfg;
}

ParamStore random_head(const HeadConfig& cfg, std::size_t hidden, std::uint64_t seed) {
  ParamStore params;
  std::mt19937_64 rng(seed);
  init_hga_head(params, cfg, hidden, rng, 0.5, true);
  return params;
}

double dot_row(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) s += a(i, c) * b(j, c);
  return s;
}

TEST(SpanPositions, NodeIndexPerToken) {
  TokenSequence seq;
  seq.node_of_token = {0, 0, 1, 1, 1};
  EXPECT_EQ(span_positions(seq), (std::vector<int>{0, 0, 1, 1, 1}));
  seq.node_of_token = {0, 0, 0, 0};
  EXPECT_EQ(span_positions(seq), (std::vector<int>{0, 0, 0, 0}));
}

TEST(SpanPositions, LongDocumentMatchesNodeOracle) {
  std::mt19937_64 rng(3);
  TokenSequence seq;
  for (int node = 0; node < 100; ++node) {
    const int n = node == 99 ? 512 - static_cast<int>(seq.node_of_token.size()) : 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < n; ++k) seq.node_of_token.push_back(node);
  }
  seq.token_ids.assign(seq.node_of_token.size(), 2);
  ASSERT_EQ(seq.node_of_token.size(), 512u);
  const auto p = head_positions(seq, PositionMode::kSpan);
  EXPECT_EQ(*std::max_element(p.begin(), p.end()), 99);
  EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], seq.node_of_token[i]);
}

TEST(HeadPositions, TokenAndNoneModes) {
  TokenSequence seq;
  seq.node_of_token = {0, 0, 1};
  seq.token_ids = {2, 2, 2};
  EXPECT_EQ(head_positions(seq, PositionMode::kToken), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(head_positions(seq, PositionMode::kNone), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(parse_position_mode("token"), PositionMode::kToken);
  EXPECT_THROW(parse_position_mode("rope"), InvalidArgument);
}

TEST(Rotary, ZeroPositionIsIdentity) {
  std::mt19937_64 rng(1);
  const Tensor v = random_tensor(4, 8, rng);
  const std::vector<int> p(4, 0);
  EXPECT_EQ(rotary_apply(v, p, 1e4), v);
}

TEST(Rotary, RelativePositionIdentity) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> pos(0, 512);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor q = random_tensor(1, 16, rng);
    const Tensor k = random_tensor(1, 16, rng);
    const int i = pos(rng);
    const int j = pos(rng);
    const std::vector<int> pi{i}, pj{j}, pd{j - i};
    const double lhs = dot_row(rotary_apply(q, pi, 1e4), 0, rotary_apply(k, pj, 1e4), 0);
    const double rhs = dot_row(q, 0, rotary_apply(k, pd, 1e4), 0);
    EXPECT_NEAR(lhs, rhs, 1e-10) << "i=" << i << " j=" << j;
  }
}

TEST(Rotary, PreservesRowNorms) {
  std::mt19937_64 rng(4);
  const Tensor v = random_tensor(6, 10, rng);
  const std::vector<int> p{0, 3, 17, 100, 255, 511};
  const Tensor r = rotary_apply(v, p, 1e4);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(dot_row(v, i, v, i), dot_row(r, i, r, i), 1e-12);
}

TEST(Rotary, PairRotationFormula) {
  // d = 4: pair 0 at angle p, pair 1 at angle p * base^(-1/2).
  const Tensor v({1, 4}, std::vector<double>{1.0, 2.0, 3.0, 4.0});
  const std::vector<int> p{2};
  const Tensor r = rotary_apply(v, p, 100.0);
  const double a0 = 2.0;
  const double a1 = 2.0 / 10.0;
  EXPECT_NEAR(r(0, 0), 1.0 * std::cos(a0) - 2.0 * std::sin(a0), 1e-12);
  EXPECT_NEAR(r(0, 1), 1.0 * std::sin(a0) + 2.0 * std::cos(a0), 1e-12);
  EXPECT_NEAR(r(0, 2), 3.0 * std::cos(a1) - 4.0 * std::sin(a1), 1e-12);
  EXPECT_NEAR(r(0, 3), 3.0 * std::sin(a1) + 4.0 * std::cos(a1), 1e-12);
}

TEST(HeadConfig, RejectsOddHiddenAndZeroTypes) {
  EXPECT_THROW(validate(head_cfg(1, 3)), InvalidArgument);
  EXPECT_THROW(validate(head_cfg(0, 4)), InvalidArgument);
  EXPECT_NO_THROW(validate(head_cfg(2, 4)));
}

TEST(Score, LowerTriangleMasked) {
  const auto cfg = head_cfg(2, 4);
  const auto params = random_head(cfg, 6, 5);
  std::mt19937_64 rng(6);
  const Tensor h = random_tensor(5, 6, rng);
  const std::vector<int> p{0, 0, 1, 2, 2};
  const std::vector<bool> keep(5, true);
  const ScoreTensor s = score(h, p, params, cfg, keep);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        if (i > j) {
          EXPECT_LE(s.at(t, i, j), cfg.mask_value / 2);
        } else {
          EXPECT_TRUE(std::isfinite(s.at(t, i, j)));
          EXPECT_GT(s.at(t, i, j), cfg.mask_value / 2);
        }
      }
}

TEST(Score, PaddingMaskedAsRowAndColumn) {
  const auto cfg = head_cfg(1, 4);
  const auto params = random_head(cfg, 6, 7);
  std::mt19937_64 rng(8);
  const Tensor h = random_tensor(5, 6, rng);
  const std::vector<int> p{0, 1, 1, 1, 1};
  const std::vector<bool> keep{true, true, true, false, false};
  const ScoreTensor s = score(h, p, params, cfg, keep);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i; j < 5; ++j) {
      const bool masked = !keep[i] || !keep[j];
      EXPECT_EQ(s.at(0, i, j) <= cfg.mask_value / 2, masked) << i << "," << j;
    }
}

TEST(Score, ZeroParamsGiveZeroUpperTriangle) {
  const auto cfg = head_cfg(2, 4);
  ParamStore params;
  std::mt19937_64 rng(9);
  init_hga_head(params, cfg, 6, rng, 0.0);
  const Tensor h = random_tensor(4, 6, rng);
  const std::vector<int> p{0, 1, 2, 3};
  const ScoreTensor s = score(h, p, params, cfg, std::vector<bool>(4, true));
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(s.at(t, i, j), i > j ? cfg.mask_value : 0.0);
}

// L=3, H=2, d=2, p=[0,0,1], one type, every product written out by hand.
TEST(Score, ScalarOracle) {
  HeadConfig cfg = head_cfg(1, 2);
  cfg.rope_base = 10000.0;
  ParamStore params;
  params.add("head.wq", Tensor({2, 2}, std::vector<double>{0.5, -1.0, 2.0, 0.25}));
  params.add("head.bq", Tensor({2}, std::vector<double>{0.1, -0.2}));
  params.add("head.wk", Tensor({2, 2}, std::vector<double>{-0.3, 0.7, 1.5, -0.4}));
  params.add("head.bk", Tensor({2}, std::vector<double>{0.05, 0.3}));
  const double h[3][2] = {{1.0, 2.0}, {-0.5, 0.5}, {3.0, -1.0}};
  const int p[3] = {0, 0, 1};
  const Tensor ht({3, 2}, std::vector<double>{1.0, 2.0, -0.5, 0.5, 3.0, -1.0});
  const std::vector<int> pv(p, p + 3);
  const ScoreTensor s = score(ht, pv, params, cfg, std::vector<bool>(3, true));

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double q0 = h[i][0] * 0.5 + h[i][1] * 2.0 + 0.1;
      const double q1 = h[i][0] * -1.0 + h[i][1] * 0.25 - 0.2;
      const double k0 = h[j][0] * -0.3 + h[j][1] * 1.5 + 0.05;
      const double k1 = h[j][0] * 0.7 + h[j][1] * -0.4 + 0.3;
      // d = 2 has a single pair at frequency base^0 = 1.
      const double ai = p[i];
      const double aj = p[j];
      const double rq0 = q0 * std::cos(ai) - q1 * std::sin(ai);
      const double rq1 = q0 * std::sin(ai) + q1 * std::cos(ai);
      const double rk0 = k0 * std::cos(aj) - k1 * std::sin(aj);
      const double rk1 = k0 * std::sin(aj) + k1 * std::cos(aj);
      const double expected = rq0 * rk0 + rq1 * rk1 + (i > j ? -1e12 : 0.0);
      EXPECT_NEAR(s.at(0, i, j), expected, 1e-12) << i << "," << j;
    }
  }
}

TEST(Score, ShiftInvariance) {
  const auto cfg = head_cfg(2, 8);
  const auto params = random_head(cfg, 6, 10);
  std::mt19937_64 rng(11);
  const Tensor h = random_tensor(6, 6, rng);
  const std::vector<int> p{0, 0, 1, 2, 2, 3};
  std::vector<int> shifted = p;
  for (int& x : shifted) x += 37;
  const std::vector<bool> keep(6, true);
  const ScoreTensor a = score(h, p, params, cfg, keep);
  const ScoreTensor b = score(h, shifted, params, cfg, keep);
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i; j < 6; ++j) EXPECT_NEAR(a.at(t, i, j), b.at(t, i, j), 1e-9);
}

TEST(Score, SameNodePairsScoreUnrotated) {
  const auto cfg = head_cfg(1, 8);
  const auto params = random_head(cfg, 6, 12);
  std::mt19937_64 rng(13);
  const Tensor h = random_tensor(6, 6, rng);
  const std::vector<int> p{4, 4, 4, 4, 9, 9};
  const ScoreTensor s = score(h, p, params, cfg, std::vector<bool>(6, true));
  HeadConfig plain = cfg;
  plain.position_mode = PositionMode::kNone;
  const ScoreTensor u = score(h, p, params, plain, std::vector<bool>(6, true));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i; j < 6; ++j)
      if (p[i] == p[j]) EXPECT_NEAR(s.at(0, i, j), u.at(0, i, j), 1e-9);
}

TEST(Score, TypesAreIndependentStacks) {
  const std::size_t types = 3, d = 4, hidden = 5, len = 4;
  const auto cfg = head_cfg(types, d);
  const auto params = random_head(cfg, hidden, 14);
  std::mt19937_64 rng(15);
  const Tensor h = random_tensor(len, hidden, rng);
  const std::vector<int> p{0, 1, 1, 2};
  const std::vector<bool> keep(len, true);
  const ScoreTensor all = score(h, p, params, cfg, keep);
  for (std::size_t t = 0; t < types; ++t) {
    ParamStore single;
    for (const char* m : {"q", "k"}) {
      const Tensor& w = params.value(std::string("head.w") + m);
      const Tensor& b = params.value(std::string("head.b") + m);
      Tensor ws({hidden, d});
      Tensor bs({d});
      for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < hidden; ++r) ws(r, c) = w(r, t * d + c);
        bs[c] = b[t * d + c];
      }
      single.add(std::string("head.w") + m, ws);
      single.add(std::string("head.b") + m, bs);
    }
    const ScoreTensor one = score(h, p, single, head_cfg(1, d), keep);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t j = 0; j < len; ++j) EXPECT_EQ(all.at(t, i, j), one.at(0, i, j));
  }
}

TEST(Score, ShapeMismatchThrows) {
  const auto cfg = head_cfg(2, 4);
  const auto params = random_head(cfg, 6, 16);
  std::mt19937_64 rng(17);
  const Tensor h = random_tensor(3, 5, rng);
  const std::vector<int> p{0, 1, 2};
  EXPECT_THROW(score(h, p, params, cfg, std::vector<bool>(3, true)), InvalidArgument);
  const Tensor h2 = random_tensor(3, 6, rng);
  EXPECT_THROW(score(h2, p, params, cfg, std::vector<bool>(2, true)), InvalidArgument);
}

TEST(Score, MeanUpperTriangleGradientMatchesFiniteDifferences) {
  const auto cfg = head_cfg(2, 4);
  ParamStore params = random_head(cfg, 5, 18);
  std::mt19937_64 rng(19);
  const Tensor h = random_tensor(5, 5, rng);
  const std::vector<int> p{0, 0, 1, 2, 2};
  const std::vector<bool> keep(5, true);
  LossGraph graph = [&](Tape& tape, const ParamStore& ps) {
    const auto per_type = score(tape, tape.constant(h), p, ps, cfg, keep);
    std::vector<std::uint8_t> lower(25, 0);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < i; ++j) lower[i * 5 + j] = 1;
    Var total = tape.constant(Tensor::scalar(0.0));
    for (Var s : per_type) {
      const Var kept = tape.masked_fill(s, lower, 0.0);
      total = tape.add(total, tape.mean(kept));
    }
    return total;
  };
  const auto report = finite_diff_check(graph, params);
  EXPECT_TRUE(report.passed(1e-4)) << report.worst_param << " " << report.max_rel_error;
}

}  // namespace
}  // namespace hga
