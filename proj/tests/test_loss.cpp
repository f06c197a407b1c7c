#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hga/error.hpp"
#include "hga/loss.hpp"

namespace hga {
namespace {

ScoreTensor random_scores(std::size_t types, std::size_t len, std::mt19937_64& rng, double scale = 2.0) {
  std::normal_distribution<double> n(0.0, scale);
  ScoreTensor s;
  s.types = types;
  s.length = len;
  s.keep.assign(len, true);
  s.values.resize(types * len * len);
  for (double& v : s.values) v = n(rng);
  return s;
}

// Direct evaluation of the two per-type sums, no stabilization.
double naive_loss(const ScoreTensor& s, const HyperedgeLabels& labels, double b) {
  double total = 0.0;
  for (std::size_t t = 0; t < s.types; ++t) {
    double pos = 0.0, neg = 0.0;
    for (std::size_t i = 0; i < s.length; ++i)
      for (std::size_t j = 0; j < s.length; ++j) {
        const std::size_t c = i * s.length + j;
        if (labels.positive_cells[t][c]) pos += std::exp(-s.at(t, i, j));
        if (labels.negative_cells[t][c]) neg += std::exp(s.at(t, i, j));
      }
    total += (1 + b) * std::log1p(pos) + (1 - b) * std::log1p(neg);
  }
  return total;
}

TEST(BuildLabels, SinglePositive) {
  const EntitySet gold{Entity{0, 2, 4}};
  const auto labels = build_labels(gold, 6, 2, std::vector<bool>(6, true));
  ASSERT_EQ(labels.positives.size(), 2u);
  EXPECT_EQ(labels.positives[0], (std::vector<std::pair<int, int>>{{2, 4}}));
  EXPECT_TRUE(labels.positives[1].empty());
  EXPECT_TRUE(labels.positive_cells[0][2 * 6 + 4]);
  EXPECT_FALSE(labels.negative_cells[0][2 * 6 + 4]);
  EXPECT_TRUE(labels.negative_cells[1][2 * 6 + 4]);
}

TEST(BuildLabels, NoGoldMakesEveryValidCellNegative) {
  const auto labels = build_labels({}, 4, 2, std::vector<bool>(4, true));
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_TRUE(labels.positives[t].empty());
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(labels.negative_cells[t][i * 4 + j] != 0, i <= j);
  }
  EXPECT_EQ(labels.negative_count(), 2u * 10u);
}

TEST(BuildLabels, NegativeCountMatchesEnumeration) {
  // D=3, L=5: 15 upper-triangle cells per type, minus those touching padding,
  // minus one cell per gold entity.
  for (std::size_t pad = 0; pad <= 2; ++pad) {
    std::vector<bool> keep(5, true);
    for (std::size_t k = 0; k < pad; ++k) keep[4 - k] = false;
    const EntitySet gold{Entity{0, 0, 1}, Entity{2, 2, 2}};
    const auto labels = build_labels(gold, 5, 3, keep);
    std::size_t padding_cells = 0;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i; j < 5; ++j)
        if (!keep[i] || !keep[j]) ++padding_cells;
    EXPECT_EQ(labels.negative_count(), 3 * (15 - padding_cells) - 2) << "pad=" << pad;
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t c = 0; c < 25; ++c) EXPECT_FALSE(labels.positive_cells[t][c] && labels.negative_cells[t][c]);
  }
}

TEST(BuildLabels, EntityOnPaddingThrows) {
  std::vector<bool> keep{true, true, true, false};
  EXPECT_THROW(build_labels({Entity{0, 2, 3}}, 4, 1, keep), InvalidArgument);
  EXPECT_THROW(build_labels({Entity{1, 0, 0}}, 4, 1, keep), InvalidArgument);
  EXPECT_THROW(build_labels({Entity{0, 2, 1}}, 4, 1, keep), InvalidArgument);
}

TEST(BalancedLoss, EmptyPositivesContributeZero) {
  std::mt19937_64 rng(1);
  const auto s = random_scores(2, 4, rng);
  const auto labels = build_labels({}, 4, 2, s.keep);
  const auto parts = balanced_loss_parts(s, labels, {});
  EXPECT_EQ(parts.positive[0], 0.0);
  EXPECT_EQ(parts.positive[1], 0.0);
}

TEST(BalancedLoss, SingleZeroPositiveIsLogTwo) {
  ScoreTensor s;
  s.types = 1;
  s.length = 1;
  s.keep = {true};
  s.values = {0.0};
  const auto labels = build_labels({Entity{0, 0, 0}}, 1, 1, s.keep);
  EXPECT_EQ(labels.negative_count(), 0u);
  EXPECT_NEAR(balanced_loss(s, labels, {}), std::log(2.0), 1e-15);
}

TEST(BalancedLoss, MatchesNaiveFormAcrossB) {
  std::mt19937_64 rng(2);
  const auto s = random_scores(3, 6, rng);
  const auto labels = build_labels({Entity{0, 0, 1}, Entity{2, 3, 5}, Entity{1, 2, 2}}, 6, 3, s.keep);
  for (double b : {0.0, 0.2, 0.4, 0.8}) {
    const auto parts = balanced_loss_parts(s, labels, BalanceConfig{b});
    EXPECT_NEAR(parts.total, naive_loss(s, labels, b), 1e-10);
  }
  const auto parts = balanced_loss_parts(s, labels, {});
  double sum = 0.0;
  for (std::size_t t = 0; t < 3; ++t) sum += parts.positive[t] + parts.negative[t];
  EXPECT_EQ(parts.total, sum);
}

TEST(BalancedLoss, StableForLargeScores) {
  std::mt19937_64 rng(3);
  auto s = random_scores(1, 4, rng);
  for (double& v : s.values) v *= 400.0;
  const auto labels = build_labels({Entity{0, 1, 2}}, 4, 1, s.keep);
  EXPECT_TRUE(std::isfinite(balanced_loss(s, labels, {})));
}

TEST(BalancedLoss, DerivativeInBalanceFactor) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_scores(3, 5, rng);
    const auto labels = build_labels({Entity{trial % 3, 1, 3}, Entity{(trial + 1) % 3, 4, 4}}, 5, 3, s.keep);
    const double b = 0.3;
    // The loss is affine in b, so any step is exact up to rounding; a wide one
    // avoids cancellation.
    const double h = 0.1;
    const double fd = (balanced_loss(s, labels, BalanceConfig{b + h}) - balanced_loss(s, labels, BalanceConfig{b - h})) /
                      (2 * h);
    const auto parts = balanced_loss_parts(s, labels, BalanceConfig{b});
    double analytic = 0.0;
    for (std::size_t t = 0; t < 3; ++t) analytic += parts.positive[t] - parts.negative[t];
    EXPECT_NEAR(fd, analytic, 1e-9);
  }
}

TEST(BalancedLoss, MonotoneInB) {
  std::mt19937_64 rng(5);
  const auto s = random_scores(2, 5, rng);
  const auto labels = build_labels({Entity{0, 0, 2}, Entity{1, 3, 4}}, 5, 2, s.keep);
  const auto parts = balanced_loss_parts(s, labels, {});
  double diff = 0.0;
  for (std::size_t t = 0; t < 2; ++t) diff += parts.positive[t] - parts.negative[t];
  const double lo = balanced_loss(s, labels, BalanceConfig{0.1});
  const double hi = balanced_loss(s, labels, BalanceConfig{0.7});
  if (diff > 0) EXPECT_GT(hi, lo);
  if (diff < 0) EXPECT_LT(hi, lo);
}

TEST(BalancedLoss, NonNegativeWithZeroInfimum) {
  std::mt19937_64 rng(6);
  const auto s = random_scores(2, 5, rng);
  const auto labels = build_labels({Entity{0, 0, 2}}, 5, 2, s.keep);
  EXPECT_GE(balanced_loss(s, labels, BalanceConfig{0.5}), 0.0);
  ScoreTensor ideal = s;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t c = 0; c < 25; ++c) {
      if (labels.positive_cells[t][c]) ideal.values[t * 25 + c] = 50.0;
      if (labels.negative_cells[t][c]) ideal.values[t * 25 + c] = -50.0;
    }
  EXPECT_LT(balanced_loss(ideal, labels, BalanceConfig{0.5}), 1e-18);
}

TEST(BalancedLoss, RejectsBOutsideUnitInterval) {
  ScoreTensor s;
  s.types = 1;
  s.length = 1;
  s.keep = {true};
  s.values = {0.0};
  const auto labels = build_labels({}, 1, 1, s.keep);
  EXPECT_THROW(balanced_loss(s, labels, BalanceConfig{1.0}), InvalidArgument);
  EXPECT_THROW(balanced_loss(s, labels, BalanceConfig{-0.1}), InvalidArgument);
  EXPECT_NO_THROW(balanced_loss(s, labels, BalanceConfig{0.0}));
}

struct TapeLoss {
  ParamStore params;
  double value = 0.0;
  GradMap grads;
};

// Scores held as parameters so the tape reports d(loss)/d(score).
TapeLoss tape_loss(const ScoreTensor& s, const HyperedgeLabels& labels, double b) {
  TapeLoss out;
  const std::size_t n = s.length;
  for (std::size_t t = 0; t < s.types; ++t) {
    std::vector<double> v(s.values.begin() + static_cast<long>(t * n * n),
                          s.values.begin() + static_cast<long>((t + 1) * n * n));
    out.params.add("s" + std::to_string(t), Tensor({n, n}, v));
  }
  Tape tape;
  std::vector<Var> per_type;
  for (std::size_t t = 0; t < s.types; ++t) per_type.push_back(tape.param(out.params, "s" + std::to_string(t)));
  const Var loss = balanced_loss(tape, per_type, labels, BalanceConfig{b});
  out.value = tape.value(loss).item();
  out.grads = tape.backward(loss);
  return out;
}

TEST(BalancedLoss, TapeMatchesScalarForm) {
  std::mt19937_64 rng(7);
  const auto s = random_scores(2, 5, rng);
  const auto labels = build_labels({Entity{0, 1, 1}, Entity{1, 2, 4}}, 5, 2, s.keep);
  EXPECT_NEAR(tape_loss(s, labels, 0.4).value, balanced_loss(s, labels, BalanceConfig{0.4}), 1e-12);
}

TEST(BalancedLoss, GradientSignsAndMaskedCells) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = random_scores(2, 6, rng);
    s.keep = {true, true, true, true, true, false};
    const auto labels = build_labels({Entity{0, 0, 2}, Entity{1, 3, 3}, Entity{0, 4, 4}}, 6, 2, s.keep);
    const auto tl = tape_loss(s, labels, 0.3);
    for (std::size_t t = 0; t < 2; ++t) {
      const Tensor& g = tl.grads.at("s" + std::to_string(t));
      for (std::size_t c = 0; c < 36; ++c) {
        if (labels.positive_cells[t][c]) {
          EXPECT_LT(g[c], 0.0);
        } else if (labels.negative_cells[t][c]) {
          EXPECT_GT(g[c], 0.0);
        } else {
          EXPECT_EQ(g[c], 0.0);
        }
      }
    }
    // Changing an excluded cell leaves the loss bit-identical.
    ScoreTensor moved = s;
    moved.at(0, 3, 1) = 1e6;
    moved.at(1, 2, 5) = 1e6;
    EXPECT_EQ(balanced_loss(moved, labels, BalanceConfig{0.3}), balanced_loss(s, labels, BalanceConfig{0.3}));
  }
}

}  // namespace
}  // namespace hga
