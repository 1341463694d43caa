#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

#include "shortfall/error.hpp"
#include "shortfall/market.hpp"

using namespace shortfall;

namespace {

MarketParams base() { return MarketParams{0.0, 0.2, 0.02, 1.0, 100.0, 1.0}; }

}  // namespace

TEST(BuildCrr, ZeroTiltGivesFairCoin) {
  const CrrModel m = build_crr(base(), 4);
  EXPECT_DOUBLE_EQ(m.p_obj, 0.5);
  EXPECT_DOUBLE_EQ(m.dt, 0.25);
}

TEST(BuildCrr, ZeroRateGivesZeroStepRate) {
  for (int n : {1, 3, 17}) {
    MarketParams p = base();
    p.kappa = 0.45;
    EXPECT_EQ(build_crr(p, n).rn, 0.0);
  }
}

TEST(BuildCrr, MatchesExtendedPrecisionConstants) {
  // 40-digit evaluation of the closed forms for r=0.05, kappa=0.3, mu=0.1, n=16.
  const CrrModel m = build_crr({0.05, 0.3, 0.1, 1.0, 100.0, 1.0}, 16);
  EXPECT_NEAR(m.rn, 0.003129887902739148639, 1e-16);
  EXPECT_NEAR(m.a1, 0.07788415088463153570, 1e-16);
  EXPECT_NEAR(m.a2, -0.07225651367144710778, 1e-16);
  EXPECT_NEAR(m.p_obj, 0.5229006331676741949, 1e-15);
  EXPECT_NEAR(m.p_mart, 0.4812587841214647615, 1e-15);
}

TEST(BuildCrr, MartingaleIdentity) {
  const MarketParams sets[] = {base(),
                               {0.05, 0.3, 0.1, 1.0, 100.0, 1.0},
                               {0.1, 1.2, -0.4, 3.0, 50.0, 2.0},
                               {-0.02, 0.05, 0.3, 0.5, 10.0, 1.0}};
  for (const MarketParams& p : sets) {
    for (int n : {1, 2, 7, 64, 1000}) {
      const CrrModel m = build_crr(p, n);
      EXPECT_NEAR(m.p_mart * m.a1 + (1.0 - m.p_mart) * m.a2, 0.0, 1e-12);
      EXPECT_GT(m.a1, 0.0);
      EXPECT_LT(m.a2, 0.0);
      EXPECT_GT(m.p_obj, 0.0);
      EXPECT_LT(m.p_obj, 1.0);
    }
  }
}

TEST(BuildCrr, ScalingTrend) {
  MarketParams p{0.0, 0.3, 0.2, 1.0, 100.0, 1.0};
  double prev_gap = 1.0;
  for (int n : {4, 16, 64, 256}) {
    const CrrModel m = build_crr(p, n);
    const double gap = std::abs(m.p_obj - 0.5);
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
    // n (a1 + a2) / 2 tends to kappa^2 T / 2 from the second-order term.
    EXPECT_NEAR(n * (m.a1 + m.a2) / 2.0, 0.5 * 0.09, 0.01);
  }
}

TEST(BuildCrr, RejectsBadParameters) {
  MarketParams p = base();
  p.kappa = 0.0;
  EXPECT_THROW(build_crr(p, 4), ParameterError);
  p = base();
  p.T = -1.0;
  EXPECT_THROW(build_crr(p, 4), ParameterError);
  p = base();
  p.S0 = std::nan("");
  EXPECT_THROW(build_crr(p, 4), ParameterError);
  p = base();
  p.b0 = 0.0;
  EXPECT_THROW(build_crr(p, 4), ParameterError);
  p = base();
  p.r = INFINITY;
  EXPECT_THROW(build_crr(p, 4), ParameterError);
  EXPECT_THROW(build_crr(base(), 0), ParameterError);
}

TEST(StockPrice, RootIsSpot) {
  const CrrModel m = build_crr({0.05, 0.3, 0.1, 1.0, 87.0, 1.0}, 5);
  EXPECT_EQ(stock_price(m, PathNode{0, {}}), 87.0);
}

TEST(StockPrice, BalancedWordAtZeroRate) {
  const CrrModel m = build_crr(base(), 6);
  EXPECT_NEAR(stock_price(m, PathNode{4, {1, -1, -1, 1}}), 100.0, 1e-12);
}

TEST(StockPrice, ThreeStepWord) {
  const CrrModel m = build_crr({0.05, 0.3, 0.1, 1.0, 100.0, 1.0}, 4);
  const PathNode node{3, {1, 1, -1}};
  const double expected = 100.0 * std::exp(3 * 0.0125 + 0.15);
  EXPECT_NEAR(stock_price(m, node), expected, 1e-12);
  EXPECT_NEAR(expected, 120.623024942098071, 1e-11);
  // Product of one-step gross returns (1 + r_n)(1 + a).
  double product = 100.0;
  for (int s : node.word) product *= (1.0 + m.rn) * (1.0 + m.step_return(s));
  EXPECT_NEAR(stock_price(m, node), product, 1e-11);
}

TEST(StockPrice, PermutationInvariant) {
  const CrrModel m = build_crr({0.03, 0.25, 0.05, 2.0, 40.0, 1.0}, 8);
  std::vector<int> word{1, 1, -1, 1, -1, -1, -1};
  std::sort(word.begin(), word.end());
  const double ref = stock_price(m, PathNode{7, word});
  do {
    EXPECT_NEAR(stock_price(m, PathNode{7, word}), ref, 1e-12 * ref);
  } while (std::next_permutation(word.begin(), word.end()));
}

TEST(StockPrice, RejectsMalformedWord) {
  const CrrModel m = build_crr(base(), 4);
  EXPECT_THROW(stock_price(m, PathNode{2, {1}}), ParameterError);
  EXPECT_THROW(stock_price(m, PathNode{1, {0}}), ParameterError);
  EXPECT_THROW(stock_price(m, PathNode{5, {1, 1, 1, 1, 1}}), ParameterError);
}

TEST(DiscountFactor, Values) {
  const CrrModel m = build_crr({0.05, 0.3, 0.1, 1.0, 100.0, 1.0}, 10);
  EXPECT_EQ(discount_factor(m, 0), 1.0);
  EXPECT_NEAR(discount_factor(m, 10), std::exp(-0.05), 1e-15);
  EXPECT_NEAR(discount_factor(m, 7), std::pow(1.0 + m.rn, -7), 1e-14);
  const CrrModel z = build_crr(base(), 10);
  for (int k = 0; k <= 10; ++k) EXPECT_EQ(discount_factor(z, k), 1.0);
}

TEST(Lattice, FullAndRecombinedIndexing) {
  const Lattice full(5, false);
  const Lattice rec(5, true);
  EXPECT_EQ(full.level_size(3), 8u);
  EXPECT_EQ(rec.level_size(3), 4u);
  for (std::uint32_t bits = 0; bits < 8; ++bits) {
    EXPECT_EQ(full.index(3, bits), bits);
    EXPECT_EQ(rec.index(3, bits), static_cast<std::size_t>(std::popcount(bits)));
    EXPECT_EQ(full.up_child(3, bits), full.index(4, bits | 8u));
    EXPECT_EQ(full.down_child(3, bits), full.index(4, bits));
  }
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rec.up_child(3, i), i + 1);
    EXPECT_EQ(rec.down_child(3, i), i);
    const auto w = rec.signs(3, i);
    EXPECT_EQ(std::count(w.begin(), w.end(), 1), static_cast<long>(i));
  }
  EXPECT_THROW(Lattice(Lattice::kMaxFullDepth + 1, false), BudgetError);
  EXPECT_NO_THROW(Lattice(128, true));
}

TEST(PathNode, BitRoundTrip) {
  const PathNode node{5, {1, -1, -1, 1, 1}};
  const std::uint32_t bits = word_bits(node);
  EXPECT_EQ(bits, 0b11001u);
  EXPECT_EQ(node_from_bits(5, bits).word, node.word);
}
