#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "shortfall/error.hpp"
#include "shortfall/hedge.hpp"

using namespace shortfall;

namespace {

MarketParams flat() { return MarketParams{0.0, 0.2, 0.02, 1.0, 100.0, 1.0}; }
MarketParams tilted() { return MarketParams{0.03, 0.25, 0.09, 1.0, 95.0, 1.0}; }

struct Solved {
  CrrModel model;
  DiscretePayoffs d;
  RiskTables t;
  double price = 0.0;
};

Solved make(const MarketParams& mp, int n, const PayoffSpec& spec,
           OptionStyle style = OptionStyle::Game) {
  Solved s{build_crr(mp, n), {}, {}, 0.0};
  s.d = discretize(spec, s.model);
  s.t = solve_tables(s.model, s.d, style);
  s.price = option_price(s.model, s.d, style);
  return s;
}

std::vector<int> word(int n, std::uint32_t bits) {
  std::vector<int> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = (bits >> i) & 1u ? 1 : -1;
  return w;
}

double path_prob(double p, int n, std::uint32_t bits) {
  const int ups = std::popcount(bits);
  return std::pow(p, ups) * std::pow(1.0 - p, n - ups);
}

}  // namespace

TEST(Replay, ZeroExposureKeepsWealth) {
  // Hand-built policy: u = 0 on every node.
  const CrrModel m = build_crr(tilted(), 5);
  const DiscretePayoffs d = discretize(game_put(100.0, 5.0), m);
  PolicyTable pol(d.lattice, OptionStyle::Game, m.a1, m.a2);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t i = 0; i < d.lattice.level_size(k); ++i) {
      pol.node(k, i).pieces = {AffinePolicyPiece{0.0, kInf, 0.0, 0.0,
                                                 CandidateKind::InteriorFlat}};
    }
  }
  for (std::uint32_t bits = 0; bits < 32; ++bits) {
    const HedgeTrajectory tr = replay(m, d, pol, 7.0, word(5, bits));
    for (const HedgeStep& s : tr.steps) EXPECT_EQ(s.wealth, 7.0);
  }
}

TEST(Replay, ConstantPayoffFullyHedged) {
  for (OptionStyle style : {OptionStyle::Game, OptionStyle::American}) {
    const Solved s = make(flat(), 4, constant_payoff(2.0, 1.0), style);
    for (std::uint32_t bits = 0; bits < 16; ++bits) {
      EXPECT_EQ(replay(s.model, s.d, s.t.policy, 2.0, word(4, bits)).shortfall, 0.0);
    }
  }
}

TEST(Replay, PathAverageEqualsRootValue) {
  for (const MarketParams& mp : {flat(), tilted()}) {
    for (OptionStyle style : {OptionStyle::Game, OptionStyle::American}) {
      for (const PayoffSpec& spec :
           {game_put(100.0, 2.0), game_put(100.0, 5.0), lookback_put(100.0, 10.0)}) {
        const Solved s = make(mp, 3, spec, style);
        for (double frac : {0.0, 0.25, 0.5, 0.9}) {
          const double x = frac * s.price;
          double avg = 0.0;
          for (std::uint32_t bits = 0; bits < 8; ++bits) {
            avg += path_prob(s.model.p_obj, 3, bits) *
                   replay(s.model, s.d, s.t.policy, x, word(3, bits)).shortfall;
          }
          EXPECT_NEAR(avg, shortfall_risk(s.t.values, x), 1e-9)
              << spec.name << " x=" << x;
        }
      }
    }
  }
}

TEST(Replay, SelfFinancingAndUnits) {
  const Solved s = make(tilted(), 12, lookback_put(100.0, 10.0));
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = word(12, static_cast<std::uint32_t>(rng()) & 0xfffu);
    const HedgeTrajectory tr = replay(s.model, s.d, s.t.policy, 0.6 * s.price, w);
    for (int k = 0; k < 12; ++k) {
      const HedgeStep& a = tr.steps[k];
      const HedgeStep& b = tr.steps[k + 1];
      const double ret = std::exp(s.model.params.kappa * s.model.step * w[k]) - 1.0;
      EXPECT_NEAR(b.wealth - a.wealth, a.exposure * ret, 1e-12 * (1.0 + a.wealth));
      EXPECT_NEAR(a.gamma * a.stock, a.exposure, 1e-12 * (1.0 + std::abs(a.exposure)));
      EXPECT_NEAR(a.beta * s.model.params.b0 + a.gamma * a.stock, a.wealth, 1e-12 * (1.0 + a.wealth));
      EXPECT_NEAR(b.stock, a.stock * (1.0 + ret), 1e-10);
      EXPECT_GE(b.wealth, 0.0);
    }
  }
}

TEST(Replay, AdmissibleOnEveryPath) {
  const Solved s = make(tilted(), 10, game_put(100.0, 5.0));
  for (std::uint32_t bits = 0; bits < 1024; ++bits) {
    const HedgeTrajectory tr = replay(s.model, s.d, s.t.policy, 0.3 * s.price, word(10, bits));
    for (const HedgeStep& st : tr.steps) EXPECT_GE(st.wealth, 0.0);
    EXPECT_LE(tr.sigma, 10);
    EXPECT_LE(tr.tau, 10);
  }
}

TEST(Replay, CallerBuyerStep) {
  const Solved s = make(tilted(), 6, game_put(100.0, 5.0));
  const auto w = word(6, 0);
  const HedgeTrajectory tr = replay(s.model, s.d, s.t.policy, 2.0, w, 6);
  ASSERT_TRUE(tr.caller_shortfall.has_value());
  EXPECT_EQ(*tr.caller_tau, 6);
  EXPECT_GE(*tr.caller_shortfall, 0.0);
  EXPECT_THROW(replay(s.model, s.d, s.t.policy, 2.0, w, 7), ParameterError);
  EXPECT_THROW(replay(s.model, s.d, s.t.policy, 2.0, word(5, 0)), ParameterError);
  EXPECT_THROW(replay(s.model, s.d, s.t.policy, -1.0, w), std::invalid_argument);
}

TEST(ShortfallExpectation, ZeroPayoff) {
  const Solved s = make(flat(), 6, constant_payoff(0.0, 0.0));
  EXPECT_EQ(shortfall_expectation(s.model, s.d, s.t.policy, 0.0), 0.0);
}

TEST(ShortfallExpectation, EqualsRootValue) {
  for (int n : {2, 5, 10}) {
    for (OptionStyle style : {OptionStyle::Game, OptionStyle::American}) {
      for (const PayoffSpec& spec :
           {game_put(100.0, 2.0), game_put(100.0, 5.0), lookback_put(100.0, 10.0)}) {
        for (const MarketParams& mp : {flat(), tilted()}) {
          const Solved s = make(mp, n, spec, style);
          for (double frac : {0.0, 0.5, 1.0}) {
            const double x = frac * s.price;
            EXPECT_NEAR(shortfall_expectation(s.model, s.d, s.t.policy, x),
                        shortfall_risk(s.t.values, x), 1e-9)
                << spec.name << " n=" << n;
          }
        }
      }
    }
  }
}

TEST(ShortfallExpectation, PerturbedPolicyIsWorse) {
  for (const MarketParams& mp : {flat(), tilted()}) {
    const Solved s = make(mp, 2, game_put(100.0, 5.0));
    const double x = 0.5 * s.price;
    const double j = shortfall_risk(s.t.values, x);
    // Exposure scaled by 1.1 and clipped.
    const ExposureRule opt = policy_rule(s.t.policy);
    const double a1 = s.model.a1;
    const double a2 = s.model.a2;
    const ExposureRule bumped = [&](int k, std::uint32_t bits, double y) {
      return std::clamp(1.1 * opt(k, bits, y), -y / a1, -y / a2);
    };
    EXPECT_GE(evaluate_hedge(s.model, s.d, bumped, x), j - 1e-9);
    // Shrunk pieces stay feasible; the seller rule is the optimal one.
    PolicyTable shrunk = s.t.policy;
    for (int k = 0; k < 2; ++k) {
      for (std::size_t i = 0; i < s.d.lattice.level_size(k); ++i) {
        for (auto& piece : shrunk.node(k, i).pieces) {
          piece.alpha *= 0.9;
          piece.beta *= 0.9;
        }
      }
    }
    EXPECT_GE(shortfall_expectation(s.model, s.d, shrunk, x), j - 1e-9);
  }
}

TEST(ShortfallExpectation, DepthBudget) {
  const Solved s = make(flat(), 25, game_put(100.0, 2.0));
  EXPECT_THROW(shortfall_expectation(s.model, s.d, s.t.policy, 1.0), BudgetError);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const Solved s = make(tilted(), 3, game_put(100.0, 5.0));
  std::ostringstream os;
  write_trajectory_csv(os, replay(s.model, s.d, s.t.policy, 1.0, word(3, 5)));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,sign,stock,wealth,exposure,gamma,beta,seller_stop,buyer_stop");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}
