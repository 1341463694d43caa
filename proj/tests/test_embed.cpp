#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "shortfall/error.hpp"
#include "shortfall/embed.hpp"

using namespace shortfall;

namespace {

MarketParams tilted() { return MarketParams{0.03, 0.25, 0.09, 1.0, 95.0, 1.0}; }

McOptions opts(std::uint64_t paths, std::uint64_t seed = 7, unsigned threads = 4) {
  McOptions o;
  o.paths = paths;
  o.seed = seed;
  o.threads = threads;
  return o;
}

// Mean first exit time of a drifted Brownian motion from (-a, a).
double mean_exit(double drift, double a) {
  if (std::abs(drift) < 1e-14) return a * a;
  return a * std::tanh(drift * a) / drift;
}

}  // namespace

TEST(Simulate, PathShape) {
  const EmbeddedPath p = simulate_embedding(tilted(), 10, 1, 0, {.keep_fine = true});
  ASSERT_EQ(p.theta.size(), 11u);
  ASSERT_EQ(p.signs.size(), 10u);
  EXPECT_EQ(p.theta[0], 0.0);
  for (std::size_t k = 1; k < p.theta.size(); ++k) EXPECT_GT(p.theta[k], p.theta[k - 1]);
  for (int s : p.signs) EXPECT_TRUE(s == 1 || s == -1);
  EXPECT_GE(p.fine_t.back(), 1.0 - 1e-12);
  // The fine path sits exactly on the barrier at each exit.
  const double a = std::sqrt(0.1);
  const double h = p.fine_t[1];
  int level = 0;
  for (std::size_t k = 1; k < p.theta.size(); ++k) {
    level += p.signs[k - 1];
    const auto j = static_cast<std::size_t>(std::llround(p.theta[k] / h));
    EXPECT_NEAR(p.fine_b[j], level * a, 1e-12);
  }
  EXPECT_GT(p.z_terminal, 0.0);
}

TEST(Simulate, SameKeySamePath) {
  const EmbeddedPath a = simulate_embedding(tilted(), 8, 3, 17);
  const EmbeddedPath b = simulate_embedding(tilted(), 8, 3, 17);
  const EmbeddedPath c = simulate_embedding(tilted(), 8, 3, 18);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.signs, b.signs);
  EXPECT_NE(a.theta, c.theta);
}

TEST(Simulate, Guards) {
  EmbedOptions fine;
  fine.dt_fine = 2.0 * (1.0 / 8) / 64.0;
  EXPECT_THROW(simulate_embedding(tilted(), 8, 1, 0, fine), ParameterError);
  fine.dt_fine = -1.0;
  EXPECT_THROW(simulate_embedding(tilted(), 8, 1, 0, fine), ParameterError);
  EmbedOptions tight;
  tight.horizon_factor = 0.05;
  EXPECT_THROW(simulate_embedding(tilted(), 8, 1, 0, tight), BudgetError);
  EXPECT_THROW(simulate_embedding(tilted(), 0, 1, 0), ParameterError);
  // An explicit step below the limit is accepted.
  fine.dt_fine = 1e-4;
  EXPECT_NO_THROW(simulate_embedding(tilted(), 8, 1, 0, fine));
}

TEST(ExitLaw, UpFractionMatchesClosedForm) {
  const MarketParams sets[] = {
      {0.0, 0.2, 0.02, 1.0, 100.0, 1.0},   // symmetric: mu = kappa^2 / 2
      {0.03, 0.25, 0.09, 1.0, 95.0, 1.0},
      {0.0, 0.3, 0.3, 2.0, 100.0, 1.0},
      {0.01, 0.4, -0.1, 1.0, 50.0, 1.0}};
  for (const MarketParams& mp : sets) {
    const int n = 16;
    const McDiagnostics d = embedding_statistics(mp, n, opts(6250));
    const double p = build_crr(mp, n).p_obj;
    const double se = std::sqrt(p * (1 - p) / 1e5);
    EXPECT_NEAR(d.up_fraction, p, 3 * se) << mp.kappa << " " << mp.mu;
  }
  EXPECT_EQ(build_crr(sets[0], 16).p_obj, 0.5);
}

TEST(ExitLaw, MartingaleMeasureUsesMartingaleProbability) {
  McOptions o = opts(6250);
  o.embed.measure = Measure::Martingale;
  const MarketParams mp{0.0, 0.3, 0.3, 1.0, 100.0, 1.0};
  const McDiagnostics d = embedding_statistics(mp, 16, o);
  const double p = build_crr(mp, 16).p_mart;
  EXPECT_NEAR(d.up_fraction, p, 3 * std::sqrt(p * (1 - p) / 1e5));
}

TEST(ExitLaw, PathHistogramMatchesCrrLaw) {
  const MarketParams mp = tilted();
  const int n = 4;
  const std::uint64_t paths = 100000;
  const double p = build_crr(mp, n).p_obj;
  std::vector<double> counts(16, 0.0);
  for (std::uint64_t i = 0; i < paths; ++i) {
    const EmbeddedPath e = simulate_embedding(mp, n, 11, i);
    unsigned bits = 0;
    for (int k = 0; k < n; ++k) bits |= (e.signs[k] > 0 ? 1u : 0u) << k;
    counts[bits] += 1.0;
  }
  double chi2 = 0.0;
  for (unsigned bits = 0; bits < 16; ++bits) {
    const int ups = std::popcount(bits);
    const double expected = paths * std::pow(p, ups) * std::pow(1 - p, n - ups);
    chi2 += (counts[bits] - expected) * (counts[bits] - expected) / expected;
  }
  // Upper 0.001 quantile of chi-squared with 15 degrees of freedom.
  EXPECT_LT(chi2, 37.697);
}

TEST(ExitLaw, SignsUncorrelated) {
  const MarketParams mp = tilted();
  const int n = 16;
  double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0, pairs = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const EmbeddedPath e = simulate_embedding(mp, n, 5, i);
    for (int k = 0; k + 1 < n; ++k) {
      const double x = e.signs[k];
      const double y = e.signs[k + 1];
      sx += x;
      sy += y;
      sxy += x * y;
      sxx += x * x;
      syy += y * y;
      pairs += 1.0;
    }
  }
  const double cov = sxy / pairs - (sx / pairs) * (sy / pairs);
  const double corr = cov / std::sqrt((sxx / pairs - std::pow(sx / pairs, 2)) *
                                      (syy / pairs - std::pow(sy / pairs, 2)));
  EXPECT_NEAR(corr, 0.0, 3.0 / std::sqrt(pairs));
}

TEST(ExitTimes, MeanThetaIsAdditive) {
  const MarketParams mp = tilted();
  const int n = 16;
  const McDiagnostics d = embedding_statistics(mp, n, opts(20000));
  const double a = std::sqrt(mp.T / n);
  const double drift = mp.mu / mp.kappa - 0.5 * mp.kappa;
  // Exits are stamped at the end of the fine step in which they occur, half a
  // step late on average.
  const double h = mp.T / std::ceil(mp.T / (mp.T / n / 64.0));
  const double expect = n * (mean_exit(drift, a) + 0.5 * h);
  // sd(theta_1) ~ sqrt(2/3) a^2; four standard errors.
  const double se = std::sqrt(n * 2.0 / 3.0) * a * a / std::sqrt(20000.0);
  EXPECT_NEAR(d.mean_theta_n, expect, 4 * se);
}

TEST(ExitTimes, MaxDeviationShrinks) {
  const MarketParams mp = tilted();
  double prev = kInf;
  for (int n : {16, 64, 256}) {
    const McDiagnostics d = embedding_statistics(mp, n, opts(1000));
    EXPECT_LT(d.mean_u_n, prev) << n;
    EXPECT_GT(d.mean_w_n, 0.0);
    prev = d.mean_u_n;
  }
}

TEST(Density, MeanOneUnderMartingaleMeasure) {
  for (const MarketParams& mp :
       {tilted(), MarketParams{0.0, 0.3, 0.3, 1.0, 100.0, 1.0}}) {
    McOptions o = opts(100000, 3);
    o.embed.measure = Measure::Martingale;
    const McDiagnostics d = embedding_statistics(mp, 8, o);
    EXPECT_NEAR(d.z_mean, 1.0, 3 * d.z_stderr);
    EXPECT_GT(d.z_stderr, 0.0);
  }
}

TEST(McDiscrete, TrivialPayoffs) {
  const MarketParams mp = tilted();
  const CrrModel m = build_crr(mp, 6);
  const DiscretePayoffs zero = discretize(constant_payoff(0.0, 0.0), m);
  const RiskTables tz = solve_tables(m, zero, OptionStyle::Game);
  const McEstimate e0 = mc_discrete_shortfall(m, zero, tz.policy, 0.0, opts(2000));
  EXPECT_EQ(e0.estimate, 0.0);
  EXPECT_EQ(e0.std_error, 0.0);
  EXPECT_EQ(e0.label, "discrete");
  MarketParams z = mp;
  z.r = 0.0;
  const CrrModel mz = build_crr(z, 6);
  const DiscretePayoffs c = discretize(constant_payoff(3.0, 1.0), mz);
  const RiskTables tc = solve_tables(mz, c, OptionStyle::Game);
  EXPECT_EQ(mc_discrete_shortfall(mz, c, tc.policy, 3.0, opts(2000)).estimate, 0.0);
  const McEstimate d0 = mc_continuous_diagnostic(m, constant_payoff(0.0, 0.0), zero,
                                                 tz.policy, 0.0, opts(500));
  EXPECT_EQ(d0.estimate, 0.0);
  EXPECT_EQ(d0.label, "restricted-adversary");
}

TEST(McDiscrete, UnbiasedForRootValue) {
  const MarketParams mp = tilted();
  const CrrModel m = build_crr(mp, 8);
  for (const PayoffSpec& spec : {game_put(100.0, 5.0), lookback_put(100.0, 10.0)}) {
    const DiscretePayoffs d = discretize(spec, m);
    const RiskTables t = solve_tables(m, d, OptionStyle::Game);
    const double x = 0.5 * game_price(m, d);
    const McEstimate e = mc_discrete_shortfall(m, d, t.policy, x, opts(20000));
    const double j = shortfall_risk(t.values, x);
    EXPECT_NEAR(e.estimate, j, 3 * e.std_error) << spec.name;
    EXPECT_EQ(e.paths, 20000u);
  }
}

TEST(McDiscrete, MismatchedStepsRejected) {
  const CrrModel m8 = build_crr(tilted(), 8);
  const CrrModel m6 = build_crr(tilted(), 6);
  const DiscretePayoffs d = discretize(game_put(100.0, 5.0), m8);
  const RiskTables t = solve_tables(m8, d, OptionStyle::Game);
  EXPECT_THROW(mc_discrete_shortfall(m6, d, t.policy, 1.0, opts(10)), ParameterError);
}

TEST(McContinuous, RunsAndReportsRule) {
  const CrrModel m = build_crr(tilted(), 8);
  const PayoffSpec spec = american_put(100.0);
  const DiscretePayoffs d = discretize(spec, m);
  const RiskTables t = solve_tables(m, d, OptionStyle::American);
  const double x = 0.5 * american_price(m, d);
  const McEstimate e = mc_continuous_diagnostic(m, spec, d, t.policy, x, opts(4000));
  EXPECT_GE(e.buyer_rule, 0);
  EXPECT_LE(e.buyer_rule, 9);
  EXPECT_GT(e.estimate, 0.0);
  // The restricted adversary includes the mapped best response, so it is
  // close to the discrete value.
  EXPECT_NEAR(e.estimate, shortfall_risk(t.values, x), 0.5);
}

TEST(Determinism, ThreadCountInvariant) {
  const CrrModel m = build_crr(tilted(), 8);
  const PayoffSpec spec = game_put(100.0, 5.0);
  const DiscretePayoffs d = discretize(spec, m);
  const RiskTables t = solve_tables(m, d, OptionStyle::Game);
  const McEstimate a = mc_discrete_shortfall(m, d, t.policy, 2.0, opts(5000, 9, 1));
  const McEstimate b = mc_discrete_shortfall(m, d, t.policy, 2.0, opts(5000, 9, 7));
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.diagnostics.mean_u_n, b.diagnostics.mean_u_n);
  const McEstimate c = mc_continuous_diagnostic(m, spec, d, t.policy, 2.0, opts(1500, 9, 1));
  const McEstimate e = mc_continuous_diagnostic(m, spec, d, t.policy, 2.0, opts(1500, 9, 3));
  EXPECT_EQ(c.estimate, e.estimate);
  EXPECT_EQ(c.buyer_rule, e.buyer_rule);
  const McEstimate f = mc_discrete_shortfall(m, d, t.policy, 2.0, opts(5000, 10, 1));
  EXPECT_NE(a.estimate, f.estimate);
}
