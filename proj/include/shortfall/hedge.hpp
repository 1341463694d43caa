#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "shortfall/market.hpp"
#include "shortfall/payoff.hpp"
#include "shortfall/risk.hpp"

namespace shortfall {

/// State of the hedge at time kT/n, before trading for step k + 1.
struct HedgeStep {
  int k = 0;
  int sign = 0;             // xi_k, 0 at k = 0
  double stock = 0.0;       // discounted stock price
  double wealth = 0.0;      // discounted portfolio value
  double exposure = 0.0;    // u_k = gamma_{k+1} * discounted stock; 0 at k = n
  double gamma = 0.0;       // stock units held over (k, k + 1]
  double beta = 0.0;        // bond units held over (k, k + 1]
  bool seller_stop = false;
  bool buyer_stop = false;
};

struct HedgeTrajectory {
  std::vector<HedgeStep> steps;  // k = 0..n
  int sigma = 0;                 // first seller stop (n if none before)
  int tau = 0;                   // first buyer best-response stop
  /// (Q(sigma, tau) - V_{sigma ^ tau})^+ with Q = g_sigma if sigma < tau,
  /// f_tau otherwise. Discounted.
  double shortfall = 0.0;
  std::optional<int> caller_tau;
  std::optional<double> caller_shortfall;
};

/// Runs the policy along a realised sign path (+1 / -1, length n).
/// `buyer_step`, when given, is an extra exercise time in 0..n whose
/// shortfall against the policy's seller rule is reported as well.
HedgeTrajectory replay(const CrrModel& model, const DiscretePayoffs& payoffs,
                       const PolicyTable& policy, double x,
                       std::span<const int> signs,
                       std::optional<int> buyer_step = std::nullopt);

/// Expected shortfall of the policy and its seller rule against the best
/// buyer, by backward recursion over all 2^n paths. Throws BudgetError for
/// n > 24.
double shortfall_expectation(const CrrModel& model,
                             const DiscretePayoffs& payoffs,
                             const PolicyTable& policy, double x);

/// One CSV row per step with a header line.
void write_trajectory_csv(std::ostream& os, const HedgeTrajectory& traj);

}  // namespace shortfall
