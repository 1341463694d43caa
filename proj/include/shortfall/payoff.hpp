#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "shortfall/market.hpp"

namespace shortfall {

/// A price path restricted to [0, t], stored as right-continuous steps: the
/// path equals values[i] on [times[i], times[i+1]). The last sample is v_t.
struct PathView {
  std::span<const double> times;
  std::span<const double> values;

  double last() const { return values.back(); }
  double running_min() const;
  double running_max() const;
};

/// Payoff pair of a game option: the buyer receives F_t when exercising, the
/// seller pays F_t + Delta_t when cancelling. Both functionals must be pure
/// and return finite values >= 0.
struct PayoffSpec {
  using Functional = std::function<double(double t, const PathView& path)>;

  std::string name;
  Functional low;
  Functional penalty;
  /// Lipschitz constant L bounding |F_s(v) - F_s(w)| + |D_s(v) - D_s(w)| by
  /// L (s + 1) sup|v - w| and the matching modulus in time.
  double lipschitz = 1.0;
  /// True when F and Delta depend on the path only through (t, v_t).
  bool path_independent = false;

  double high(double t, const PathView& path) const {
    return low(t, path) + penalty(t, path);
  }
};

/// Multiplier on the strike used for the penalty that turns a game option
/// into an American one (cancellation is never worth it).
inline constexpr double kAmericanPenaltyScale = 1e6;

PayoffSpec constant_payoff(double c, double delta);
PayoffSpec game_put(double strike, double delta);
PayoffSpec american_put(double strike);
PayoffSpec lookback_put(double strike, double delta);
PayoffSpec floating_lookback(double delta);

/// Fixture lookup by name. Recognised parameters: K (strike), delta
/// (penalty), c (constant level). Throws PayoffError on unknown names.
PayoffSpec builtin(const std::string& name,
                   const std::map<std::string, double>& params);

/// Discounted low/high payoffs f_k, g_k on every node of the tree.
struct DiscretePayoffs {
  Lattice lattice;
  std::string name;
  std::vector<std::vector<double>> f;
  std::vector<std::vector<double>> g;

  int steps() const { return lattice.steps(); }
  double low(int k, std::size_t idx) const { return f[k][idx]; }
  double high(int k, std::size_t idx) const { return g[k][idx]; }
  /// Largest f over all nodes.
  double max_low() const;
};

enum class Layout { Auto, Full, Recombined };

/// Evaluates the payoffs on the CRR step paths. Auto uses the recombined
/// lattice iff the spec is path independent. Throws PayoffError on negative or
/// non-finite payoff values, ParameterError when Recombined is forced on a
/// path-dependent spec.
DiscretePayoffs discretize(const PayoffSpec& spec, const CrrModel& model,
                           Layout layout = Layout::Auto);

/// Builds the step path of a sign word: S0 exp(j r T/n + kappa sqrt(T/n)
/// sum_{i<=j} xi_i) on [jT/n, (j+1)T/n), for j = 0..k.
void step_path(const CrrModel& model, std::span<const int> signs,
               std::vector<double>& times, std::vector<double>& values);

}  // namespace shortfall
