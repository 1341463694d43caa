#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "shortfall/market.hpp"
#include "shortfall/payoff.hpp"
#include "shortfall/pwl.hpp"

namespace shortfall {

enum class OptionStyle { Game, American };

const char* to_string(OptionStyle style);

/// Optimal hedging and stopping data for one node with k < n.
struct NodePolicy {
  std::vector<AffinePolicyPiece> pieces;
  /// Wealth levels where cancelling is optimal: (g_k - y)^+ = J_k(y).
  std::vector<Interval> seller_stop;
  /// Wealth levels where exercising is the buyer's best response:
  /// (f_k - y)^+ = J_k(y).
  std::vector<Interval> buyer_stop;
};

class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(Lattice lattice, OptionStyle style, double a1, double a2);

  const Lattice& lattice() const { return lattice_; }
  OptionStyle style() const { return style_; }
  int steps() const { return lattice_.steps(); }
  double a1() const { return a1_; }
  double a2() const { return a2_; }

  const NodePolicy& node(int k, std::size_t idx) const {
    return levels_[static_cast<std::size_t>(k)][idx];
  }
  NodePolicy& node(int k, std::size_t idx) {
    return levels_[static_cast<std::size_t>(k)][idx];
  }

  /// Optimal exposure h_k(y) at the node (smallest minimiser).
  double exposure(int k, std::size_t idx, double y) const;
  /// Always true at k = n.
  bool seller_stops(int k, std::size_t idx, double y) const;
  /// Always true at k = n.
  bool buyer_stops(int k, std::size_t idx, double y) const;

 private:
  Lattice lattice_;
  OptionStyle style_ = OptionStyle::Game;
  double a1_ = 0.0;
  double a2_ = 0.0;
  std::vector<std::vector<NodePolicy>> levels_;
};

/// J_k(., node) for the retained levels. The root level is always kept.
class ValueTable {
 public:
  ValueTable() = default;
  explicit ValueTable(Lattice lattice);

  const Lattice& lattice() const { return lattice_; }
  const PwlFn& root() const { return levels_.front().front(); }
  bool has_level(int k) const {
    return !levels_[static_cast<std::size_t>(k)].empty();
  }
  /// Throws std::out_of_range if the level was not retained.
  const PwlFn& at(int k, std::size_t idx) const;

  /// Largest and total break counts per level (always recorded).
  const std::vector<std::size_t>& max_breaks() const { return max_breaks_; }
  const std::vector<std::size_t>& total_breaks() const { return total_breaks_; }

 private:
  friend struct RiskSolver;
  Lattice lattice_;
  std::vector<std::vector<PwlFn>> levels_;
  std::vector<std::size_t> max_breaks_;
  std::vector<std::size_t> total_breaks_;
};

struct RiskTables {
  ValueTable values;
  PolicyTable policy;
};

struct SolveOptions {
  /// Retain J_k for every level (otherwise only the root survives).
  bool keep_all_levels = false;
  unsigned threads = 1;
  /// Use the linear-time composition at nodes whose children are convex.
  /// Off forces the candidate envelope everywhere.
  bool convex_shortcut = true;
};

/// Backward induction J_n = (f_n - y)^+,
/// J_k = min((g_k - y)^+, max((f_k - y)^+, psi_k)).
RiskTables game_value_table(const CrrModel& model,
                            const DiscretePayoffs& payoffs,
                            const SolveOptions& options = {});

/// Backward induction J_n = (f_n - y)^+, J_k = max((f_k - y)^+, psi_k).
RiskTables american_value_table(const CrrModel& model,
                                const DiscretePayoffs& payoffs,
                                const SolveOptions& options = {});

RiskTables solve_tables(const CrrModel& model, const DiscretePayoffs& payoffs,
                        OptionStyle style, const SolveOptions& options = {});

/// J_0(x). Throws std::invalid_argument for x < 0.
double shortfall_risk(const ValueTable& table, double x);

/// Dynkin game value under the martingale measure:
/// V_k = min(g_k, max(f_k, E~ V_{k+1})).
double game_price(const CrrModel& model, const DiscretePayoffs& payoffs);

/// V_k = max(f_k, E~ V_{k+1}).
double american_price(const CrrModel& model, const DiscretePayoffs& payoffs);

double option_price(const CrrModel& model, const DiscretePayoffs& payoffs,
                    OptionStyle style);

/// Exposure u chosen at depth k on the path `bits` (bit i set iff
/// xi_{i+1} = +1) with current discounted wealth y.
using ExposureRule =
    std::function<double(int k, std::uint32_t bits, double wealth)>;

/// Wealth and shortfall-game values of a strategy on the full tree.
struct TreeEvaluation {
  int n = 0;
  std::vector<std::vector<double>> wealth;    // k = 0..n, index = bits
  std::vector<std::vector<double>> exposure;  // k = 0..n-1
  std::vector<std::vector<double>> w;         // W_k per node
};

/// Forward wealth propagation and the backward recursion
/// W_n = (f_n - V_n)^+, W_k = min((g_k - V_k)^+, max((f_k - V_k)^+, E W_{k+1}))
/// (the outer min is dropped for American options). Throws AdmissibilityError
/// when the rule leaves [-y/a1, -y/a2].
TreeEvaluation evaluate_on_tree(const CrrModel& model,
                                const DiscretePayoffs& payoffs,
                                const ExposureRule& rule, double x,
                                OptionStyle style);

/// W_0 of the strategy; never below J_0(x).
double evaluate_hedge(const CrrModel& model, const DiscretePayoffs& payoffs,
                      const ExposureRule& rule, double x,
                      OptionStyle style = OptionStyle::Game);

/// The optimal policy as an ExposureRule.
ExposureRule policy_rule(const PolicyTable& policy);

}  // namespace shortfall
