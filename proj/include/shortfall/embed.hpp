#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shortfall/market.hpp"
#include "shortfall/payoff.hpp"
#include "shortfall/risk.hpp"

namespace shortfall {

/// Law of the simulated driving motion B*.
enum class Measure {
  Objective,   // drift mu/kappa - kappa/2
  Martingale,  // drift -kappa/2
};

struct EmbedOptions {
  /// Upper bound on the fine Euler step; the grid uses T / ceil(T / dt_fine).
  /// Zero selects (T/n)/64.
  double dt_fine = 0.0;
  Measure measure = Measure::Objective;
  /// Keep the fine trajectory and simulate at least up to T.
  bool keep_fine = false;
  /// Simulation stops with BudgetError past this multiple of T.
  double horizon_factor = 64.0;
};

/// First exits of B* from bands of half-width sqrt(T/n) around the previous
/// exit level.
struct EmbeddedPath {
  std::vector<double> theta;  // theta_0 = 0 < ... < theta_n
  std::vector<int> signs;     // b_k = signs[k-1] * sqrt(T/n)
  std::vector<double> fine_t;  // filled when keep_fine
  std::vector<double> fine_b;  // B* on fine_t
  double u_n = 0.0;        // max_k |theta_k - kT/n|
  double w_n = 0.0;        // max_k |theta_k - theta_{k-1}| + |T - theta_n|
  double z_terminal = 0.0; // exp((mu/kappa) B_theta_n + (mu/kappa)^2 theta_n / 2)
};

/// Simulates path `path_index` of the stream `seed`. Each (seed, index) pair
/// has its own generators, so a path never depends on which worker ran it.
/// Throws ParameterError when dt_fine > (T/n)/64 and BudgetError when the n
/// exits do not occur within horizon_factor * T.
EmbeddedPath simulate_embedding(const MarketParams& params, int n,
                                std::uint64_t seed, std::uint64_t path_index,
                                const EmbedOptions& options = {});

struct McDiagnostics {
  double up_fraction = 0.0;
  double mean_u_n = 0.0;
  double mean_w_n = 0.0;
  double mean_theta_n = 0.0;
  double z_mean = 0.0;
  double z_stderr = 0.0;
};

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t paths = 0;
  std::string label;
  McDiagnostics diagnostics;
  /// Continuous diagnostic only: index of the winning buyer rule
  /// (0..n-1: theta_j ^ T, n: T, n+1: mapped best response).
  int buyer_rule = -1;
};

struct McOptions {
  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  EmbedOptions embed;
};

/// Diagnostics of the embedding alone (no payoff).
McDiagnostics embedding_statistics(const MarketParams& params, int n,
                                   const McOptions& options);

/// Shortfall of the lifted discrete hedge against the discrete payoffs along
/// the embedded sign paths; seller stops per the policy, buyer at the first
/// best-response time. An unbiased estimator of J_0(x).
McEstimate mc_discrete_shortfall(const CrrModel& model,
                                 const DiscretePayoffs& payoffs,
                                 const PolicyTable& policy, double x,
                                 const McOptions& options);

/// Shortfall of the lifted hedge in the simulated continuous market, with the
/// true payoff functionals evaluated on the fine path. The buyer picks the
/// best of a finite family of stopping rules, so the estimate is a lower
/// bound for the continuous-time risk of this hedge ("restricted-adversary").
McEstimate mc_continuous_diagnostic(const CrrModel& model,
                                    const PayoffSpec& spec,
                                    const DiscretePayoffs& payoffs,
                                    const PolicyTable& policy, double x,
                                    const McOptions& options);

}  // namespace shortfall
