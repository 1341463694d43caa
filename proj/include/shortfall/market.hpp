#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace shortfall {

/// Black-Scholes market: bond b_t = b0 e^{rt}, stock S_t = S0 e^{rt + kappa B*_t}
/// with B*_t = (mu/kappa - kappa/2) t + B_t.
struct MarketParams {
  double r = 0.0;
  double kappa = 0.2;
  double mu = 0.0;
  double T = 1.0;
  double S0 = 100.0;
  double b0 = 1.0;
};

/// Throws ParameterError unless kappa, T, S0, b0 are finite and positive and
/// r, mu are finite.
void validate(const MarketParams& params);

/// A node of the binomial tree: depth k and the signs xi_1..xi_k (+1 / -1).
struct PathNode {
  int k = 0;
  std::vector<int> word;
};

/// Packs a sign word into bits: bit i set iff xi_{i+1} = +1.
std::uint32_t word_bits(const PathNode& node);
PathNode node_from_bits(int k, std::uint32_t bits);

/// n-step CRR approximation of a MarketParams market. Immutable.
struct CrrModel {
  MarketParams params;
  int n = 1;
  double dt = 1.0;       // T / n
  double step = 1.0;     // sqrt(T / n)
  double rn = 0.0;       // e^{rT/n} - 1
  double a1 = 0.0;       // e^{kappa sqrt(T/n)} - 1
  double a2 = 0.0;       // e^{-kappa sqrt(T/n)} - 1
  double p_obj = 0.5;    // objective up-probability
  double p_mart = 0.5;   // martingale up-probability

  /// (1 + rn)^{-k}, evaluated as e^{-r k T / n}.
  double discount_factor(int k) const;
  /// S0 exp(k r T/n + kappa sqrt(T/n) (ups - downs)).
  double stock_price(int k, int ups) const;
  /// Discounted stock price S0 exp(kappa sqrt(T/n) (ups - downs)).
  double discounted_stock(int k, int ups) const;
  /// One-step return of the discounted stock for a sign: a1 or a2.
  double step_return(int sign) const { return sign > 0 ? a1 : a2; }
};

CrrModel build_crr(const MarketParams& params, int n);

double stock_price(const CrrModel& model, const PathNode& node);
double discount_factor(const CrrModel& model, int k);

/// Storage layout of per-node quantities on the tree.
///
/// Full: every sign word at depth k is its own slot (2^k slots, index = bits).
/// Recombined: slots are indexed by the number of up moves (k + 1 slots); only
/// valid for quantities that depend on the path through (k, #up) alone.
class Lattice {
 public:
  static constexpr int kMaxFullDepth = 24;

  Lattice() = default;
  Lattice(int n, bool recombined);

  int steps() const { return n_; }
  bool recombined() const { return recombined_; }
  std::size_t level_size(int k) const;
  std::size_t index(int k, std::uint32_t bits) const;
  std::size_t up_child(int k, std::size_t idx) const;
  std::size_t down_child(int k, std::size_t idx) const;
  /// Number of up moves on (a representative path to) the slot.
  int ups(int k, std::size_t idx) const;
  /// A representative sign word xi_1..xi_k for the slot (ups first when
  /// recombined).
  std::vector<int> signs(int k, std::size_t idx) const;

 private:
  int n_ = 0;
  bool recombined_ = false;
};

}  // namespace shortfall
