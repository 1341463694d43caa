#include "shortfall/market.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "shortfall/error.hpp"

namespace shortfall {

namespace {

void require_positive(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw ParameterError(std::string(name) + " must be finite and > 0, got " +
                         std::to_string(value));
  }
}

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ParameterError(std::string(name) + " must be finite");
  }
}

}  // namespace

void validate(const MarketParams& params) {
  require_finite(params.r, "r");
  require_finite(params.mu, "mu");
  require_positive(params.kappa, "kappa");
  require_positive(params.T, "T");
  require_positive(params.S0, "S0");
  require_positive(params.b0, "b0");
}

std::uint32_t word_bits(const PathNode& node) {
  if (node.k < 0 || static_cast<int>(node.word.size()) != node.k ||
      node.k > 32) {
    throw ParameterError("path node word length must equal its depth");
  }
  std::uint32_t bits = 0;
  for (int i = 0; i < node.k; ++i) {
    const int s = node.word[static_cast<std::size_t>(i)];
    if (s != 1 && s != -1) throw ParameterError("path signs must be +1 or -1");
    if (s > 0) bits |= (std::uint32_t{1} << i);
  }
  return bits;
}

PathNode node_from_bits(int k, std::uint32_t bits) {
  PathNode node;
  node.k = k;
  node.word.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    node.word[static_cast<std::size_t>(i)] = ((bits >> i) & 1u) ? 1 : -1;
  }
  return node;
}

CrrModel build_crr(const MarketParams& params, int n) {
  validate(params);
  if (n < 1) throw ParameterError("step count n must be >= 1");
  CrrModel m;
  m.params = params;
  m.n = n;
  m.dt = params.T / n;
  m.step = std::sqrt(m.dt);
  m.rn = std::expm1(params.r * m.dt);
  m.a1 = std::expm1(params.kappa * m.step);
  m.a2 = std::expm1(-params.kappa * m.step);
  const double tilt = params.kappa - 2.0 * params.mu / params.kappa;
  m.p_obj = 1.0 / (std::exp(tilt * m.step) + 1.0);
  m.p_mart = 1.0 / (std::exp(params.kappa * m.step) + 1.0);
  if (!(m.p_obj > 0.0 && m.p_obj < 1.0) || !(m.a1 > 0.0 && m.a2 < 0.0)) {
    throw ParameterError("degenerate CRR model for the given parameters");
  }
  return m;
}

double CrrModel::discount_factor(int k) const {
  return std::exp(-params.r * k * dt);
}

double CrrModel::stock_price(int k, int ups) const {
  return params.S0 *
         std::exp(k * params.r * dt + params.kappa * step * (2 * ups - k));
}

double CrrModel::discounted_stock(int k, int ups) const {
  return params.S0 * std::exp(params.kappa * step * (2 * ups - k));
}

double stock_price(const CrrModel& model, const PathNode& node) {
  if (node.k > model.n) throw ParameterError("node deeper than the model");
  const std::uint32_t bits = word_bits(node);
  return model.stock_price(node.k, std::popcount(bits));
}

double discount_factor(const CrrModel& model, int k) {
  if (k < 0 || k > model.n) throw ParameterError("depth out of range");
  return model.discount_factor(k);
}

Lattice::Lattice(int n, bool recombined) : n_(n), recombined_(recombined) {
  if (n < 1) throw ParameterError("lattice needs n >= 1");
  if (!recombined && n > kMaxFullDepth) {
    throw BudgetError("full tree limited to n <= " +
                      std::to_string(kMaxFullDepth) + ", got " +
                      std::to_string(n));
  }
}

std::size_t Lattice::level_size(int k) const {
  return recombined_ ? static_cast<std::size_t>(k) + 1
                     : (std::size_t{1} << k);
}

std::size_t Lattice::index(int k, std::uint32_t bits) const {
  if (!recombined_) return bits;
  const std::uint32_t mask =
      k >= 32 ? ~std::uint32_t{0} : ((std::uint32_t{1} << k) - 1);
  return static_cast<std::size_t>(std::popcount(bits & mask));
}

std::size_t Lattice::up_child(int k, std::size_t idx) const {
  return recombined_ ? idx + 1 : (idx | (std::size_t{1} << k));
}

std::size_t Lattice::down_child(int /*k*/, std::size_t idx) const {
  return idx;
}

int Lattice::ups(int /*k*/, std::size_t idx) const {
  return recombined_ ? static_cast<int>(idx)
                     : std::popcount(static_cast<std::uint64_t>(idx));
}

std::vector<int> Lattice::signs(int k, std::size_t idx) const {
  std::vector<int> out(static_cast<std::size_t>(k), -1);
  for (int i = 0; i < k; ++i) {
    const bool up = recombined_ ? static_cast<std::size_t>(i) < idx
                                : ((idx >> i) & 1u) != 0;
    if (up) out[static_cast<std::size_t>(i)] = 1;
  }
  return out;
}

}  // namespace shortfall
