#include "shortfall/hedge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shortfall/error.hpp"
#include "shortfall/format.hpp"

namespace shortfall {

namespace {

double realized(const DiscretePayoffs& payoffs, const std::vector<std::size_t>& idx,
                const std::vector<HedgeStep>& steps, int sigma, int tau) {
  const int stop = std::min(sigma, tau);
  const auto s = static_cast<std::size_t>(stop);
  const double q = sigma < tau ? payoffs.high(stop, idx[s])
                               : payoffs.low(stop, idx[s]);
  return std::max(q - steps[s].wealth, 0.0);
}

}  // namespace

HedgeTrajectory replay(const CrrModel& model, const DiscretePayoffs& payoffs,
                       const PolicyTable& policy, double x,
                       std::span<const int> signs,
                       std::optional<int> buyer_step) {
  const int n = model.n;
  if (!(x >= 0.0)) throw std::invalid_argument("capital x must be >= 0");
  if (static_cast<int>(signs.size()) != n || policy.steps() != n ||
      payoffs.steps() != n) {
    throw ParameterError("path, policy and payoffs must all have n steps");
  }
  if (buyer_step && (*buyer_step < 0 || *buyer_step > n)) {
    throw ParameterError("buyer step must lie in 0..n");
  }
  const Lattice& lat = payoffs.lattice;
  const bool game = policy.style() == OptionStyle::Game;

  HedgeTrajectory traj;
  traj.steps.resize(static_cast<std::size_t>(n) + 1);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n) + 1, 0);
  traj.sigma = -1;
  traj.tau = -1;
  double wealth = x;
  int ups = 0;
  for (int k = 0; k <= n; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    HedgeStep& st = traj.steps[ks];
    st.k = k;
    st.sign = k == 0 ? 0 : signs[ks - 1];
    st.stock = model.discounted_stock(k, ups);
    st.wealth = wealth;
    st.seller_stop = !game ? k == n : policy.seller_stops(k, idx[ks], wealth);
    st.buyer_stop = policy.buyer_stops(k, idx[ks], wealth);
    if (st.seller_stop && traj.sigma < 0) traj.sigma = k;
    if (st.buyer_stop && traj.tau < 0) traj.tau = k;
    if (k == n) break;

    const double u = policy.exposure(k, idx[ks], wealth);
    st.exposure = u;
    st.gamma = u / st.stock;
    st.beta = (wealth - u) / model.params.b0;
    const int sign = signs[ks];
    if (sign != 1 && sign != -1) {
      throw ParameterError("path signs must be +1 or -1");
    }
    wealth += u * model.step_return(sign);
    if (wealth < 0.0) {
      if (wealth < -1e-9 * (1.0 + x)) {
        throw AdmissibilityError("wealth went negative at step " +
                                 std::to_string(k + 1));
      }
      wealth = 0.0;
    }
    if (sign > 0) ++ups;
    idx[ks + 1] = sign > 0 ? lat.up_child(k, idx[ks]) : lat.down_child(k, idx[ks]);
  }
  traj.shortfall = realized(payoffs, idx, traj.steps, traj.sigma, traj.tau);
  if (buyer_step) {
    traj.caller_tau = *buyer_step;
    traj.caller_shortfall =
        realized(payoffs, idx, traj.steps, traj.sigma, *buyer_step);
  }
  return traj;
}

double shortfall_expectation(const CrrModel& model,
                             const DiscretePayoffs& payoffs,
                             const PolicyTable& policy, double x) {
  const int n = model.n;
  if (n > Lattice::kMaxFullDepth) {
    throw BudgetError("exhaustive expectation needs n <= " +
                      std::to_string(Lattice::kMaxFullDepth));
  }
  const Lattice& lat = payoffs.lattice;
  const bool game = policy.style() == OptionStyle::Game;
  const TreeEvaluation ev =
      evaluate_on_tree(model, payoffs, policy_rule(policy), x, policy.style());

  // Seller rule fixed by the policy, buyer maximises.
  const auto& vn = ev.wealth[static_cast<std::size_t>(n)];
  std::vector<double> next(vn.size());
  for (std::size_t bits = 0; bits < vn.size(); ++bits) {
    const double f = payoffs.low(n, lat.index(n, static_cast<std::uint32_t>(bits)));
    next[bits] = std::max(f - vn[bits], 0.0);
  }
  const double p = model.p_obj;
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t size = std::size_t{1} << k;
    const auto& vk = ev.wealth[static_cast<std::size_t>(k)];
    std::vector<double> cur(size);
    for (std::size_t bits = 0; bits < size; ++bits) {
      const std::size_t i = lat.index(k, static_cast<std::uint32_t>(bits));
      const double y = vk[bits];
      if (game && policy.seller_stops(k, i, y)) {
        cur[bits] = std::max(payoffs.high(k, i) - y, 0.0);
        continue;
      }
      const double cont =
          p * next[bits | (std::size_t{1} << k)] + (1.0 - p) * next[bits];
      cur[bits] = std::max(std::max(payoffs.low(k, i) - y, 0.0), cont);
    }
    next.swap(cur);
  }
  return next.front();
}

void write_trajectory_csv(std::ostream& os, const HedgeTrajectory& traj) {
  os << "k,sign,stock,wealth,exposure,gamma,beta,seller_stop,buyer_stop\n";
  for (const HedgeStep& s : traj.steps) {
    os << s.k << ',' << s.sign << ',' << fmt_double(s.stock) << ','
       << fmt_double(s.wealth) << ',' << fmt_double(s.exposure) << ','
       << fmt_double(s.gamma) << ',' << fmt_double(s.beta) << ','
       << (s.seller_stop ? 1 : 0) << ',' << (s.buyer_stop ? 1 : 0) << '\n';
  }
}

}  // namespace shortfall
