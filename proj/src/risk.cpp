#include "shortfall/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "shortfall/error.hpp"
#include "shortfall/parallel.hpp"

namespace shortfall {

namespace {

constexpr double kStopTol = 1e-10;

double region_slack(double y) { return 1e-12 * (1.0 + std::abs(y)); }

}  // namespace

const char* to_string(OptionStyle style) {
  return style == OptionStyle::Game ? "game" : "american";
}

PolicyTable::PolicyTable(Lattice lattice, OptionStyle style, double a1,
                         double a2)
    : lattice_(lattice), style_(style), a1_(a1), a2_(a2) {
  levels_.resize(static_cast<std::size_t>(lattice_.steps()));
  for (int k = 0; k < lattice_.steps(); ++k) {
    levels_[static_cast<std::size_t>(k)].resize(lattice_.level_size(k));
  }
}

double PolicyTable::exposure(int k, std::size_t idx, double y) const {
  return policy_exposure(node(k, idx).pieces, y, a1_, a2_);
}

bool PolicyTable::seller_stops(int k, std::size_t idx, double y) const {
  if (k >= steps()) return true;
  return in_region(node(k, idx).seller_stop, y, region_slack(y));
}

bool PolicyTable::buyer_stops(int k, std::size_t idx, double y) const {
  if (k >= steps()) return true;
  return in_region(node(k, idx).buyer_stop, y, region_slack(y));
}

ValueTable::ValueTable(Lattice lattice) : lattice_(lattice) {
  const auto levels = static_cast<std::size_t>(lattice_.steps()) + 1;
  levels_.resize(levels);
  max_breaks_.assign(levels, 0);
  total_breaks_.assign(levels, 0);
}

const PwlFn& ValueTable::at(int k, std::size_t idx) const {
  if (k < 0 || k > lattice_.steps() || !has_level(k)) {
    throw std::out_of_range("value level " + std::to_string(k) +
                            " not retained");
  }
  return levels_[static_cast<std::size_t>(k)].at(idx);
}

struct RiskSolver {
  static RiskTables run(const CrrModel& model, const DiscretePayoffs& payoffs,
                        OptionStyle style, const SolveOptions& options) {
    const Lattice& lat = payoffs.lattice;
    if (lat.steps() != model.n) {
      throw ParameterError("payoffs were discretised for a different n");
    }
    const int n = model.n;
    RiskTables out{ValueTable(lat), PolicyTable(lat, style, model.a1, model.a2)};
    ValueTable& values = out.values;

    std::vector<PwlFn> next(lat.level_size(n));
    for (std::size_t i = 0; i < next.size(); ++i) {
      next[i] = PwlFn::hinge(payoffs.low(n, i));
    }
    record(values, n, next, options.keep_all_levels || n == 0);

    for (int k = n - 1; k >= 0; --k) {
      std::vector<PwlFn> cur(lat.level_size(k));
      parallel_for(cur.size(), options.threads, [&](std::size_t idx) {
        const PwlFn& up = next[lat.up_child(k, idx)];
        const PwlFn& down = next[lat.down_child(k, idx)];
        BellmanResult br =
            options.convex_shortcut
                ? bellman_compose(up, down, model.p_obj, model.a1, model.a2)
                : bellman_compose_envelope(up, down, model.p_obj, model.a1,
                                           model.a2);
        if (!policy_feasible(br.policy, model.a1, model.a2)) {
          throw std::logic_error("infeasible policy piece at level " +
                                 std::to_string(k));
        }
        const double f = payoffs.low(k, idx);
        const PwlFn low_hinge = PwlFn::hinge(f);
        PwlFn j = pointwise_max(low_hinge, br.value);
        NodePolicy& node = out.policy.node(k, idx);
        if (style == OptionStyle::Game) {
          const PwlFn high_hinge = PwlFn::hinge(payoffs.high(k, idx));
          j = pointwise_min(high_hinge, j);
          node.seller_stop =
              region_le(high_hinge, j, kStopTol * (1.0 + j.at_zero()));
        }
        node.buyer_stop = region_le(j, low_hinge, kStopTol * (1.0 + j.at_zero()));
        node.pieces = std::move(br.policy);
        cur[idx] = std::move(j);
      });
      next.swap(cur);
      record(values, k, next, options.keep_all_levels || k == 0);
    }
    return out;
  }

  static void record(ValueTable& values, int k, const std::vector<PwlFn>& level,
                     bool keep) {
    std::size_t mx = 0;
    std::size_t total = 0;
    for (const PwlFn& fn : level) {
      mx = std::max(mx, fn.size());
      total += fn.size();
    }
    values.max_breaks_[static_cast<std::size_t>(k)] = mx;
    values.total_breaks_[static_cast<std::size_t>(k)] = total;
    if (keep) values.levels_[static_cast<std::size_t>(k)] = level;
  }
};

RiskTables game_value_table(const CrrModel& model,
                            const DiscretePayoffs& payoffs,
                            const SolveOptions& options) {
  return RiskSolver::run(model, payoffs, OptionStyle::Game, options);
}

RiskTables american_value_table(const CrrModel& model,
                                const DiscretePayoffs& payoffs,
                                const SolveOptions& options) {
  return RiskSolver::run(model, payoffs, OptionStyle::American, options);
}

RiskTables solve_tables(const CrrModel& model, const DiscretePayoffs& payoffs,
                        OptionStyle style, const SolveOptions& options) {
  return RiskSolver::run(model, payoffs, style, options);
}

double shortfall_risk(const ValueTable& table, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("capital x must be >= 0");
  return table.root()(x);
}

namespace {

double price_recursion(const CrrModel& model, const DiscretePayoffs& payoffs,
                       OptionStyle style) {
  const Lattice& lat = payoffs.lattice;
  const int n = lat.steps();
  const double p = model.p_mart;
  std::vector<double> next(payoffs.f[static_cast<std::size_t>(n)]);
  for (int k = n - 1; k >= 0; --k) {
    std::vector<double> cur(lat.level_size(k));
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      const double cont = p * next[lat.up_child(k, idx)] +
                          (1.0 - p) * next[lat.down_child(k, idx)];
      double v = std::max(payoffs.low(k, idx), cont);
      if (style == OptionStyle::Game) v = std::min(payoffs.high(k, idx), v);
      cur[idx] = v;
    }
    next.swap(cur);
  }
  return next.front();
}

}  // namespace

double game_price(const CrrModel& model, const DiscretePayoffs& payoffs) {
  return price_recursion(model, payoffs, OptionStyle::Game);
}

double american_price(const CrrModel& model, const DiscretePayoffs& payoffs) {
  return price_recursion(model, payoffs, OptionStyle::American);
}

double option_price(const CrrModel& model, const DiscretePayoffs& payoffs,
                    OptionStyle style) {
  return price_recursion(model, payoffs, style);
}

TreeEvaluation evaluate_on_tree(const CrrModel& model,
                                const DiscretePayoffs& payoffs,
                                const ExposureRule& rule, double x,
                                OptionStyle style) {
  if (!(x >= 0.0)) throw std::invalid_argument("capital x must be >= 0");
  const int n = model.n;
  if (n > Lattice::kMaxFullDepth) {
    throw BudgetError("strategy evaluation enumerates 2^n nodes; n too large");
  }
  const Lattice& lat = payoffs.lattice;
  TreeEvaluation ev;
  ev.n = n;
  ev.wealth.resize(static_cast<std::size_t>(n) + 1);
  ev.exposure.resize(static_cast<std::size_t>(n));
  ev.w.resize(static_cast<std::size_t>(n) + 1);
  ev.wealth[0] = {x};
  for (int k = 0; k < n; ++k) {
    const std::size_t size = std::size_t{1} << k;
    auto& wk = ev.wealth[static_cast<std::size_t>(k)];
    auto& uk = ev.exposure[static_cast<std::size_t>(k)];
    auto& wn = ev.wealth[static_cast<std::size_t>(k) + 1];
    uk.resize(size);
    wn.resize(size * 2);
    for (std::size_t bits = 0; bits < size; ++bits) {
      const double y = wk[bits];
      double u = rule(k, static_cast<std::uint32_t>(bits), y);
      const Interval b = exposure_bounds(y, model.a1, model.a2);
      const double slack = 1e-12 * (1.0 + std::abs(b.lo) + std::abs(b.hi));
      if (!std::isfinite(u) || u < b.lo - slack || u > b.hi + slack) {
        throw AdmissibilityError(
            "exposure " + std::to_string(u) + " outside [" +
            std::to_string(b.lo) + ", " + std::to_string(b.hi) +
            "] at depth " + std::to_string(k));
      }
      u = std::clamp(u, b.lo, b.hi);
      uk[bits] = u;
      wn[bits | (std::size_t{1} << k)] = std::max(0.0, y + u * model.a1);
      wn[bits] = std::max(0.0, y + u * model.a2);
    }
  }
  const double p = model.p_obj;
  {
    auto& wn = ev.w[static_cast<std::size_t>(n)];
    const auto& vn = ev.wealth[static_cast<std::size_t>(n)];
    wn.resize(vn.size());
    for (std::size_t bits = 0; bits < vn.size(); ++bits) {
      const double f = payoffs.low(n, lat.index(n, static_cast<std::uint32_t>(bits)));
      wn[bits] = std::max(f - vn[bits], 0.0);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    const std::size_t size = std::size_t{1} << k;
    const auto& wnext = ev.w[static_cast<std::size_t>(k) + 1];
    const auto& vk = ev.wealth[static_cast<std::size_t>(k)];
    auto& wk = ev.w[static_cast<std::size_t>(k)];
    wk.resize(size);
    for (std::size_t bits = 0; bits < size; ++bits) {
      const std::size_t idx = lat.index(k, static_cast<std::uint32_t>(bits));
      const double cont =
          p * wnext[bits | (std::size_t{1} << k)] + (1.0 - p) * wnext[bits];
      double w = std::max(std::max(payoffs.low(k, idx) - vk[bits], 0.0), cont);
      if (style == OptionStyle::Game) {
        w = std::min(std::max(payoffs.high(k, idx) - vk[bits], 0.0), w);
      }
      wk[bits] = w;
    }
  }
  return ev;
}

double evaluate_hedge(const CrrModel& model, const DiscretePayoffs& payoffs,
                      const ExposureRule& rule, double x, OptionStyle style) {
  return evaluate_on_tree(model, payoffs, rule, x, style).w[0][0];
}

ExposureRule policy_rule(const PolicyTable& policy) {
  return [&policy](int k, std::uint32_t bits, double y) {
    return policy.exposure(k, policy.lattice().index(k, bits), y);
  };
}

}  // namespace shortfall
