#include "shortfall/embed.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "shortfall/error.hpp"
#include "shortfall/hedge.hpp"
#include "shortfall/parallel.hpp"

namespace shortfall {

namespace {

constexpr std::uint32_t kGaussStream = 1;
constexpr std::uint32_t kBridgeStream = 2;
// Paths are reduced in fixed blocks so sums do not depend on the worker count.
constexpr std::uint64_t kBlock = 1024;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t index,
                            std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), stream};
  return std::mt19937_64(seq);
}

struct Grid {
  std::int64_t m = 0;  // steps per unit horizon T
  double h = 0.0;
};

Grid fine_grid(const MarketParams& params, int n, double dt_fine) {
  const double limit = params.T / n / 64.0;
  if (dt_fine == 0.0) dt_fine = limit;
  if (!(dt_fine > 0.0) || dt_fine > limit * (1.0 + 1e-12)) {
    throw ParameterError("dt_fine must lie in (0, (T/n)/64]");
  }
  Grid g;
  g.m = static_cast<std::int64_t>(std::ceil(params.T / dt_fine - 1e-9));
  g.h = params.T / static_cast<double>(g.m);
  return g;
}

struct Accum {
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double v) {
    sum += v;
    sumsq += v * v;
  }
  void merge(const Accum& o) {
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean(double count) const { return sum / count; }
  double std_error(double count) const {
    if (count < 2.0) return 0.0;
    const double m = sum / count;
    const double var = std::max(0.0, (sumsq - count * m * m) / (count - 1.0));
    return std::sqrt(var / count);
  }
};

struct DiagAccum {
  double ups = 0.0;
  double increments = 0.0;
  double u_n = 0.0;
  double w_n = 0.0;
  double theta_n = 0.0;
  Accum z;

  void add(const EmbeddedPath& path) {
    for (int s : path.signs) ups += s > 0 ? 1.0 : 0.0;
    increments += static_cast<double>(path.signs.size());
    u_n += path.u_n;
    w_n += path.w_n;
    theta_n += path.theta.back();
    z.add(path.z_terminal);
  }
  void merge(const DiagAccum& o) {
    ups += o.ups;
    increments += o.increments;
    u_n += o.u_n;
    w_n += o.w_n;
    theta_n += o.theta_n;
    z.merge(o.z);
  }
  McDiagnostics finish(double count) const {
    McDiagnostics d;
    d.up_fraction = increments > 0.0 ? ups / increments : 0.0;
    d.mean_u_n = u_n / count;
    d.mean_w_n = w_n / count;
    d.mean_theta_n = theta_n / count;
    d.z_mean = z.mean(count);
    d.z_stderr = z.std_error(count);
    return d;
  }
};

// Runs body(path_index, block_state) over all paths in fixed blocks and
// returns the block states in block order.
template <class State, class Body>
std::vector<State> run_blocks(const McOptions& options, Body body) {
  if (options.paths == 0) throw ParameterError("number of paths must be >= 1");
  const std::uint64_t blocks = (options.paths + kBlock - 1) / kBlock;
  std::vector<State> states(blocks);
  parallel_for(blocks, options.threads, [&](std::size_t b) {
    State& st = states[b];
    const std::uint64_t begin = b * kBlock;
    const std::uint64_t end = std::min(options.paths, begin + kBlock);
    for (std::uint64_t i = begin; i < end; ++i) body(i, st);
  });
  return states;
}

void check_match(const CrrModel& model, const DiscretePayoffs& payoffs,
                 const PolicyTable& policy) {
  if (payoffs.steps() != model.n || policy.steps() != model.n) {
    throw ParameterError("policy, payoffs and model disagree on n");
  }
}

}  // namespace

EmbeddedPath simulate_embedding(const MarketParams& params, int n,
                                std::uint64_t seed, std::uint64_t path_index,
                                const EmbedOptions& options) {
  validate(params);
  if (n < 1) throw ParameterError("step count n must be >= 1");
  const Grid grid = fine_grid(params, n, options.dt_fine);
  const double a = std::sqrt(params.T / n);
  const double c = params.mu / params.kappa;
  const double drift = options.measure == Measure::Objective
                           ? c - 0.5 * params.kappa
                           : -0.5 * params.kappa;
  const double mean_step = drift * grid.h;
  const double sd_step = std::sqrt(grid.h);
  const auto max_steps = static_cast<std::int64_t>(
      std::ceil(options.horizon_factor * static_cast<double>(grid.m)));

  std::mt19937_64 gauss = make_engine(seed, path_index, kGaussStream);
  std::mt19937_64 bridge = make_engine(seed, path_index, kBridgeStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  EmbeddedPath path;
  path.theta.reserve(static_cast<std::size_t>(n) + 1);
  path.signs.reserve(static_cast<std::size_t>(n));
  path.theta.push_back(0.0);
  if (options.keep_fine) {
    path.fine_t.reserve(static_cast<std::size_t>(grid.m) + 1);
    path.fine_b.reserve(static_cast<std::size_t>(grid.m) + 1);
    path.fine_t.push_back(0.0);
    path.fine_b.push_back(0.0);
  }
  double x = 0.0;
  double anchor = 0.0;
  std::int64_t i = 0;
  while (static_cast<int>(path.signs.size()) < n ||
         (options.keep_fine && i < grid.m)) {
    if (i >= max_steps) {
      throw BudgetError("embedding: " + std::to_string(path.signs.size()) +
                        " of " + std::to_string(n) + " exits within " +
                        std::to_string(options.horizon_factor) + " T");
    }
    double x1 = x + mean_step + sd_step * normal(gauss);
    ++i;
    const double t = static_cast<double>(i) * grid.h;
    if (static_cast<int>(path.signs.size()) < n) {
      const double up = anchor + a;
      const double down = anchor - a;
      int side = 0;
      if (x1 >= up) {
        side = 1;
      } else if (x1 <= down) {
        side = -1;
      } else {
        // Crossing probabilities of the Brownian bridge between grid points.
        const double pu = std::exp(-2.0 * (up - x) * (up - x1) / grid.h);
        const double pd = std::exp(-2.0 * (x - down) * (x1 - down) / grid.h);
        const double v = uniform(bridge);
        if (v < pu) {
          side = 1;
        } else if (v < pu + pd) {
          side = -1;
        }
      }
      if (side != 0) {
        anchor += side * a;
        x1 = anchor;
        path.theta.push_back(t);
        path.signs.push_back(side);
      }
    }
    x = x1;
    if (options.keep_fine) {
      path.fine_t.push_back(t);
      path.fine_b.push_back(x);
    }
  }

  const double dt = params.T / n;
  for (int k = 0; k <= n; ++k) {
    path.u_n = std::max(path.u_n, std::abs(path.theta[static_cast<std::size_t>(k)] - k * dt));
  }
  double gap = 0.0;
  for (int k = 1; k <= n; ++k) {
    gap = std::max(gap, path.theta[static_cast<std::size_t>(k)] -
                            path.theta[static_cast<std::size_t>(k) - 1]);
  }
  const double theta_n = path.theta.back();
  path.w_n = gap + std::abs(params.T - theta_n);
  const double b = anchor - (c - 0.5 * params.kappa) * theta_n;
  path.z_terminal = std::exp(c * b + 0.5 * c * c * theta_n);
  return path;
}

McDiagnostics embedding_statistics(const MarketParams& params, int n,
                                   const McOptions& options) {
  EmbedOptions embed = options.embed;
  embed.keep_fine = false;
  const auto blocks =
      run_blocks<DiagAccum>(options, [&](std::uint64_t i, DiagAccum& st) {
        st.add(simulate_embedding(params, n, options.seed, i, embed));
      });
  DiagAccum total;
  for (const auto& b : blocks) total.merge(b);
  return total.finish(static_cast<double>(options.paths));
}

McEstimate mc_discrete_shortfall(const CrrModel& model,
                                 const DiscretePayoffs& payoffs,
                                 const PolicyTable& policy, double x,
                                 const McOptions& options) {
  check_match(model, payoffs, policy);
  EmbedOptions embed = options.embed;
  embed.keep_fine = false;
  embed.measure = Measure::Objective;
  struct State {
    Accum loss;
    DiagAccum diag;
  };
  const auto blocks = run_blocks<State>(options, [&](std::uint64_t i, State& st) {
    const EmbeddedPath path =
        simulate_embedding(model.params, model.n, options.seed, i, embed);
    st.loss.add(replay(model, payoffs, policy, x, path.signs).shortfall);
    st.diag.add(path);
  });
  State total;
  for (const auto& b : blocks) {
    total.loss.merge(b.loss);
    total.diag.merge(b.diag);
  }
  const auto count = static_cast<double>(options.paths);
  McEstimate est;
  est.estimate = total.loss.mean(count);
  est.std_error = total.loss.std_error(count);
  est.paths = options.paths;
  est.label = "discrete";
  est.diagnostics = total.diag.finish(count);
  return est;
}

McEstimate mc_continuous_diagnostic(const CrrModel& model,
                                    const PayoffSpec& spec,
                                    const DiscretePayoffs& payoffs,
                                    const PolicyTable& policy, double x,
                                    const McOptions& options) {
  check_match(model, payoffs, policy);
  const int n = model.n;
  const MarketParams& mp = model.params;
  EmbedOptions embed = options.embed;
  embed.keep_fine = true;
  embed.measure = Measure::Objective;
  const Grid grid = fine_grid(mp, n, embed.dt_fine);
  const std::size_t rules = static_cast<std::size_t>(n) + 2;
  const bool game = policy.style() == OptionStyle::Game;

  struct State {
    std::vector<Accum> loss;
    DiagAccum diag;
  };
  const auto blocks = run_blocks<State>(options, [&](std::uint64_t i, State& st) {
    if (st.loss.empty()) st.loss.resize(rules);
    const EmbeddedPath path = simulate_embedding(mp, n, options.seed, i, embed);
    st.diag.add(path);
    const HedgeTrajectory traj = replay(model, payoffs, policy, x, path.signs);

    const std::size_t len = path.fine_t.size();
    std::vector<double> stock(len);
    for (std::size_t j = 0; j < len; ++j) {
      stock[j] = mp.S0 * std::exp(mp.r * path.fine_t[j] + mp.kappa * path.fine_b[j]);
    }
    const auto horizon = static_cast<std::size_t>(grid.m);
    std::vector<std::size_t> at(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      at[static_cast<std::size_t>(k)] = static_cast<std::size_t>(
          std::llround(path.theta[static_cast<std::size_t>(k)] / grid.h));
    }
    auto capped = [&](int k) {
      return k >= n ? horizon : std::min(at[static_cast<std::size_t>(k)], horizon);
    };
    // Discounted wealth of the lifted hedge at fine index s.
    auto wealth_at = [&](std::size_t s) {
      const auto it = std::upper_bound(at.begin(), at.end(), s);
      const auto j = static_cast<std::size_t>(it - at.begin()) - 1;
      const HedgeStep& hs = traj.steps[j];
      if (j == static_cast<std::size_t>(n)) return hs.wealth;
      const double disc_now = mp.S0 * std::exp(mp.kappa * path.fine_b[s]);
      const double disc_then = mp.S0 * std::exp(mp.kappa * path.fine_b[at[j]]);
      return hs.wealth + hs.gamma * (disc_now - disc_then);
    };
    auto payoff_at = [&](std::size_t s, bool high) {
      const PathView view{std::span<const double>(path.fine_t.data(), s + 1),
                          std::span<const double>(stock.data(), s + 1)};
      const double t = path.fine_t[s];
      const double v = high ? spec.high(t, view) : spec.low(t, view);
      return std::exp(-mp.r * t) * v;
    };
    const std::size_t seller = game ? capped(traj.sigma) : horizon;
    for (std::size_t r = 0; r < rules; ++r) {
      std::size_t buyer = 0;
      if (r < static_cast<std::size_t>(n)) {
        buyer = capped(static_cast<int>(r));
      } else if (r == static_cast<std::size_t>(n)) {
        buyer = horizon;
      } else {
        buyer = capped(traj.tau);
      }
      const std::size_t stop = std::min(seller, buyer);
      const double q = seller < buyer ? payoff_at(stop, true) : payoff_at(stop, false);
      st.loss[r].add(std::max(q - wealth_at(stop), 0.0));
    }
  });

  std::vector<Accum> total(rules);
  DiagAccum diag;
  for (const auto& b : blocks) {
    for (std::size_t r = 0; r < b.loss.size(); ++r) total[r].merge(b.loss[r]);
    diag.merge(b.diag);
  }
  const auto count = static_cast<double>(options.paths);
  std::size_t best = 0;
  for (std::size_t r = 1; r < rules; ++r) {
    if (total[r].mean(count) > total[best].mean(count)) best = r;
  }
  McEstimate est;
  est.estimate = total[best].mean(count);
  est.std_error = total[best].std_error(count);
  est.paths = options.paths;
  est.label = "restricted-adversary";
  est.diagnostics = diag.finish(count);
  est.buyer_rule = static_cast<int>(best);
  return est;
}

}  // namespace shortfall
