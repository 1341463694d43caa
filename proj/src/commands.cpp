#include "shortfall/commands.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "shortfall/embed.hpp"
#include "shortfall/error.hpp"
#include "shortfall/format.hpp"
#include "shortfall/hedge.hpp"

namespace shortfall {

namespace {

using nlohmann::json;

struct Solved {
  CrrModel model;
  PayoffSpec spec;
  DiscretePayoffs payoffs;
  RiskTables tables;
  double price = 0.0;
};

Solved solve(const RunConfig& cfg, int n) {
  Solved s{build_crr(cfg.market, n), builtin(cfg.payoff_name, cfg.payoff_params),
           {}, {}, 0.0};
  s.payoffs = discretize(s.spec, s.model, cfg.layout);
  SolveOptions opts;
  opts.threads = cfg.threads;
  s.tables = solve_tables(s.model, s.payoffs, cfg.mode, opts);
  s.price = option_price(s.model, s.payoffs, cfg.mode);
  return s;
}

double capital(const RunConfig& cfg, double price) {
  if (cfg.x) return *cfg.x;
  if (cfg.x_rel) return *cfg.x_rel * price;
  return 0.5 * price;
}

json header(const RunConfig& cfg, int n) {
  return json{{"payoff", cfg.payoff_name},
              {"mode", to_string(cfg.mode)},
              {"n", n}};
}

McOptions mc_options(const RunConfig& cfg) {
  McOptions o;
  o.paths = cfg.paths;
  o.seed = cfg.seed;
  o.threads = cfg.threads;
  o.embed.dt_fine = cfg.dt_fine;
  return o;
}

json diagnostics_json(const McDiagnostics& d) {
  return json{{"up_fraction", d.up_fraction},
              {"mean_u_n", d.mean_u_n},
              {"mean_w_n", d.mean_w_n},
              {"mean_theta_n", d.mean_theta_n},
              {"z_mean", d.z_mean}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string cmd_risk(const RunConfig& cfg) {
  const Solved s = solve(cfg, cfg.n());
  const double x = capital(cfg, s.price);
  const PolicyTable& pol = s.tables.policy;
  std::size_t stop_nodes = 0;
  std::size_t nodes = 0;
  for (int k = 0; k < pol.steps(); ++k) {
    for (std::size_t i = 0; i < pol.lattice().level_size(k); ++i) {
      ++nodes;
      if (!pol.node(k, i).seller_stop.empty()) ++stop_nodes;
    }
  }
  json out = header(cfg, s.model.n);
  out["x"] = x;
  out["risk"] = shortfall_risk(s.tables.values, x);
  out["price"] = s.price;
  out["seller_stop"] = {
      {"at_root", cfg.mode == OptionStyle::Game &&
                      (pol.steps() == 0 || pol.seller_stops(0, 0, x))},
      {"nodes_with_region", stop_nodes},
      {"nodes", nodes}};
  out["max_breaks_per_level"] = s.tables.values.max_breaks();
  return dump(out);
}

std::string cmd_price(const RunConfig& cfg) {
  const PayoffSpec spec = builtin(cfg.payoff_name, cfg.payoff_params);
  json rows = json::array();
  for (int n : cfg.n_list) {
    const CrrModel model = build_crr(cfg.market, n);
    const DiscretePayoffs payoffs = discretize(spec, model, cfg.layout);
    rows.push_back({{"n", n}, {"price", option_price(model, payoffs, cfg.mode)}});
  }
  return dump(json{{"payoff", cfg.payoff_name},
                   {"mode", to_string(cfg.mode)},
                   {"prices", rows}});
}

std::string cmd_curve(const RunConfig& cfg) {
  const Solved s = solve(cfg, cfg.n());
  std::vector<double> xs = cfg.x_grid;
  if (xs.empty()) {
    const double top = 1.25 * s.price;
    for (int i = 0; i < cfg.curve_points; ++i) {
      xs.push_back(top * i / (cfg.curve_points - 1));
    }
  }
  std::ostringstream os;
  os << "x,risk\n";
  for (double x : xs) {
    os << fmt_double(x) << ',' << fmt_double(shortfall_risk(s.tables.values, x))
       << '\n';
  }
  return os.str();
}

std::string cmd_converge(const RunConfig& cfg) {
  std::vector<Solved> runs;
  for (int n : cfg.n_list) runs.push_back(solve(cfg, n));
  // One capital for the whole sequence; a relative x refers to the finest n.
  const double x = capital(cfg, runs.back().price);
  std::ostringstream os;
  os << "n,x,risk,delta,envelope,price\n";
  double prev = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const int n = runs[i].model.n;
    const double risk = shortfall_risk(runs[i].tables.values, x);
    const double env = std::pow(n, -0.25) * std::pow(std::log(n), 0.75);
    os << n << ',' << fmt_double(x) << ',' << fmt_double(risk) << ',';
    if (i > 0) os << fmt_double(risk - prev);
    os << ',' << fmt_double(env) << ',' << fmt_double(runs[i].price) << '\n';
    prev = risk;
  }
  return os.str();
}

std::string cmd_replay(const RunConfig& cfg, std::string* summary) {
  const Solved s = solve(cfg, cfg.n());
  if (cfg.path.empty()) throw ConfigError("path: required for replay");
  if (static_cast<int>(cfg.path.size()) != s.model.n) {
    throw ConfigError("path: length " + std::to_string(cfg.path.size()) +
                      " does not match n = " + std::to_string(s.model.n));
  }
  if (cfg.buyer_step && (*cfg.buyer_step < 0 || *cfg.buyer_step > s.model.n)) {
    throw ConfigError("buyer_step: must lie in 0..n");
  }
  const double x = capital(cfg, s.price);
  const HedgeTrajectory traj = replay(s.model, s.payoffs, s.tables.policy, x,
                                      cfg.path, cfg.buyer_step);
  if (summary) {
    std::ostringstream ss;
    ss << "sigma=" << traj.sigma << " tau=" << traj.tau
       << " shortfall=" << fmt_double(traj.shortfall);
    if (traj.caller_shortfall) {
      ss << " buyer_step=" << *traj.caller_tau
         << " buyer_step_shortfall=" << fmt_double(*traj.caller_shortfall);
    }
    *summary = ss.str();
  }
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

std::string cmd_mc(const RunConfig& cfg) {
  const Solved s = solve(cfg, cfg.n());
  const double x = capital(cfg, s.price);
  const McEstimate est = mc_discrete_shortfall(s.model, s.payoffs,
                                               s.tables.policy, x, mc_options(cfg));
  json out = header(cfg, s.model.n);
  out["x"] = x;
  out["estimate"] = est.estimate;
  out["stderr"] = est.std_error;
  out["paths"] = est.paths;
  out["seed"] = cfg.seed;
  out["risk"] = shortfall_risk(s.tables.values, x);
  out["diagnostics"] = diagnostics_json(est.diagnostics);
  return dump(out);
}

std::string cmd_mc_diag(const RunConfig& cfg) {
  const Solved s = solve(cfg, cfg.n());
  const double x = capital(cfg, s.price);
  const McEstimate est = mc_continuous_diagnostic(
      s.model, s.spec, s.payoffs, s.tables.policy, x, mc_options(cfg));
  json out = header(cfg, s.model.n);
  out["x"] = x;
  out["estimate"] = est.estimate;
  out["stderr"] = est.std_error;
  out["label"] = est.label;
  out["buyer_rule"] = est.buyer_rule;
  out["paths"] = est.paths;
  out["seed"] = cfg.seed;
  out["risk"] = shortfall_risk(s.tables.values, x);
  out["diagnostics"] = diagnostics_json(est.diagnostics);
  return dump(out);
}

}  // namespace shortfall
