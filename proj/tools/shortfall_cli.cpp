// Command-line front end: shortfall_cli <command> --config run.json [options]

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shortfall/commands.hpp"
#include "shortfall/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> paths;
  std::optional<double> dt_fine;
  std::optional<int> n;
  std::optional<unsigned> threads;
  std::optional<double> x;
  std::string path;
};

shortfall::RunConfig build_config(const Overrides& o) {
  shortfall::RunConfig cfg;
  if (!o.config.empty()) cfg = shortfall::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.paths) cfg.paths = *o.paths;
  if (o.dt_fine) cfg.dt_fine = *o.dt_fine;
  if (o.n) cfg.n_list = {*o.n};
  if (o.threads) cfg.threads = *o.threads;
  if (o.x) {
    cfg.x = *o.x;
    cfg.x_rel.reset();
  }
  if (!o.path.empty()) cfg.path = shortfall::parse_path(o.path);
  shortfall::check_config(cfg);
  return cfg;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw shortfall::ConfigError("cannot write '" + out + "'");
  file << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shortfall-risk hedging of game and American options on CRR trees"};
  app.require_subcommand(1);
  Overrides o;

  using Runner = std::function<std::string(const shortfall::RunConfig&)>;
  const std::map<std::string, std::pair<std::string, Runner>> commands{
      {"risk", {"minimal shortfall risk J_0(x) and the option price",
                shortfall::cmd_risk}},
      {"price", {"discrete option price for each n", shortfall::cmd_price}},
      {"curve", {"risk curve over an x grid (CSV)", shortfall::cmd_curve}},
      {"converge", {"risk along an ascending n list (CSV)",
                    shortfall::cmd_converge}},
      {"replay", {"hedge trajectory along one sign path (CSV)",
                  [](const shortfall::RunConfig& c) {
                    std::string summary;
                    std::string csv = shortfall::cmd_replay(c, &summary);
                    std::cerr << summary << '\n';
                    return csv;
                  }}},
      {"mc", {"Monte Carlo shortfall on embedded paths",
              shortfall::cmd_mc}},
      {"mc-diag", {"restricted-adversary continuous-market diagnostic",
                   shortfall::cmd_mc_diag}},
  };
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--out", o.out, "write output here instead of stdout");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--paths", o.paths, "number of simulated paths");
    sub->add_option("--dt-fine", o.dt_fine, "fine Euler step");
    sub->add_option("--n", o.n, "number of binomial steps");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--x", o.x, "initial capital");
    sub->add_option("--path", o.path, "sign path for replay, e.g. uudd");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const shortfall::RunConfig cfg = build_config(o);
    for (const auto& [name, entry] : commands) {
      if (app.got_subcommand(name)) emit(entry.second(cfg), o.out);
    }
  } catch (const shortfall::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << '\n';
    return kExitBudget;
  } catch (const shortfall::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
