#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shortfall/market.hpp"
#include "shortfall/payoff.hpp"
#include "shortfall/risk.hpp"

namespace shortfall {

struct RunConfig {
  MarketParams market;
  std::string payoff_name = "game_put_const_penalty";
  std::map<std::string, double> payoff_params{{"K", 100.0}, {"delta", 2.0}};
  OptionStyle mode = OptionStyle::Game;
  Layout layout = Layout::Auto;

  std::vector<int> n_list{8};
  /// Capital: absolute, or relative to the option price V_n^* of each n.
  std::optional<double> x;
  std::optional<double> x_rel;
  std::vector<double> x_grid;
  int curve_points = 41;

  std::vector<int> path;  // replay signs
  std::optional<int> buyer_step;

  std::uint64_t paths = 100000;
  std::uint64_t seed = 1;
  double dt_fine = 0.0;
  unsigned threads = 1;

  int n() const { return n_list.front(); }
};

/// Parses a JSON document. Unknown keys and type mismatches raise ConfigError
/// naming the field; syntax errors report line and column.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& file);

/// Checks the semantic constraints (n >= 1, x >= 0, ascending n list, known
/// payoff, valid market). Throws ConfigError.
void check_config(const RunConfig& config);

/// Parses a path given as "udu..." or "+-+...". Throws ConfigError.
std::vector<int> parse_path(const std::string& text);

}  // namespace shortfall
