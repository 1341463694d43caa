#include "shortfall/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "shortfall/error.hpp"

namespace shortfall {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(where + it.key() + ": unknown field");
    }
  }
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return v.get<double>();
}

long long integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
  return v.get<long long>();
}

std::uint64_t count(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const long long i = integer(v, field);
  if (i < 0) throw ConfigError(field + ": must be >= 0");
  return static_cast<std::uint64_t>(i);
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field + ": expected a string");
  return v.get<std::string>();
}

void parse_market(const json& m, MarketParams& out) {
  if (!m.is_object()) throw ConfigError("market: expected an object");
  reject_unknown(m, "market.", {"r", "kappa", "mu", "T", "S0", "b0"});
  if (m.contains("r")) out.r = number(m["r"], "market.r");
  if (m.contains("kappa")) out.kappa = number(m["kappa"], "market.kappa");
  if (m.contains("mu")) out.mu = number(m["mu"], "market.mu");
  if (m.contains("T")) out.T = number(m["T"], "market.T");
  if (m.contains("S0")) out.S0 = number(m["S0"], "market.S0");
  if (m.contains("b0")) out.b0 = number(m["b0"], "market.b0");
}

void parse_payoff(const json& p, RunConfig& out) {
  if (!p.is_object()) throw ConfigError("payoff: expected an object");
  reject_unknown(p, "payoff.", {"name", "K", "delta", "c"});
  if (!p.contains("name")) throw ConfigError("payoff.name: missing");
  out.payoff_name = text(p["name"], "payoff.name");
  out.payoff_params.clear();
  for (const char* key : {"K", "delta", "c"}) {
    if (p.contains(key)) {
      out.payoff_params[key] = number(p[key], std::string("payoff.") + key);
    }
  }
}

std::string line_column(const std::string& doc, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < doc.size(); ++i) {
    if (doc[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::vector<int> parse_path(const std::string& s) {
  std::vector<int> out;
  out.reserve(s.size());
  for (char ch : s) {
    if (ch == 'u' || ch == 'U' || ch == '+') {
      out.push_back(1);
    } else if (ch == 'd' || ch == 'D' || ch == '-') {
      out.push_back(-1);
    } else {
      throw ConfigError(std::string("path: unexpected character '") + ch +
                        "' (use u/d or +/-)");
    }
  }
  return out;
}

RunConfig parse_config(const std::string& doc) {
  json root;
  try {
    root = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw ConfigError("config syntax error at " + line_column(doc, e.byte) +
                      ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(root, "",
                 {"market", "payoff", "mode", "layout", "n", "n_list", "x",
                  "x_rel", "x_grid", "curve_points", "path", "buyer_step",
                  "paths", "seed", "dt_fine", "threads"});
  RunConfig cfg;
  if (root.contains("market")) parse_market(root["market"], cfg.market);
  if (root.contains("payoff")) parse_payoff(root["payoff"], cfg);
  if (root.contains("mode")) {
    const std::string mode = text(root["mode"], "mode");
    if (mode == "game") {
      cfg.mode = OptionStyle::Game;
    } else if (mode == "american") {
      cfg.mode = OptionStyle::American;
    } else {
      throw ConfigError("mode: expected \"game\" or \"american\"");
    }
  }
  if (root.contains("layout")) {
    const std::string layout = text(root["layout"], "layout");
    if (layout == "auto") {
      cfg.layout = Layout::Auto;
    } else if (layout == "full") {
      cfg.layout = Layout::Full;
    } else if (layout == "recombined") {
      cfg.layout = Layout::Recombined;
    } else {
      throw ConfigError("layout: expected auto, full or recombined");
    }
  }
  if (root.contains("n") && root.contains("n_list")) {
    throw ConfigError("n_list: give either n or n_list");
  }
  if (root.contains("n")) cfg.n_list = {static_cast<int>(integer(root["n"], "n"))};
  if (root.contains("n_list")) {
    const json& list = root["n_list"];
    if (!list.is_array() || list.empty()) {
      throw ConfigError("n_list: expected a nonempty array");
    }
    cfg.n_list.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.n_list.push_back(static_cast<int>(
          integer(list[i], "n_list[" + std::to_string(i) + "]")));
    }
  }
  if (root.contains("x") && root.contains("x_rel")) {
    throw ConfigError("x_rel: give either x or x_rel");
  }
  if (root.contains("x")) cfg.x = number(root["x"], "x");
  if (root.contains("x_rel")) cfg.x_rel = number(root["x_rel"], "x_rel");
  if (root.contains("x_grid")) {
    const json& list = root["x_grid"];
    if (!list.is_array()) throw ConfigError("x_grid: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.x_grid.push_back(number(list[i], "x_grid[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("curve_points")) {
    cfg.curve_points =
        static_cast<int>(integer(root["curve_points"], "curve_points"));
  }
  if (root.contains("path")) {
    const json& p = root["path"];
    if (p.is_string()) {
      cfg.path = parse_path(p.get<std::string>());
    } else if (p.is_array()) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const long long s = integer(p[i], "path[" + std::to_string(i) + "]");
        if (s != 1 && s != -1) {
          throw ConfigError("path[" + std::to_string(i) + "]: expected +1 or -1");
        }
        cfg.path.push_back(static_cast<int>(s));
      }
    } else {
      throw ConfigError("path: expected a string or an array of +1/-1");
    }
  }
  if (root.contains("buyer_step")) {
    cfg.buyer_step = static_cast<int>(integer(root["buyer_step"], "buyer_step"));
  }
  if (root.contains("paths")) cfg.paths = count(root["paths"], "paths");
  if (root.contains("seed")) cfg.seed = count(root["seed"], "seed");
  if (root.contains("dt_fine")) cfg.dt_fine = number(root["dt_fine"], "dt_fine");
  if (root.contains("threads")) {
    cfg.threads = static_cast<unsigned>(count(root["threads"], "threads"));
  }
  check_config(cfg);
  return cfg;
}

RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void check_config(const RunConfig& cfg) {
  try {
    validate(cfg.market);
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("market: ") + e.what());
  }
  try {
    (void)builtin(cfg.payoff_name, cfg.payoff_params);
  } catch (const PayoffError& e) {
    throw ConfigError(std::string("payoff: ") + e.what());
  }
  for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
    if (cfg.n_list[i] < 1) throw ConfigError("n: must be >= 1");
    if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1]) {
      throw ConfigError("n_list: must be strictly ascending");
    }
  }
  if (cfg.x && !(*cfg.x >= 0.0)) throw ConfigError("x: must be >= 0");
  if (cfg.x_rel && !(*cfg.x_rel >= 0.0)) throw ConfigError("x_rel: must be >= 0");
  for (double v : cfg.x_grid) {
    if (!(v >= 0.0)) throw ConfigError("x_grid: values must be >= 0");
  }
  if (cfg.curve_points < 2) throw ConfigError("curve_points: must be >= 2");
  if (cfg.dt_fine < 0.0) throw ConfigError("dt_fine: must be >= 0");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
}

}  // namespace shortfall
