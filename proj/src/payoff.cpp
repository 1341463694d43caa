#include "shortfall/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shortfall/error.hpp"

namespace shortfall {

double PathView::running_min() const {
  return *std::min_element(values.begin(), values.end());
}

double PathView::running_max() const {
  return *std::max_element(values.begin(), values.end());
}

namespace {

PayoffSpec::Functional constant_functional(double c) {
  return [c](double, const PathView&) { return c; };
}

double param(const std::map<std::string, double>& params, const char* key,
             const std::string& name) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw PayoffError("payoff '" + name + "' requires parameter '" + key + "'");
  }
  return it->second;
}

double param_or(const std::map<std::string, double>& params, const char* key,
                double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void require_nonneg(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) {
    throw PayoffError(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

PayoffSpec constant_payoff(double c, double delta) {
  require_nonneg(c, "constant level c");
  require_nonneg(delta, "penalty delta");
  PayoffSpec spec;
  spec.name = "constant";
  spec.low = constant_functional(c);
  spec.penalty = constant_functional(delta);
  spec.lipschitz = 1.0;
  spec.path_independent = true;
  return spec;
}

PayoffSpec game_put(double strike, double delta) {
  require_nonneg(strike, "strike K");
  require_nonneg(delta, "penalty delta");
  PayoffSpec spec;
  spec.name = "game_put_const_penalty";
  spec.low = [strike](double, const PathView& v) {
    return std::max(strike - v.last(), 0.0);
  };
  spec.penalty = constant_functional(delta);
  spec.lipschitz = 1.0;
  spec.path_independent = true;
  return spec;
}

PayoffSpec american_put(double strike) {
  PayoffSpec spec = game_put(strike, kAmericanPenaltyScale * strike);
  spec.name = "american_put";
  return spec;
}

PayoffSpec lookback_put(double strike, double delta) {
  require_nonneg(strike, "strike K");
  require_nonneg(delta, "penalty delta");
  PayoffSpec spec;
  spec.name = "lookback_put";
  spec.low = [strike](double, const PathView& v) {
    return std::max(strike - v.running_min(), 0.0);
  };
  spec.penalty = constant_functional(delta);
  spec.lipschitz = 1.0;
  spec.path_independent = false;
  return spec;
}

PayoffSpec floating_lookback(double delta) {
  require_nonneg(delta, "penalty delta");
  PayoffSpec spec;
  spec.name = "floating_lookback";
  spec.low = [](double, const PathView& v) {
    return v.running_max() - v.last();
  };
  spec.penalty = constant_functional(delta);
  spec.lipschitz = 2.0;
  spec.path_independent = false;
  return spec;
}

PayoffSpec builtin(const std::string& name,
                   const std::map<std::string, double>& params) {
  if (name == "constant") {
    return constant_payoff(param(params, "c", name),
                           param_or(params, "delta", 0.0));
  }
  if (name == "game_put_const_penalty") {
    return game_put(param(params, "K", name), param(params, "delta", name));
  }
  if (name == "american_put") return american_put(param(params, "K", name));
  if (name == "lookback_put") {
    return lookback_put(param(params, "K", name), param(params, "delta", name));
  }
  if (name == "floating_lookback") {
    return floating_lookback(param(params, "delta", name));
  }
  throw PayoffError("unknown payoff '" + name + "'");
}

double DiscretePayoffs::max_low() const {
  double m = 0.0;
  for (const auto& level : f) {
    for (double v : level) m = std::max(m, v);
  }
  return m;
}

void step_path(const CrrModel& model, std::span<const int> signs,
               std::vector<double>& times, std::vector<double>& values) {
  const int k = static_cast<int>(signs.size());
  times.resize(static_cast<std::size_t>(k) + 1);
  values.resize(static_cast<std::size_t>(k) + 1);
  int ups = 0;
  times[0] = 0.0;
  values[0] = model.params.S0;
  for (int j = 1; j <= k; ++j) {
    if (signs[static_cast<std::size_t>(j - 1)] > 0) ++ups;
    times[static_cast<std::size_t>(j)] = j * model.dt;
    values[static_cast<std::size_t>(j)] = model.stock_price(j, ups);
  }
}

DiscretePayoffs discretize(const PayoffSpec& spec, const CrrModel& model,
                           Layout layout) {
  bool recombined = spec.path_independent;
  if (layout == Layout::Full) recombined = false;
  if (layout == Layout::Recombined) {
    if (!spec.path_independent) {
      throw ParameterError("payoff '" + spec.name +
                           "' is path dependent; cannot recombine");
    }
    recombined = true;
  }
  DiscretePayoffs out;
  out.lattice = Lattice(model.n, recombined);
  out.name = spec.name;
  out.f.resize(static_cast<std::size_t>(model.n) + 1);
  out.g.resize(static_cast<std::size_t>(model.n) + 1);

  std::vector<double> times;
  std::vector<double> values;
  for (int k = 0; k <= model.n; ++k) {
    const std::size_t size = out.lattice.level_size(k);
    auto& fk = out.f[static_cast<std::size_t>(k)];
    auto& gk = out.g[static_cast<std::size_t>(k)];
    fk.resize(size);
    gk.resize(size);
    const double disc = model.discount_factor(k);
    const double t = k * model.dt;
    for (std::size_t idx = 0; idx < size; ++idx) {
      const std::vector<int> signs = out.lattice.signs(k, idx);
      step_path(model, signs, times, values);
      const PathView view{times, values};
      const double low = spec.low(t, view);
      const double pen = spec.penalty(t, view);
      if (!std::isfinite(low) || low < 0.0 || !std::isfinite(pen) ||
          pen < 0.0) {
        throw PayoffError("payoff '" + spec.name +
                          "' returned a negative or non-finite value");
      }
      fk[idx] = disc * low;
      gk[idx] = k == model.n ? fk[idx] : disc * (low + pen);
    }
  }
  return out;
}

}  // namespace shortfall
