#pragma once

#include <string>

#include "shortfall/config.hpp"

namespace shortfall {

// Each command returns the text it would print. JSON for risk, price, mc and
// mc-diag; CSV for curve, converge and replay.

std::string cmd_risk(const RunConfig& config);
std::string cmd_price(const RunConfig& config);
std::string cmd_curve(const RunConfig& config);
std::string cmd_converge(const RunConfig& config);
/// `summary` receives sigma, tau and the realised shortfall.
std::string cmd_replay(const RunConfig& config, std::string* summary = nullptr);
std::string cmd_mc(const RunConfig& config);
std::string cmd_mc_diag(const RunConfig& config);

}  // namespace shortfall
