#pragma once

#include <stdexcept>
#include <string>

namespace shortfall {

/// Invalid market or model parameters.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A payoff functional returned a value outside its contract (negative or
/// non-finite), or an unknown fixture was requested.
class PayoffError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trading rule proposed an exposure that could drive wealth negative.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulation or enumeration ran past its configured budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shortfall
