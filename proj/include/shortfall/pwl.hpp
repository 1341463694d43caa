#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace shortfall {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi]; hi may be +inf.
struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool contains(double y, double slack = 0.0) const {
    return y >= lo - slack && y <= hi + slack;
  }
};

/// Continuous, nonincreasing, nonnegative piecewise-linear function of wealth
/// y >= 0. Linear between breaks, constant after the last break.
///
/// The constructor checks the invariants. Violations within a relative
/// rounding tolerance are repaired (values clamped to be monotone and >= 0);
/// anything larger throws std::invalid_argument.
class PwlFn {
 public:
  /// The zero function.
  PwlFn();
  PwlFn(std::vector<double> breaks, std::vector<double> values);

  /// y -> (c - y)^+. Throws std::invalid_argument for c < 0.
  static PwlFn hinge(double level);

  /// Throws std::invalid_argument for y < 0.
  double operator()(double y) const;
  double eval(double y) const { return (*this)(y); }

  std::span<const double> breaks() const { return breaks_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return breaks_.size(); }
  double at_zero() const { return values_.front(); }
  double tail() const { return values_.back(); }
  /// Largest break; the function is constant beyond it.
  double support_end() const { return breaks_.back(); }

  bool operator==(const PwlFn&) const = default;

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

PwlFn pointwise_min(const PwlFn& f, const PwlFn& g);
PwlFn pointwise_max(const PwlFn& f, const PwlFn& g);

/// Where the maximal exposure candidate comes from.
enum class CandidateKind {
  LeftEndpoint,    // u = -y/a1: up-state wealth is zero
  RightEndpoint,   // u = -y/a2: down-state wealth is zero
  UpBreakpoint,    // up-state wealth sits on a break of the up function
  DownBreakpoint,  // down-state wealth sits on a break of the down function
  InteriorFlat,    // lower edge of a flat stretch of the objective
};

const char* to_string(CandidateKind kind);

/// Exposure rule u(y) = alpha + beta y on y in [lo, hi].
struct AffinePolicyPiece {
  double lo = 0.0;
  double hi = kInf;
  double alpha = 0.0;
  double beta = 0.0;
  CandidateKind kind = CandidateKind::LeftEndpoint;

  double exposure(double y) const { return alpha + beta * y; }
};

/// Feasible exposures from wealth y: [-y/a1, -y/a2].
inline Interval exposure_bounds(double y, double a1, double a2) {
  return {-y / a1, -y / a2};
}

struct BellmanResult {
  PwlFn value;
  std::vector<AffinePolicyPiece> policy;
};

/// psi(y) = min over u in [-y/a1, -y/a2] of
///   p up(y + u a1) + (1 - p) down(y + u a2),
/// computed exactly as the lower envelope of the vertex candidates (both
/// endpoints and every break of either function), or by the convex shortcut
/// when both inputs are convex. The policy holds, on each maximal y-interval,
/// the smallest minimising u.
BellmanResult bellman_compose(const PwlFn& up, const PwlFn& down, double p,
                              double a1, double a2);

/// True when the slopes never decrease (within a relative rounding slack).
bool is_convex(const PwlFn& f);

/// Envelope construction for arbitrary inputs.
BellmanResult bellman_compose_envelope(const PwlFn& up, const PwlFn& down,
                                       double p, double a1, double a2);

/// Convex inputs only: psi is the infimal convolution of the two scaled
/// functions along the budget line, built by merging their slope sequences.
/// Same result and tie rule as the envelope, in linear time.
BellmanResult bellman_compose_convex(const PwlFn& up, const PwlFn& down,
                                     double p, double a1, double a2);

/// Looks up u(y) in a piece list covering [0, inf). On a shared boundary the
/// smaller exposure wins; the result is clamped into [-y/a1, -y/a2].
double policy_exposure(std::span<const AffinePolicyPiece> pieces, double y,
                       double a1, double a2);

/// True when every piece keeps u(y) inside [-y/a1, -y/a2] at both ends (and
/// asymptotically for an unbounded last piece), within `tol` relative.
bool policy_feasible(std::span<const AffinePolicyPiece> pieces, double a1,
                     double a2, double tol = 1e-9);

/// Intervals of y >= 0 on which a(y) <= b(y) + tol.
std::vector<Interval> region_le(const PwlFn& a, const PwlFn& b, double tol);

/// Membership test for a sorted, disjoint interval list.
bool in_region(std::span<const Interval> region, double y, double slack = 0.0);

}  // namespace shortfall
