#pragma once

// Brute-force reference for the shortfall recursion on small trees. Shares no
// code with the library: its own CRR constants, its own payoff evaluation on
// every sign word, tabulated value functions on uniform wealth grids and a
// dense exposure grid at every wealth point.

#include <cstdint>
#include <vector>

namespace oracle {

struct Market {
  double r = 0.0;
  double kappa = 0.2;
  double mu = 0.02;
  double T = 1.0;
  double S0 = 100.0;
};

enum class Kind { Put, Lookback, Constant };

struct Fixture {
  Kind kind = Kind::Put;
  double K = 100.0;
  double delta = 0.0;
  double c = 0.0;
  bool american = false;  // buyer-only recursion, no cancellation
};

struct GridSpec {
  double y_spacing = 0.002;  // wealth table resolution
  int y_cap = 20000;         // most points per table
  int u_points = 10000;      // exposure grid on [-y/a1, -y/a2]
  int u_refine = 400;        // second pass around the best grid point
};

/// Option price at the root: Dynkin (or American) recursion under the
/// martingale probability.
double price(const Market& m, int n, const Fixture& fx);

/// J_0(x) for each x.
std::vector<double> risk(const Market& m, int n, const Fixture& fx,
                         const std::vector<double>& xs,
                         const GridSpec& grid = {});

/// The inner minimisation alone, for one-step checks: min over a dense
/// u-grid of p h1(y + u a1) + (1 - p) h2(y + u a2), with h given by samples
/// of a callable.
template <class H1, class H2>
double grid_min(const H1& h1, const H2& h2, double p, double a1, double a2,
                double y, int points) {
  if (y <= 0.0) return p * h1(0.0) + (1.0 - p) * h2(0.0);
  const double lo = -y / a1;
  const double hi = -y / a2;
  double best = 1e300;
  for (int i = 0; i < points; ++i) {
    const double u = lo + (hi - lo) * i / (points - 1);
    double z1 = y + u * a1;
    double z2 = y + u * a2;
    if (z1 < 0.0) z1 = 0.0;
    if (z2 < 0.0) z2 = 0.0;
    const double v = p * h1(z1) + (1.0 - p) * h2(z2);
    if (v < best) best = v;
  }
  return best;
}

}  // namespace oracle
