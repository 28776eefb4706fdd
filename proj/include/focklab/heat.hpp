#pragma once

// Heat transform g^{(t)}(x) = (4 pi t)^{-1} int g(y) e^{-|x-y|^2/(4t)} dA(y) of a
// radial symbol, via the Bessel-reduced radial integral. The 2-D convolution
// is never formed.

#include <algorithm>
#include <vector>

#include "focklab/radial.hpp"
#include "focklab/symbols.hpp"

namespace focklab {

struct HeatParams {
  double t = 0.25;
  void validate() const {
    if (!(t > 0.0)) throw ValidationError("heat: t must be positive");
  }
};

inline constexpr double kDefaultTol = 1e-10;

/// Full result including tail certificate and quadrature status.
inline RadialResult heat_transform_detail(const RadialSymbol& g, double t, double x, double tol = kDefaultTol) {
  return integrate_symbol(g, RadialKernel::heat(t, x), tol);
}

/// g^{(t)}(x). Throws DivergentError when the defining integral diverges.
inline double heat_transform_radial(const RadialSymbol& g, double t, double x, double tol = kDefaultTol) {
  const auto r = heat_transform_detail(g, t, x, tol);
  if (r.divergent()) throw DivergentError("heat transform diverges for symbol '" + g.name() + "'");
  return r.value;
}

/// (4 pi t)^{-1} ||g||_1, using the certified upper L1 mass.
inline double heat_sup_bound(const RadialSymbol& g, double t) {
  HeatParams{t}.validate();
  const auto m = l1_norm_area(g);
  return m.upper() / (4.0 * std::numbers::pi * t);
}

/// True iff g^{(t)} is non-increasing along the sorted grid (1e-10 slack).
/// Meaningful only for radially non-increasing symbols.
inline bool heat_monotonicity_check(const RadialSymbol& g, double t, std::vector<double> grid,
                                    double tol = kDefaultTol) {
  std::sort(grid.begin(), grid.end());
  double prev = kInf;
  for (double x : grid) {
    const double v = heat_transform_radial(g, t, x, tol);
    if (v > prev + 1e-10 * std::max(1.0, std::abs(prev))) return false;
    prev = v;
  }
  return true;
}

/// Geometric-plus-linear grid on [0, r_max]: dense near the origin where
/// singular power pieces peak, uniform further out.
inline std::vector<double> heat_sup_grid(double r_max, int linear_points = 200, int geometric_points = 40) {
  std::vector<double> grid{0.0};
  const double r0 = std::min(1e-3, r_max / 10.0);
  const double first_linear = r_max / linear_points;
  for (int i = 0; i < geometric_points; ++i) {
    const double r = r0 * std::pow(first_linear / r0, double(i) / geometric_points);
    if (r < first_linear) grid.push_back(r);
  }
  for (int i = 1; i <= linear_points; ++i) grid.push_back(r_max * i / linear_points);
  return grid;
}

}  // namespace focklab
