#pragma once

#include <array>

#include "warpfield/util.hpp"

namespace warpfield::quad {

// Gauss-Legendre nodes/weights on [-1, 1].
struct GaussRule {
  VecD nodes, weights;
};

GaussRule gauss_legendre(int n);

// 1-d composite grid: panels over [a, b], Gauss rule per panel.
struct Grid1D {
  VecD nodes, weights;
  size_t size() const { return nodes.size(); }
};

// uniform panels of width <= panel_width
Grid1D panel_grid(double a, double b, double panel_width, int order);

// panels split at the given interior breakpoints; panels adjacent to a breakpoint marked
// singular use the substitution x = s ± t² (integrable algebraic singularities like |x|^{-1/2})
struct Panel1DSpec {
  double a = -1, b = 1;
  double panel_width = 0.25;
  int order = 12;
  VecD split_points;             // interior breakpoints
  VecD sqrt_singular_points;     // subset of split points needing the sqrt substitution
};
Grid1D panel_grid_singular(const Panel1DSpec& spec);

// trapezoid rule on the circle of radius r: returns angle nodes (uniform), weight = 2πr/n each
struct CircleRule {
  VecD angles;
  double weight;  // arc-length weight per node
};
CircleRule circle_rule(double radius, int n);

// product rule on S³ ⊂ ℝ⁴ of radius r: hyperspherical angles
//   x = r(cos a, sin a cos b, sin a sin b cos c, sin a sin b sin c),
//   dσ = r³ sin²a sin b da db dc, a,b ∈ [0,π] (Gauss), c ∈ [0,2π) (trapezoid)
struct Sphere3Rule {
  std::vector<std::array<double, 4>> points;  // on the sphere of given radius
  VecD weights;                               // surface measure weights
};
Sphere3Rule sphere3_rule(double radius, int n_a, int n_b, int n_c);

// adaptive 1-d integration of a smooth complex integrand (panel doubling until stable)
Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           double tol, int order = 12, int max_doublings = 10);

}  // namespace warpfield::quad
