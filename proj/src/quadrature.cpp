#include "warpfield/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

namespace warpfield::quad {

GaussRule gauss_legendre(int n) {
  require(n >= 1 && n <= 256, "gauss_legendre: order out of range");
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on P_n from Chebyshev-like initial guesses
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(PI * (i + 0.75) / (n + 0.5));
    double pp = 0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  cache[n] = r;
  return r;
}

Grid1D panel_grid(double a, double b, double panel_width, int order) {
  require(b > a, "panel_grid: empty interval");
  require(panel_width > 0, "panel_grid: bad panel width");
  int n_panels = std::max(1, int(std::ceil((b - a) / panel_width)));
  // guard against absurd grids
  require(n_panels <= 2'000'000, "panel_grid: too many panels");
  GaussRule g = gauss_legendre(order);
  Grid1D grid;
  grid.nodes.reserve(size_t(n_panels) * order);
  grid.weights.reserve(size_t(n_panels) * order);
  double w = (b - a) / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    double lo = a + p * w, mid = lo + 0.5 * w, half = 0.5 * w;
    for (int i = 0; i < order; ++i) {
      grid.nodes.push_back(mid + half * g.nodes[i]);
      grid.weights.push_back(half * g.weights[i]);
    }
  }
  return grid;
}

Grid1D panel_grid_singular(const Panel1DSpec& spec) {
  VecD cuts;
  cuts.push_back(spec.a);
  for (double s : spec.split_points)
    if (s > spec.a && s < spec.b) cuts.push_back(s);
  cuts.push_back(spec.b);
  std::sort(cuts.begin(), cuts.end());

  auto is_singular = [&](double x) {
    for (double s : spec.sqrt_singular_points)
      if (std::abs(x - s) < 1e-14) return true;
    return false;
  };

  GaussRule g = gauss_legendre(spec.order);
  Grid1D grid;
  for (size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    bool sing_lo = is_singular(lo), sing_hi = is_singular(hi);
    if (!sing_lo && !sing_hi) {
      Grid1D sub = panel_grid(lo, hi, spec.panel_width, spec.order);
      grid.nodes.insert(grid.nodes.end(), sub.nodes.begin(), sub.nodes.end());
      grid.weights.insert(grid.weights.end(), sub.weights.begin(), sub.weights.end());
      continue;
    }
    // substitution x = s + t² (or s - t²) maps [0, sqrt(len)] in t; dx = 2t dt
    double len = hi - lo;
    double tmax = std::sqrt(len);
    int n_panels = std::max(2, int(std::ceil(tmax / std::sqrt(spec.panel_width))));
    double tw = tmax / n_panels;
    for (int p = 0; p < n_panels; ++p) {
      double tlo = p * tw, tmid = tlo + 0.5 * tw, th = 0.5 * tw;
      for (int i = 0; i < spec.order; ++i) {
        double t = tmid + th * g.nodes[i];
        double w = th * g.weights[i] * 2.0 * t;
        double x = sing_lo ? lo + t * t : hi - t * t;
        grid.nodes.push_back(x);
        grid.weights.push_back(w);
      }
    }
  }
  return grid;
}

CircleRule circle_rule(double radius, int n) {
  require(radius > 0 && n >= 4, "circle_rule: bad arguments");
  CircleRule r;
  r.angles.resize(n);
  for (int i = 0; i < n; ++i) r.angles[i] = 2 * PI * i / n;
  r.weight = 2 * PI * radius / n;
  return r;
}

Sphere3Rule sphere3_rule(double radius, int n_a, int n_b, int n_c) {
  GaussRule ga = gauss_legendre(n_a), gb = gauss_legendre(n_b);
  Sphere3Rule r;
  double r3 = radius * radius * radius;
  for (int i = 0; i < n_a; ++i) {
    double a = PI * 0.5 * (ga.nodes[i] + 1.0);
    double wa = PI * 0.5 * ga.weights[i];
    double sa = std::sin(a), ca = std::cos(a);
    for (int j = 0; j < n_b; ++j) {
      double b = PI * 0.5 * (gb.nodes[j] + 1.0);
      double wb = PI * 0.5 * gb.weights[j];
      double sb = std::sin(b), cb = std::cos(b);
      for (int k = 0; k < n_c; ++k) {
        double c = 2 * PI * k / n_c;
        double wc = 2 * PI / n_c;
        r.points.push_back({radius * ca, radius * sa * cb, radius * sa * sb * std::cos(c),
                            radius * sa * sb * std::sin(c)});
        r.weights.push_back(r3 * sa * sa * sb * wa * wb * wc);
      }
    }
  }
  return r;
}

Complex integrate_adaptive(const std::function<Complex(double)>& f, double a, double b,
                           double tol, int order, int max_doublings) {
  int n_panels = 2;
  Complex prev = 0;
  GaussRule g = gauss_legendre(order);
  for (int d = 0; d <= max_doublings; ++d) {
    Complex acc = 0;
    double w = (b - a) / n_panels;
    for (int p = 0; p < n_panels; ++p) {
      double lo = a + p * w, mid = lo + 0.5 * w, half = 0.5 * w;
      for (int i = 0; i < order; ++i) acc += half * g.weights[i] * f(mid + half * g.nodes[i]);
    }
    if (d > 0 && std::abs(acc - prev) <= tol * std::max(1.0, std::abs(acc))) return acc;
    prev = acc;
    n_panels *= 2;
  }
  return prev;
}

}  // namespace warpfield::quad
