#include "warpfield/wavefront.hpp"

#include <algorithm>
#include <cmath>

#include "warpfield/fft.hpp"

namespace warpfield {

double BumpSpec::eval(const VecD& x) const {
  require(x.size() == center.size(), "bump: point dimension mismatch");
  require(radius > 0.0, "bump: radius must be positive");
  require(plateau >= 0.0 && plateau < 1.0, "bump: plateau fraction must lie in [0,1)");
  double r2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - center[i];
    r2 += dx * dx;
  }
  const double t = std::sqrt(r2) / radius;
  if (t >= 1.0) return 0.0;
  if (t <= plateau) return 1.0;
  // Gaussian-smoothed step across the transition band, shoulders at ±5 standard
  // units; the trimmed residuals at either glue point stay below 4e-13.
  const double m = 0.5 * (plateau + 1.0);
  const double s = (1.0 - plateau) / 10.0;
  return 0.5 * std::erfc((t - m) / s);
}

std::vector<double> FitRange::radii() const {
  require(t_min > 0.0 && t_min < t_max && count >= 2,
          "fit range: need 0 < t_min < t_max and at least two radii");
  std::vector<double> r(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    r[size_t(i)] = t_min * std::pow(t_max / t_min, double(i) / double(count - 1));
  return r;
}

FitRange default_fit_range(const GridDistribution& g) {
  const VecD delta = g.spacing();
  double nyq = PI / delta[0];
  for (double d : delta) nyq = std::min(nyq, PI / d);
  FitRange fr;
  fr.t_max = 0.45 * nyq;
  fr.t_min = fr.t_max / 10.0;
  return fr;
}

// ---- magnitude spectrum on the shifted DFT lattice -------------------------

namespace {

constexpr double UNDERFLOW_FLOOR = 1e-280;

struct Spectrum {
  int dim = 0;
  std::vector<int> res;
  VecD step;                // frequency lattice spacing per axis
  std::vector<double> mag;  // |û|, fftshifted so axis index l maps to (l - n/2)·step

  // multilinear interpolation at frequency q; throws past the lattice edge
  double sample(const VecD& q) const {
    std::vector<int> i0(static_cast<size_t>(dim));
    std::vector<double> fr(static_cast<size_t>(dim));
    for (int d = 0; d < dim; ++d) {
      const double c = q[size_t(d)] / step[size_t(d)] + double(res[size_t(d)]) / 2.0;
      if (c < 0.0 || c > double(res[size_t(d)] - 1))
        throw RangeError("directional spectrum: radius beyond the grid's Nyquist range");
      int i = int(std::floor(c));
      if (i >= res[size_t(d)] - 1) i = res[size_t(d)] - 2;
      i0[size_t(d)] = i;
      fr[size_t(d)] = c - double(i);
    }
    double v = 0.0;
    const int corners = 1 << dim;
    for (int bits = 0; bits < corners; ++bits) {
      double w = 1.0;
      size_t flat = 0;
      for (int d = 0; d < dim; ++d) {
        const int hi = (bits >> d) & 1;
        w *= hi ? fr[size_t(d)] : 1.0 - fr[size_t(d)];
        flat = flat * size_t(res[size_t(d)]) + size_t(i0[size_t(d)] + hi);
      }
      v += w * mag[flat];
    }
    return v;
  }
};

Spectrum build_spectrum(const GridDistribution& u_loc) {
  const GridDistribution g = u_loc.rasterized();
  std::vector<Complex> a = g.samples();
  fft::transform_nd(a, g.resolution(), +1);

  Spectrum sp;
  sp.dim = g.dimension();
  sp.res = g.resolution();
  const VecD delta = g.spacing();
  sp.step.resize(size_t(sp.dim));
  for (int d = 0; d < sp.dim; ++d)
    sp.step[size_t(d)] = 2.0 * PI / (double(sp.res[size_t(d)]) * delta[size_t(d)]);

  const double cv = g.cell_volume();
  sp.mag.assign(a.size(), 0.0);
  std::vector<int> idx(size_t(sp.dim), 0);
  for (size_t raw = 0; raw < a.size(); ++raw) {
    size_t shifted = 0;
    for (int d = 0; d < sp.dim; ++d) {
      const int n = sp.res[size_t(d)];
      shifted = shifted * size_t(n) + size_t((idx[size_t(d)] + n / 2) % n);
    }
    sp.mag[shifted] = cv * std::abs(a[raw]);
    for (int d = sp.dim - 1; d >= 0; --d) {
      if (++idx[size_t(d)] < sp.res[size_t(d)]) break;
      idx[size_t(d)] = 0;
    }
  }
  return sp;
}

DirectionalDecay classify_direction(const Spectrum& sp, const VecD& unit,
                                    const std::vector<double>& radii, const VecD& metric) {
  DirectionalDecay row;
  row.direction = unit;
  row.magnitudes.reserve(radii.size());
  VecD q(static_cast<size_t>(sp.dim));
  int floored = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double t : radii) {
    for (int d = 0; d < sp.dim; ++d) q[size_t(d)] = metric[size_t(d)] * t * unit[size_t(d)];
    const double v = sp.sample(q);
    row.magnitudes.push_back(v);
    row.peak = std::max(row.peak, v);
    const double vf = std::max(v, UNDERFLOW_FLOOR);
    if (v <= UNDERFLOW_FLOOR) ++floored;
    const double X = std::log(t), Y = std::log(vf);
    sx += X; sy += Y; sxx += X * X; sxy += X * Y;
  }
  const double n = double(radii.size());
  const double denom = n * sxx - sx * sx;
  row.n_fit = denom > 0.0 ? -(n * sxy - sx * sy) / denom : 0.0;
  row.underflowed = 2 * floored > int(radii.size());
  return row;
}

}  // namespace

std::vector<DirectionalDecay> directional_spectrum(const GridDistribution& u_loc,
                                                   const std::vector<VecD>& directions,
                                                   const std::vector<double>& radii,
                                                   const VecD& metric_diag) {
  require(!directions.empty(), "directional spectrum: no directions");
  require(radii.size() >= 2, "directional spectrum: need at least two radii");
  for (double t : radii) require(t > 0.0, "directional spectrum: radii must be positive");

  const Spectrum sp = build_spectrum(u_loc);
  VecD metric = metric_diag;
  if (metric.empty()) metric.assign(size_t(sp.dim), 1.0);
  require(int(metric.size()) == sp.dim,
          "directional spectrum: metric diagonal must match the dimension");

  std::vector<DirectionalDecay> out;
  out.reserve(directions.size());
  for (const VecD& dir : directions) {
    require(int(dir.size()) == sp.dim, "directional spectrum: direction dimension mismatch");
    const double len = norm2(dir);
    require(len > 0.0, "directional spectrum: zero direction");
    out.push_back(classify_direction(sp, vec_scale(1.0 / len, dir), radii, metric));
  }
  return out;
}

GridDistribution localize(const GridDistribution& u, const BumpSpec& bump) {
  require(int(bump.center.size()) == u.dimension(), "localize: bump dimension mismatch");
  require(bump.radius > 0.0, "localize: bump radius must be positive");
  for (int d = 0; d < u.dimension(); ++d) {
    const double reach =
        std::abs(bump.center[size_t(d)] - u.box().center[size_t(d)]) + bump.radius;
    if (reach > u.box().half_widths[size_t(d)] * (1.0 + 1e-12))
      throw DomainError("localize: bump support escapes the box");
  }

  if (u.kind() == GridKind::WeightedPointMasses) {
    std::vector<PointMass> scaled = u.masses();
    for (PointMass& m : scaled) m.weight *= bump.eval(m.location);
    return GridDistribution::point_masses(u.box(), u.resolution(), std::move(scaled));
  }

  std::vector<Complex> vals = u.samples();
  std::vector<int> idx(size_t(u.dimension()), 0);
  for (size_t flat = 0; flat < vals.size(); ++flat) {
    vals[flat] *= bump.eval(u.grid_point(idx));
    for (int d = u.dimension() - 1; d >= 0; --d) {
      if (++idx[size_t(d)] < u.resolution()[size_t(d)]) break;
      idx[size_t(d)] = 0;
    }
  }
  return GridDistribution::function_samples(u.box(), u.resolution(), std::move(vals));
}

std::vector<WavefrontEntry> WavefrontEstimate::singular_entries() const {
  std::vector<WavefrontEntry> out;
  for (const WavefrontEntry& e : entries)
    if (e.singular) out.push_back(e);
  return out;
}

WavefrontEstimate estimate_wavefront(const GridDistribution& u,
                                     const std::vector<VecD>& base_points,
                                     const std::vector<VecD>& directions,
                                     const WavefrontParams& params) {
  WavefrontParams p = params;
  if (p.bump_radius <= 0.0) {
    double h = u.box().half_widths[0];
    for (double v : u.box().half_widths) h = std::min(h, v);
    p.bump_radius = 0.25 * h;
  }
  if (p.fit.empty()) p.fit = default_fit_range(u);
  require(p.n_reg > 0.0, "wavefront: N_reg must be positive");
  require(!base_points.empty(), "wavefront: no base points");
  const std::vector<double> radii = p.fit.radii();

  WavefrontEstimate est;
  est.params = p;
  for (const VecD& x0 : base_points) {
    const BumpSpec bump{x0, p.bump_radius, p.bump_plateau};
    const GridDistribution loc = localize(u, bump).rasterized();
    double mass = 0.0;
    for (const Complex& z : loc.samples()) mass += std::abs(z);
    mass *= loc.cell_volume();

    for (const DirectionalDecay& row :
         directional_spectrum(loc, directions, radii, p.metric_diag)) {
      const bool decayed = row.underflowed || row.peak <= p.mass_floor * mass + 1e-300;
      est.entries.push_back(
          {x0, row.direction, row.n_fit, !decayed && row.n_fit < p.n_reg});
    }
  }
  return est;
}

std::vector<VecD> project_covectors(const WavefrontEstimate& wf) {
  std::vector<VecD> out;
  for (const WavefrontEntry& e : wf.entries) {
    if (!e.singular) continue;
    bool seen = false;
    for (const VecD& d : out) {
      double diff = 0.0;
      for (size_t i = 0; i < d.size(); ++i) diff = std::max(diff, std::abs(d[i] - e.direction[i]));
      if (diff < 1e-12) { seen = true; break; }
    }
    if (!seen) out.push_back(e.direction);
  }
  return out;
}

std::vector<VecD> direction_set(int dim, int count) {
  require(dim >= 1, "direction set: dimension must be at least 1");
  if (dim == 1) return {{1.0}, {-1.0}};
  if (dim == 2) {
    const int n = count > 0 ? count : 32;
    std::vector<VecD> out;
    out.reserve(size_t(n));
    for (int j = 0; j < n; ++j) {
      const double a = 2.0 * PI * double(j) / double(n);
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  // sphere product grid: polar angles on interior nodes, azimuth on a full circle
  const int total = count > 0 ? count : 64;
  const int m = std::max(2, int(std::ceil(std::pow(double(total), 1.0 / double(dim - 1)))));
  std::vector<VecD> out;
  std::vector<int> idx(size_t(dim - 1), 0);
  while (true) {
    VecD x(static_cast<size_t>(dim));
    double sin_prod = 1.0;
    for (int i = 0; i < dim - 1; ++i) {
      const double ang = (i < dim - 2)
                             ? PI * (double(idx[size_t(i)]) + 0.5) / double(m)
                             : 2.0 * PI * double(idx[size_t(i)]) / double(m);
      x[size_t(i)] = sin_prod * std::cos(ang);
      sin_prod *= std::sin(ang);
    }
    x[size_t(dim - 1)] = sin_prod;
    out.push_back(x);
    int d = dim - 2;
    for (; d >= 0; --d) {
      if (++idx[size_t(d)] < m) break;
      idx[size_t(d)] = 0;
    }
    if (d < 0) break;
  }
  return out;
}

}  // namespace warpfield
