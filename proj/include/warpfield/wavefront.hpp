#pragma once

#include <vector>

#include "warpfield/grid.hpp"
#include "warpfield/util.hpp"

namespace warpfield {

// Flat-top radial bump: exactly 1 for |x - center| <= plateau·radius, an erfc
// shoulder across the transition band, exactly 0 outside radius. The shoulder
// is a Gaussian-smoothed step whose transform decays super-polynomially over
// any usable fit window; e^{-1/s}-class mollifier falloffs decay only like
// exp(-c·sqrt(t)) there and would read as a low-order singularity.
struct BumpSpec {
  VecD center;
  double radius = 1.0;
  double plateau = 0.5;  // fraction of the radius kept exactly 1

  double eval(const VecD& x) const;
};

struct FitRange {
  double t_min = 0.0;
  double t_max = 0.0;
  int count = 24;  // log-spaced radii

  bool empty() const { return !(t_max > 0.0); }
  std::vector<double> radii() const;
};

// One decade of radii ending safely below the grid's Nyquist frequency.
FitRange default_fit_range(const GridDistribution& g);

struct DirectionalDecay {
  VecD direction;                  // unit covector
  double n_fit = 0.0;              // −(log-log slope) of |û(t·ζ̂)| over the fit radii
  bool underflowed = false;        // more than half the samples hit the underflow floor
  double peak = 0.0;               // max sampled |û| over the fit radii
  std::vector<double> magnitudes;  // one per fit radius
};

struct WavefrontEntry {
  VecD base_point;
  VecD direction;  // unit covector
  double n_fit = 0.0;
  bool singular = false;  // n_fit < n_reg and the spectrum has not rapidly decayed
};

struct WavefrontParams {
  double bump_radius = 0.0;   // 0 -> quarter of the smallest box half-width
  double bump_plateau = 0.5;
  FitRange fit;               // empty -> default_fit_range of the grid
  double n_reg = 4.0;
  // Diagonal of the pairing form in the transform phase e^{iη(x,ζ)}, η = Σ g_i x_i ζ_i.
  // Empty means Euclidean; {1,-1} pairs spacetime grids with Minkowski covectors.
  VecD metric_diag;
  // Spectra whose peak over the fit radii falls below mass_floor · ∫|u_loc| have
  // decayed past any slope the fit could certify; they classify as regular.
  double mass_floor = 1e-13;
};

struct WavefrontEstimate {
  std::vector<WavefrontEntry> entries;  // every (base point, direction) pair
  WavefrontParams params;

  std::vector<WavefrontEntry> singular_entries() const;
};

// Pointwise product with the bump; point masses keep their kind, each weight
// scaled by the bump value at its location. The bump support must sit inside
// the box (periodization guard).
GridDistribution localize(const GridDistribution& u, const BumpSpec& bump);

// Magnitude spectrum |û(t·ζ̂)| of the localized distribution, û(ζ) = cellvol ·
// Σ_x u(x) e^{iη(x,ζ)}, sampled by multilinear interpolation on the DFT lattice,
// with a log-log decay fit per direction. Radii beyond the lattice range throw.
std::vector<DirectionalDecay> directional_spectrum(const GridDistribution& u_loc,
                                                   const std::vector<VecD>& directions,
                                                   const std::vector<double>& radii,
                                                   const VecD& metric_diag = {});

WavefrontEstimate estimate_wavefront(const GridDistribution& u,
                                     const std::vector<VecD>& base_points,
                                     const std::vector<VecD>& directions,
                                     const WavefrontParams& params = {});

// Deduplicated unit covectors appearing in any singular entry.
std::vector<VecD> project_covectors(const WavefrontEstimate& wf);

// Uniform direction sets: ±1 in 1D, angular grid in 2D (default 32), spherical
// product grid in higher dimension (default 64). count = 0 picks the default.
std::vector<VecD> direction_set(int dim, int count = 0);

}  // namespace warpfield
