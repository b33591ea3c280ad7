#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "warpfield/fft.hpp"
#include "warpfield/grid.hpp"
#include "warpfield/wavefront.hpp"

using namespace warpfield;

namespace {

// O(n²) reference transform with the same e^{sign·2πi jm/n} kernel
std::vector<Complex> direct_dft(const std::vector<Complex>& a, int sign) {
  const size_t n = a.size();
  std::vector<Complex> out(n, Complex{0.0, 0.0});
  for (size_t m = 0; m < n; ++m)
    for (size_t j = 0; j < n; ++j)
      out[m] += a[j] * std::polar(1.0, double(sign) * 2.0 * PI * double(j * m % n) / double(n));
  return out;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// composite Simpson for the continuum transform of the localized Heaviside,
// û(t) = ∫₀^r bump(x) e^{itx} dx
Complex jump_transform_oracle(const BumpSpec& bump, double t) {
  const double a = 0.0, b = bump.radius;
  const int n = 4096;  // even
  const double h = (b - a) / n;
  Complex s{0.0, 0.0};
  for (int i = 0; i <= n; ++i) {
    const double x = a + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    s += w * bump.eval({x}) * std::polar(1.0, t * x);
  }
  return s * (h / 3.0);
}

GridDistribution heaviside_grid(int n = 1024) {
  return GridDistribution::sample(GridBox{{0.0}, {1.0}}, {n}, [](const VecD& x) {
    return Complex(x[0] >= 0.0 ? 1.0 : 0.0, 0.0);
  });
}

}  // namespace

TEST_CASE("radix-2 transform matches the direct DFT and inverts") {
  std::vector<Complex> a;
  for (int j = 0; j < 16; ++j)
    a.push_back(Complex(std::sin(0.7 * j + 0.3), std::cos(1.9 * j)));

  for (int sign : {+1, -1}) {
    auto fast = a;
    fft::transform(fast, sign);
    auto slow = direct_dft(a, sign);
    for (size_t m = 0; m < a.size(); ++m)
      CHECK(std::abs(fast[m] - slow[m]) < 1e-12);
  }

  auto round = a;
  fft::transform(round, +1);
  fft::transform(round, -1);
  for (size_t j = 0; j < a.size(); ++j)
    CHECK(std::abs(round[j] / double(a.size()) - a[j]) < 1e-13);

  // a pure lattice mode e^{+2πi j m₀ / n} lands in bin n - m₀ under the +1 kernel
  std::vector<Complex> mode(32);
  const int m0 = 5;
  for (int j = 0; j < 32; ++j) mode[size_t(j)] = std::polar(1.0, 2.0 * PI * j * m0 / 32.0);
  fft::transform(mode, +1);
  CHECK(std::abs(mode[32 - m0] - Complex(32.0, 0.0)) < 1e-12);
  CHECK(std::abs(mode[m0]) < 1e-12);

  CHECK_THROWS_AS(
      [] {
        std::vector<Complex> bad(12);
        fft::transform(bad, +1);
      }(),
      InvalidArgumentError);
}

TEST_CASE("multi-axis transform agrees with axis-by-axis lines") {
  const int n0 = 8, n1 = 4;
  std::vector<Complex> a(size_t(n0 * n1));
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      a[size_t(i * n1 + j)] = Complex(0.1 * i - 0.2 * j, std::sin(double(i * j)));

  auto fast = a;
  fft::transform_nd(fast, {n0, n1}, +1);

  // rows first, then columns, via the 1D reference
  std::vector<Complex> slow = a;
  for (int i = 0; i < n0; ++i) {
    std::vector<Complex> row(slow.begin() + i * n1, slow.begin() + (i + 1) * n1);
    row = direct_dft(row, +1);
    std::copy(row.begin(), row.end(), slow.begin() + i * n1);
  }
  for (int j = 0; j < n1; ++j) {
    std::vector<Complex> col(static_cast<size_t>(n0));
    for (int i = 0; i < n0; ++i) col[size_t(i)] = slow[size_t(i * n1 + j)];
    col = direct_dft(col, +1);
    for (int i = 0; i < n0; ++i) slow[size_t(i * n1 + j)] = col[size_t(i)];
  }
  for (size_t k = 0; k < a.size(); ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-12);
}

TEST_CASE("grid construction enforces the declared invariants") {
  const GridBox box{{2.0, 1.0}, {2.0, 2.0}};

  CHECK_THROWS_AS(GridDistribution::function_samples(box, {32, 17}, {}), InvalidArgumentError);
  CHECK_THROWS_AS(GridDistribution::function_samples(box, {32, 8}, {}), InvalidArgumentError);
  CHECK_THROWS_AS(GridDistribution::function_samples(box, {32, 16}, std::vector<Complex>(100)),
                  InvalidArgumentError);
  CHECK_THROWS_AS(GridDistribution::function_samples(GridBox{{0.0}, {0.0}}, {32},
                                                     std::vector<Complex>(32)),
                  InvalidArgumentError);
  {
    std::vector<Complex> bad(32 * 16, Complex{0.0, 0.0});
    bad[7] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(GridDistribution::function_samples(box, {32, 16}, bad), InvalidArgumentError);
  }
  CHECK_THROWS_AS(GridDistribution::point_masses(box, {32, 16}, {{{10.0, 1.0}, 1.0}}),
                  DomainError);

  // box [0,4] × [-1,3], res 32 × 16
  auto g = GridDistribution::function_samples(box, {32, 16},
                                              std::vector<Complex>(32 * 16, Complex{1.0, 0.0}));
  CHECK(g.spacing()[0] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(g.spacing()[1] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(g.cell_volume() == doctest::Approx(0.03125).epsilon(1e-14));
  auto p = g.grid_point({0, 0});
  CHECK(p[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(-1.0).epsilon(1e-14));
  p = g.grid_point({16, 8});
  CHECK(p[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(g.contains({3.9, 2.9}));
  CHECK_FALSE(g.contains({4.1, 0.0}));
}

TEST_CASE("point masses rasterize to nearest-cell spikes") {
  const GridBox box{{0.0}, {1.0}};
  // Δ = 0.125; x = 0.25 is grid index 10
  auto g = GridDistribution::point_masses(box, {16},
                                          {{{0.25}, Complex(2.0, 1.0)}, {{0.26}, Complex(1.0, 0.0)}});
  auto r = g.rasterized();
  CHECK(r.kind() == GridKind::FunctionSamples);
  const double cv = 0.125;
  CHECK(std::abs(r.samples()[10] - Complex(3.0, 1.0) / cv) < 1e-12);
  for (int j = 0; j < 16; ++j)
    if (j != 10) CHECK(std::abs(r.samples()[size_t(j)]) == 0.0);
  // already-rasterized grids pass through unchanged
  auto rr = r.rasterized();
  CHECK(rr.samples() == r.samples());
}

TEST_CASE("serialization round-trips through the sidecar pair") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();

  {
    std::vector<Complex> samples(size_t(16 * 32));
    for (size_t i = 0; i < samples.size(); ++i)
      samples[i] = Complex(std::sin(0.01 * double(i)), std::cos(0.02 * double(i)));
    auto g = GridDistribution::function_samples(GridBox{{0.5, -1.0}, {2.0, 3.0}}, {16, 32},
                                                samples);
    const std::string sidecar = (dir / "wf_grid_fn.json").string();
    write_grid(g, sidecar);
    CHECK(fs::file_size(dir / "wf_grid_fn.bin") == 8 * 16 * 32);

    auto h = read_grid(sidecar);
    CHECK(h.kind() == GridKind::FunctionSamples);
    CHECK(h.resolution() == g.resolution());
    CHECK(h.box().center == g.box().center);
    CHECK(h.box().half_widths == g.box().half_widths);
    for (size_t i = 0; i < samples.size(); ++i)
      CHECK(std::abs(h.samples()[i] - samples[i]) < 1e-6);  // float32 storage
  }
  {
    auto g = GridDistribution::point_masses(GridBox{{0.0}, {1.0}}, {64},
                                            {{{0.3}, Complex(0.25, -1.5)}});
    const std::string sidecar = (dir / "wf_grid_pm.json").string();
    write_grid(g, sidecar);
    auto h = read_grid(sidecar);
    CHECK(h.kind() == GridKind::WeightedPointMasses);
    CHECK(h.masses().size() == 1);
    CHECK(h.masses()[0].location[0] == 0.3);  // exact through the sidecar
    CHECK(h.masses()[0].weight == Complex(0.25, -1.5));
  }
}

TEST_CASE("localization obeys the multiplicative trivialities") {
  const int n = 1024;
  const BumpSpec wide{{0.0}, 0.25, 0.5};

  // support inside the wide bump's plateau -> unchanged
  const BumpSpec narrow{{0.0}, 0.1, 0.5};
  auto u = GridDistribution::sample(GridBox{{0.0}, {1.0}}, {n},
                                    [&](const VecD& x) { return Complex(narrow.eval(x), 0.0); });
  auto loc = localize(u, wide);
  for (size_t i = 0; i < u.size(); ++i)
    CHECK(std::abs(loc.samples()[i] - u.samples()[i]) < 1e-15);

  // disjoint supports -> zero distribution
  auto shifted = GridDistribution::sample(GridBox{{0.0}, {1.0}}, {n}, [&](const VecD& x) {
    return Complex(narrow.eval({x[0] + 0.5}), 0.0);
  });
  auto dead = localize(shifted, BumpSpec{{0.5}, 0.25, 0.5});
  for (size_t i = 0; i < dead.size(); ++i) CHECK(std::abs(dead.samples()[i]) == 0.0);

  // Heaviside ≡ 1 over the bump at 0.5 -> output equals the bump itself
  auto h = heaviside_grid(n);
  const BumpSpec at_half{{0.5}, 0.25, 0.5};
  auto cut = localize(h, at_half);
  std::vector<int> idx(1, 0);
  for (int j = 0; j < n; ++j) {
    idx[0] = j;
    CHECK(std::abs(cut.samples()[size_t(j)] - Complex(at_half.eval(h.grid_point(idx)), 0.0)) <
          1e-15);
  }

  CHECK_THROWS_AS(localize(h, BumpSpec{{0.9}, 0.25, 0.5}), DomainError);

  // point masses keep their kind, weights scaled at the exact location
  auto pm = GridDistribution::point_masses(GridBox{{0.0}, {1.0}}, {64},
                                           {{{0.1}, Complex(1.0, 0.0)}, {{0.7}, Complex(1.0, 0.0)}});
  auto pml = localize(pm, wide);
  CHECK(pml.kind() == GridKind::WeightedPointMasses);
  CHECK(std::abs(pml.masses()[0].weight - Complex(wide.eval({0.1}), 0.0)) < 1e-15);
  CHECK(std::abs(pml.masses()[1].weight) == 0.0);
}

TEST_CASE("directional spectrum matches a continuum quadrature oracle on the localized jump") {
  auto u = heaviside_grid();
  const BumpSpec bump{{0.0}, 0.25, 0.5};
  auto loc = localize(u, bump);

  // lattice frequencies (step 2π/(nΔ) = π here) avoid interpolation error
  const std::vector<double> radii = {13.0 * PI, 40.0 * PI};
  auto table = directional_spectrum(loc, {{1.0}}, radii);
  REQUIRE(table.size() == 1);
  REQUIRE(table[0].magnitudes.size() == 2);

  // the half-line Riemann sum carries the Euler-Maclaurin endpoint term
  // Δ/2·f(0) on top of the continuum integral; model it, next order is O(Δ²t)
  const double half_step = 0.5 * u.spacing()[0];
  const double want_lo = std::abs(jump_transform_oracle(bump, radii[0]) + half_step);
  const double want_hi = std::abs(jump_transform_oracle(bump, radii[1]) + half_step);
  CHECK(rel_err(table[0].magnitudes[0], want_lo) < 2e-3);
  CHECK(rel_err(table[0].magnitudes[1], want_hi) < 5e-3);

  // the -1 direction sees the conjugate magnitudes of this real distribution
  auto flip = directional_spectrum(loc, {{-1.0}}, radii);
  CHECK(rel_err(flip[0].magnitudes[0], table[0].magnitudes[0]) < 1e-12);
}

TEST_CASE("point mass spectrum is flat and classifies singular at the spike only") {
  auto u = GridDistribution::point_masses(GridBox{{0.0}, {1.0}}, {1024},
                                          {{{0.0}, Complex(1.0, 0.0)}});
  auto wf = estimate_wavefront(u, {{0.0}, {0.5}}, direction_set(1));
  REQUIRE(wf.entries.size() == 4);
  for (const auto& e : wf.entries) {
    if (e.base_point[0] == 0.0) {
      CHECK(e.singular);
      CHECK(std::abs(e.n_fit) <= 0.1);
    } else {
      CHECK_FALSE(e.singular);
    }
  }
  auto dirs = project_covectors(wf);
  CHECK(dirs.size() == 2);
}

TEST_CASE("localized Heaviside fits first-power decay at the jump and nowhere else") {
  auto u = heaviside_grid();
  auto wf = estimate_wavefront(u, {{-0.5}, {0.0}, {0.5}}, direction_set(1));
  REQUIRE(wf.entries.size() == 6);
  for (const auto& e : wf.entries) {
    if (e.base_point[0] == 0.0) {
      CHECK(e.singular);
      CHECK(e.n_fit > 0.7);
      CHECK(e.n_fit < 1.3);
    } else {
      CHECK_FALSE(e.singular);
    }
  }
  auto dirs = project_covectors(wf);
  REQUIRE(dirs.size() == 2);
  CHECK(std::abs(std::abs(dirs[0][0]) - 1.0) < 1e-15);
}

TEST_CASE("smooth Gaussian estimates an empty wavefront set") {
  const double sigma = 0.12;
  auto u = GridDistribution::sample(GridBox{{0.0}, {1.0}}, {1024}, [&](const VecD& x) {
    return Complex(std::exp(-x[0] * x[0] / (2.0 * sigma * sigma)), 0.0);
  });
  auto wf = estimate_wavefront(u, {{-0.3}, {0.0}, {0.3}}, direction_set(1));
  CHECK(wf.singular_entries().empty());
  CHECK(project_covectors(wf).empty());
}

TEST_CASE("oscillation shift leaves verdicts unchanged") {
  const double zeta0 = 20.0;

  // modulated point mass: weight picks up a phase, verdict identical
  auto pm = GridDistribution::point_masses(GridBox{{0.0}, {1.0}}, {1024},
                                           {{{0.3}, Complex(1.0, 0.0)}});
  auto pm_mod = GridDistribution::point_masses(
      GridBox{{0.0}, {1.0}}, {1024}, {{{0.3}, std::polar(1.0, zeta0 * 0.3)}});
  auto a = estimate_wavefront(pm, {{0.3}}, direction_set(1));
  auto b = estimate_wavefront(pm_mod, {{0.3}}, direction_set(1));
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].singular);
    CHECK(a.entries[i].singular == b.entries[i].singular);
  }

  // modulated Heaviside: spectrum translates, the jump stays singular
  auto h = heaviside_grid();
  auto h_mod = GridDistribution::sample(GridBox{{0.0}, {1.0}}, {1024}, [&](const VecD& x) {
    return (x[0] >= 0.0 ? 1.0 : 0.0) * std::polar(1.0, zeta0 * x[0]);
  });
  auto wa = estimate_wavefront(h, {{0.0}, {0.5}}, direction_set(1));
  auto wb = estimate_wavefront(h_mod, {{0.0}, {0.5}}, direction_set(1));
  for (size_t i = 0; i < wa.entries.size(); ++i)
    CHECK(wa.entries[i].singular == wb.entries[i].singular);
}

TEST_CASE("shrinking the bump never flips a smooth center to singular") {
  const double sigma = 0.12;
  auto u = GridDistribution::sample(GridBox{{0.0}, {1.0}}, {1024}, [&](const VecD& x) {
    return Complex(std::exp(-x[0] * x[0] / (2.0 * sigma * sigma)), 0.0);
  });
  // radius floor: the shoulder width scales with the radius, and below ~0.18
  // the window's own transform no longer clears n_reg inside the default fit
  // decade on this grid
  for (double r : {0.25, 0.21, 0.18}) {
    WavefrontParams p;
    p.bump_radius = r;
    auto wf = estimate_wavefront(u, {{0.0}}, direction_set(1), p);
    CHECK(wf.singular_entries().empty());
  }
}

TEST_CASE("metric-aware sampling pins plane-wave covectors to the mode") {
  // u = Gaussian envelope × e^{-iη(x,k₀)} under η = diag(1,-1): the spectrum
  // must peak at ζ = +k₀, and the mirror/orthogonal rays see only envelope tails
  const VecD k0 = {8.0, 5.0};
  const double sig = 0.35;
  auto u = GridDistribution::sample(GridBox{{0.0, 0.0}, {2.0, 2.0}}, {64, 64},
                                    [&](const VecD& x) {
                                      const double env =
                                          std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sig * sig));
                                      return env * std::polar(1.0, -(x[0] * k0[0] - x[1] * k0[1]));
                                    });
  auto loc = localize(u, BumpSpec{{0.0, 0.0}, 1.9, 0.8});

  const double t0 = norm2(k0);
  const VecD along = vec_scale(1.0 / t0, k0);
  const VecD against = vec_scale(-1.0, along);
  const VecD ortho = {-along[1], along[0]};

  // directional_spectrum wants two radii; bracket the peak
  const std::vector<double> pair = {0.999 * t0, 1.001 * t0};
  auto rows = directional_spectrum(loc, {along, against, ortho}, pair, {1.0, -1.0});
  const double peak_along = rows[0].peak;
  CHECK(peak_along > 1e3 * rows[1].peak);
  CHECK(peak_along > 1e3 * rows[2].peak);
}

TEST_CASE("radii beyond the representable frequency range raise") {
  auto u = heaviside_grid();
  auto loc = localize(u, BumpSpec{{0.0}, 0.25, 0.5});
  CHECK_THROWS_AS(directional_spectrum(loc, {{1.0}}, {100.0, 5000.0}), RangeError);
}

TEST_CASE("direction sets are unit covectors with the advertised counts") {
  auto d1 = direction_set(1);
  REQUIRE(d1.size() == 2);
  CHECK(d1[0][0] == 1.0);
  CHECK(d1[1][0] == -1.0);

  auto d2 = direction_set(2);
  CHECK(d2.size() == 32);
  for (const auto& d : d2) CHECK(std::abs(norm2(d) - 1.0) < 1e-14);

  auto d3 = direction_set(3);
  CHECK(d3.size() == 64);
  for (const auto& d : d3) CHECK(std::abs(norm2(d) - 1.0) < 1e-14);
}

TEST_CASE("default fit range spans one decade below the representable band") {
  auto u = heaviside_grid();
  auto fr = default_fit_range(u);
  CHECK(fr.t_max / fr.t_min == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(fr.t_max < PI / u.spacing()[0]);
  auto radii = fr.radii();
  CHECK(radii.size() == 24);
  CHECK(radii.front() == doctest::Approx(fr.t_min));
  CHECK(radii.back() == doctest::Approx(fr.t_max));
}
