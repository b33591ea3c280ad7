#include "warpfield/field.hpp"

#include <algorithm>

#include "warpfield/quadrature.hpp"

namespace warpfield {

namespace {

// ∫_box f(x) e^{iη(x,k)} dx on a 2-d tensor Gauss grid
Complex box_transform(const TestFunction& f, const VecD& k, double panel_width, int order) {
  const auto gx = quad::panel_grid(f.support_lo()[0], f.support_hi()[0], panel_width, order);
  const auto gy = quad::panel_grid(f.support_lo()[1], f.support_hi()[1], panel_width, order);
  Complex s(0.0);
  VecD x(2);
  for (size_t i = 0; i < gx.size(); ++i) {
    x[0] = gx.nodes[i];
    Complex row(0.0);
    for (size_t j = 0; j < gy.size(); ++j) {
      x[1] = gy.nodes[j];
      row += gy.weights[j] * f.eval(x) * std::polar(1.0, x[0] * k[0] - x[1] * k[1]);
    }
    s += gx.weights[i] * row;
  }
  return s;
}

}  // namespace

OnShellTransforms on_shell_transforms(const TestFunction& f, const ModeLattice& lattice) {
  require(f.base_dimension() == 2, "on_shell_transforms: spacetime test function required");
  OnShellTransforms t;
  const int modes = lattice.mode_count();
  t.plus.resize(modes);
  t.minus.resize(modes);
  for (int p = 0; p < modes; ++p) {
    const VecD k = lattice.on_shell(p);
    const VecD mk = {-k[0], -k[1]};
    const Complex coarse_p = box_transform(f, k, 0.5, 12);
    const Complex fine_p = box_transform(f, k, 0.25, 12);
    const Complex coarse_m = box_transform(f, mk, 0.5, 12);
    const Complex fine_m = box_transform(f, mk, 0.25, 12);
    t.plus[p] = fine_p;
    t.minus[p] = fine_m;
    t.quad_error = std::max({t.quad_error, std::abs(fine_p - coarse_p), std::abs(fine_m - coarse_m)});
  }
  return t;
}

FieldOperatorResult build_field_operator(const OnShellTransforms& t, const FockBasis& basis) {
  FieldOperatorResult r;
  r.op = FockOperator::zero(basis.dimension());
  r.quad_error = t.quad_error;

  double leak2 = 0.0;
  for (int p = 0; p < basis.lattice.mode_count(); ++p) {
    const double w = 1.0 / std::sqrt(2.0 * basis.lattice.omega(p));
    const auto up = creator(basis, p);
    const auto dn = annihilator(basis, p);
    const Complex cp = w * t.plus[p];
    const Complex cm = w * t.minus[p];
    for (size_t i = 0; i < r.op.a.size(); ++i) r.op.a[i] += cp * up.a[i] + cm * dn.a[i];

    // creation amplitudes lost at the cutoff boundary
    for (size_t j = 0; j < basis.states.size(); ++j) {
      const auto& s = basis.states[j];
      const bool blocked = s[p] == basis.n_max || basis.total_number(j) == basis.n_total;
      if (blocked) leak2 += std::norm(cp) * double(s[p] + 1);
    }
  }
  r.leakage = std::sqrt(leak2);
  return r;
}

FieldOperatorResult build_field_operator(const TestFunction& f, const FockBasis& basis) {
  return build_field_operator(on_shell_transforms(f, basis.lattice), basis);
}

FockOperator translation_unitary(const VecD& a, const FockBasis& basis) {
  require(a.size() == 2, "translation_unitary: spacetime vector required");
  FockOperator u = FockOperator::zero(basis.dimension());
  for (size_t i = 0; i < basis.dimension(); ++i)
    u.at(i, i) = std::polar(1.0, minkowski_pair(a, basis.total_momentum(i)));
  return u;
}

NPointResult npoint(const std::vector<Complex>& psi, const std::vector<TestFunction>& fs,
                    const FockBasis& basis) {
  require(psi.size() == basis.dimension(), "npoint: state dimension mismatch");
  require(std::abs(inner(psi, psi) - Complex(1.0)) < 1e-9, "npoint: state must be normalized");
  const int n = int(fs.size());
  require(n >= 1, "npoint: at least one field factor");

  int psi_max_number = 0;
  for (size_t i = 0; i < psi.size(); ++i)
    if (std::abs(psi[i]) > 0.0) psi_max_number = std::max(psi_max_number, basis.total_number(i));

  NPointResult r;
  r.headroom_ok = psi_max_number + n <= basis.n_total;

  // transforms depend only on the lattice, so compute them once per factor and
  // reuse them for the widened-basis leakage pass
  std::vector<OnShellTransforms> transforms;
  transforms.reserve(fs.size());
  for (const auto& f : fs) transforms.push_back(on_shell_transforms(f, basis.lattice));

  auto evaluate = [&transforms](const FockBasis& b, const std::vector<Complex>& state,
                                double& quad_error) {
    auto v = state;
    for (int i = int(transforms.size()) - 1; i >= 0; --i) {
      const auto fr = build_field_operator(transforms[i], b);
      quad_error = std::max(quad_error, fr.quad_error);
      v = op_apply(fr.op, v);
    }
    return inner(state, v);
  };

  r.value = evaluate(basis, psi, r.quad_error);

  // measure truncation leakage by redoing the product with n more particles of
  // headroom and the state embedded by occupation tuple
  const auto big = FockBasis::create(basis.lattice, std::min(basis.n_max + n, basis.n_total + n),
                                     basis.n_total + n);
  std::vector<Complex> embedded(big.dimension(), Complex(0.0));
  for (size_t i = 0; i < psi.size(); ++i) {
    if (psi[i] == Complex(0.0)) continue;
    auto idx = big.index_of(basis.states[i]);
    require(idx.has_value(), "npoint: embedding failed");
    embedded[*idx] = psi[i];
  }
  double ignored = 0.0;
  const Complex wide = evaluate(big, embedded, ignored);
  r.leakage = std::abs(wide - r.value);
  return r;
}

SmoothnessCertificate smoothness_certificate(const std::vector<Complex>& psi,
                                             const FockBasis& basis) {
  require(psi.size() == basis.dimension(), "smoothness_certificate: dimension mismatch");
  SmoothnessCertificate c;
  for (size_t i = 0; i < psi.size(); ++i) {
    if (std::abs(psi[i]) == 0.0) continue;
    const VecD p = basis.total_momentum(i);
    const double n = norm2(p);
    if (n > c.max_p_norm) {
      c.max_p_norm = n;
      c.argmax_momentum = p;
    }
  }
  return c;
}

TwoPointValue twopoint_modesum(const TestFunction& f, const TestFunction& g,
                               const ModeLattice& lattice) {
  const auto tf = on_shell_transforms(f, lattice);
  const auto tg = on_shell_transforms(g, lattice);
  TwoPointValue v;
  v.quad_error = std::max(tf.quad_error, tg.quad_error);
  for (int p = 0; p < lattice.mode_count(); ++p)
    v.value += tf.minus[p] * tg.plus[p] / (2.0 * lattice.omega(p));
  return v;
}

GridDistribution sample_vacuum_twopoint(const ModeLattice& lattice, const GridBox& box,
                                        const std::vector<int>& resolution) {
  require(box.center.size() == 2, "sample_vacuum_twopoint: d = 2 box required");
  const int modes = lattice.mode_count();
  std::vector<VecD> shell(modes);
  VecD weight(modes);
  for (int p = 0; p < modes; ++p) {
    shell[p] = lattice.on_shell(p);
    weight[p] = 1.0 / (2.0 * shell[p][0]);
  }
  return GridDistribution::sample(box, resolution, [&](const VecD& z) {
    Complex s(0.0);
    for (int p = 0; p < modes; ++p)
      s += weight[p] * std::polar(1.0, -(z[0] * shell[p][0] - z[1] * shell[p][1]));
    return s;
  });
}

}  // namespace warpfield
