#include "warpfield/oscint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "warpfield/quadrature.hpp"

namespace warpfield {

VecD CutoffSpec::schedule() const {
  if (!eps_schedule.empty()) {
    for (double e : eps_schedule) require(e > 0.0, "cutoff schedule entries must be positive");
    return eps_schedule;
  }
  VecD out(8);
  for (int i = 0; i < 8; ++i) out[i] = 0.5 * std::pow(2.0, -0.5 * i);
  return out;
}

double CutoffSpec::chi(double norm_scaled) const {
  require(radius > 0.0, "cutoff radius must be positive");
  double t = norm_scaled / radius;
  double t2 = t * t;
  if (t2 >= 1.0) return 0.0;
  double b = std::exp(1.0 - 1.0 / (1.0 - t2));
  switch (profile) {
    case 0: return b;
    case 1: return b * b;
    default: throw InvalidArgumentError("unknown cutoff profile index");
  }
}

int required_iterations(double m, double rho, int k) {
  require(k >= 1, "order parameter k must be at least 1");
  require(rho > -1.0 && rho <= 1.0, "symbol type must lie in (-1, 1]");
  double x = (m + 2.0 * k) / (rho + 1.0);
  double r = std::round(x);
  if (std::abs(x - r) < 1e-9) x = r;
  return std::max(0, int(std::floor(x)) + 1);
}

namespace {

std::string append_note(std::string base, const std::string& extra) {
  if (base.empty()) return extra;
  return base + "; " + extra;
}

std::function<Complex(const VecD&)> make_point_eval(const Symbol& s) {
  if (s.has_expression()) {
    expr::ExprPtr e = s.expression();
    int n = 2 * s.k();
    return [e, n](const VecD& x) { return expr::eval(e, x.data(), n); };
  }
  Symbol copy = s;
  return [copy](const VecD& x) { return copy.eval(x); };
}

// ---- monomial/φ-power algebra ---------------------------------------------
//
// Coefficients of the iterated adjoint (M*)^j are sums  Σ c · x^e / φ^p  in the
// packed variables: multiplication by a component of Ξ and differentiation both
// stay in this family because φ is quadratic and the Ξ numerators are linear.

struct MonoKey {
  std::vector<int> e;
  int p = 0;
  bool operator<(const MonoKey& o) const {
    if (p != o.p) return p < o.p;
    return e < o.e;
  }
};
using Rational = std::map<MonoKey, double>;

void rat_add(Rational& dst, const MonoKey& key, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = dst.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) dst.erase(it);
  }
}

void rat_add_scaled(Rational& dst, const Rational& src, double c) {
  for (const auto& [key, coef] : src) rat_add(dst, key, coef * c);
}

// multiply by (Σ_j L_j x_j) / φ
Rational rat_mul_linear_over_phi(const Rational& src, const VecD& L) {
  Rational out;
  int n = int(L.size());
  for (const auto& [key, coef] : src)
    for (int j = 0; j < n; ++j) {
      if (L[j] == 0.0) continue;
      MonoKey k2 = key;
      k2.e[j] += 1;
      k2.p += 1;
      rat_add(out, k2, coef * L[j]);
    }
  return out;
}

// ∂_i with ∂_i φ = Σ_j Gi[j] x_j
Rational rat_derivative(const Rational& src, int i, const VecD& Gi) {
  Rational out;
  int n = int(Gi.size());
  for (const auto& [key, coef] : src) {
    if (key.e[i] > 0) {
      MonoKey k2 = key;
      k2.e[i] -= 1;
      rat_add(out, k2, coef * key.e[i]);
    }
    if (key.p > 0)
      for (int j = 0; j < n; ++j) {
        if (Gi[j] == 0.0) continue;
        MonoKey k2 = key;
        k2.e[j] += 1;
        k2.p += 1;
        rat_add(out, k2, -coef * key.p * Gi[j]);
      }
  }
  return out;
}

Rational rat_mul(const Rational& a, const Rational& b) {
  Rational out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) {
      MonoKey k2 = ka;
      for (size_t j = 0; j < k2.e.size(); ++j) k2.e[j] += kb.e[j];
      k2.p += kb.p;
      rat_add(out, k2, ca * cb);
    }
  return out;
}

// ---- geometry of the phase ------------------------------------------------

struct EtaGeometry {
  int k = 1;
  MatD A;
  MatD AAt, AtA;             // φ = θᵀAAᵀθ + ξᵀAᵀAξ
  std::vector<VecD> xi_num;  // row i: numerator linear form of Ξ_i
  std::vector<VecD> dphi;    // row i: linear form of ∂_i φ

  double phi(const VecD& x) const {
    double acc = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        acc += AAt(i, j) * x[i] * x[j] + AtA(i, j) * x[k + i] * x[k + j];
    return acc;
  }
  double eta_value(const VecD& x) const {
    double acc = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) acc += x[i] * A(i, j) * x[k + j];
    return acc;
  }
};

EtaGeometry make_geometry(const BilinearForm& eta) {
  EtaGeometry g;
  g.k = eta.k;
  g.A = eta.A;
  MatD At = mat_transpose(eta.A);
  g.AAt = mat_mul(eta.A, At);
  g.AtA = mat_mul(At, eta.A);
  int n = 2 * g.k;
  g.xi_num.assign(n, VecD(n, 0.0));
  g.dphi.assign(n, VecD(n, 0.0));
  for (int i = 0; i < g.k; ++i)
    for (int j = 0; j < g.k; ++j) {
      g.xi_num[i][g.k + j] = eta.A(i, j);
      g.xi_num[g.k + i][j] = eta.A(j, i);
      g.dphi[i][j] = 2.0 * g.AAt(i, j);
      g.dphi[g.k + i][g.k + j] = 2.0 * g.AtA(i, j);
    }
  return g;
}

Rational make_div_xi(const EtaGeometry& g) {
  Rational acc;
  int n = 2 * g.k;
  for (int i = 0; i < n; ++i) {
    Rational xi_i;
    for (int j = 0; j < n; ++j)
      if (g.xi_num[i][j] != 0.0) {
        MonoKey key;
        key.e.assign(n, 0);
        key.e[j] = 1;
        key.p = 1;
        rat_add(xi_i, key, g.xi_num[i][j]);
      }
    rat_add_scaled(acc, rat_derivative(xi_i, i, g.dphi[i]), 1.0);
  }
  return acc;
}

// coefficient tables of (M*)^j s = Σ_γ z_γ ∂^γ s
using ZMap = std::map<MultiIndex, Rational>;

ZMap zmap_next(const ZMap& z, const EtaGeometry& g, const Rational& div_xi) {
  ZMap out;
  int n = 2 * g.k;
  for (const auto& [gamma, coef] : z) {
    Rational keep = rat_mul(div_xi, coef);
    for (int i = 0; i < n; ++i) {
      Rational dr = rat_derivative(coef, i, g.dphi[i]);
      rat_add_scaled(keep, rat_mul_linear_over_phi(dr, g.xi_num[i]), 1.0);
      MultiIndex g2 = gamma;
      g2[size_t(i)] += 1;
      rat_add_scaled(out[g2], rat_mul_linear_over_phi(coef, g.xi_num[i]), 1.0);
    }
    rat_add_scaled(out[gamma], keep, 1.0);
  }
  return out;
}

// flattened form for fast evaluation
struct FlatMono {
  std::vector<int> e;
  int p = 0;
  double c = 0.0;
};
struct AppliedTerm {
  MultiIndex alpha, beta;  // ∂^γ split into ξ / θ parts
  Complex phase;           // i^{|γ|}: converts the symbol's D-convention back to plain ∂
  std::vector<FlatMono> monos;
};

struct BuildData {
  EtaGeometry geom;
  Symbol s;
  std::vector<std::vector<AppliedTerm>> steps;
  int max_p = 0;
};

std::vector<AppliedTerm> flatten_step(const ZMap& z, int k, int& max_p) {
  std::vector<AppliedTerm> out;
  for (const auto& [gamma, rat] : z) {
    if (rat.empty()) continue;
    AppliedTerm t;
    t.beta = MultiIndex(gamma.begin(), gamma.begin() + k);
    t.alpha = MultiIndex(gamma.begin() + k, gamma.end());
    t.phase = std::pow(I_UNIT, mi_order(gamma));
    for (const auto& [key, c] : rat) {
      t.monos.push_back({key.e, key.p, c});
      max_p = std::max(max_p, key.p);
    }
    out.push_back(std::move(t));
  }
  return out;
}

Complex apply_step(const BuildData& bd, int j, const VecD& x) {
  double phi = bd.geom.phi(x);
  if (!(phi > 1e-30))
    throw GeometryError("phase gradient form vanishes away from the origin");
  std::array<double, 64> powtab;
  powtab[0] = 1.0;
  for (int q = 1; q <= bd.max_p; ++q) powtab[size_t(q)] = powtab[size_t(q - 1)] * phi;
  Complex acc{0.0};
  for (const auto& term : bd.steps[size_t(j)]) {
    double rv = 0.0;
    for (const auto& mono : term.monos) {
      double t = mono.c;
      for (size_t jj = 0; jj < mono.e.size(); ++jj)
        for (int rep = 0; rep < mono.e[jj]; ++rep) t *= x[jj];
      rv += t / powtab[size_t(mono.p)];
    }
    if (rv != 0.0) acc += term.phase * rv * bd.s.eval(x, term.alpha, term.beta);
  }
  return acc;
}

expr::ExprPtr linear_form_expr(const VecD& L) {
  std::vector<expr::ExprPtr> terms;
  for (size_t j = 0; j < L.size(); ++j)
    if (L[j] != 0.0) terms.push_back(expr::mul({expr::constant(L[j]), expr::var(int(j))}));
  if (terms.empty()) return expr::constant(0.0);
  if (terms.size() == 1) return terms[0];
  return expr::add(terms);
}

// ---- decay probing and tensor grids for the cutoff method ------------------

bool probe_live(const std::function<Complex(const VecD&)>& f, int n, int coord, double r,
                double threshold) {
  std::array<double, 5> pins = {0.0, 1.5, -1.5, r, -r};
  int others = n - 1;
  std::vector<int> idx(others, 0);
  VecD pt(n, 0.0);
  while (true) {
    int pos = 0;
    for (int j = 0; j < n; ++j) {
      if (j == coord) continue;
      pt[size_t(j)] = pins[size_t(idx[size_t(pos)])];
      ++pos;
    }
    for (double sgn : {1.0, -1.0}) {
      pt[size_t(coord)] = sgn * r;
      Complex v = f(pt);
      if (std::abs(v) > threshold || !std::isfinite(v.real()) || !std::isfinite(v.imag()))
        return true;
    }
    int d = others - 1;
    while (d >= 0) {
      if (++idx[size_t(d)] < 5) break;
      idx[size_t(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return false;
}

// per-coordinate half-width beyond which the symbol is numerically negligible
VecD probe_boxes(const std::function<Complex(const VecD&)>& f, int n,
                 const OscQuadratureSpec& q) {
  VecD pt(n, 0.0);
  double ref = std::max(1.0, std::abs(f(pt)));
  for (int i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      std::fill(pt.begin(), pt.end(), 0.0);
      pt[size_t(i)] = s;
      ref = std::max(ref, std::abs(f(pt)));
    }
  double threshold = 5e-15 * ref;
  VecD box(n, q.min_box);
  for (int i = 0; i < n; ++i) {
    double last_live = 0.0;
    bool cap_live = false;
    for (double r = 1.0; r <= q.max_box * 1.000001; r *= 1.45) {
      if (probe_live(f, n, i, r, threshold)) {
        last_live = r;
        if (r * 1.45 > q.max_box) cap_live = true;
      }
    }
    double b = cap_live ? q.max_box : 1.3 * last_live + 0.5;
    box[size_t(i)] = std::clamp(b, q.min_box, q.max_box);
  }
  return box;
}

std::vector<quad::Grid1D> build_axes(int k, const MatD& A, const VecD& box,
                                     const OscQuadratureSpec& q, double wscale) {
  int n = 2 * k;
  std::vector<quad::Grid1D> axes;
  axes.resize(size_t(n));
  for (int i = 0; i < n; ++i) {
    double omega = q.extra_frequency;
    for (int j = 0; j < k; ++j)
      omega += (i < k) ? std::abs(A(i, j)) * box[size_t(k + j)]
                       : std::abs(A(j, i - k)) * box[size_t(j)];
    omega = std::max(omega, 0.5);
    double w = std::min(q.points_per_wavelength / omega, box[size_t(i)]) * wscale;
    axes[size_t(i)] = quad::panel_grid(-box[size_t(i)], box[size_t(i)], w, q.gauss_order);
  }
  return axes;
}

double axes_node_count(const std::vector<quad::Grid1D>& axes) {
  double t = 1.0;
  for (const auto& g : axes) t *= double(g.size());
  return t;
}

Complex tensor_eval(const std::vector<quad::Grid1D>& axes, int k, const MatD& A, double eps,
                    const CutoffSpec& cut, const std::function<Complex(const VecD&)>& f) {
  int n = int(axes.size());
  std::vector<size_t> idx(size_t(n), 0);
  VecD x(size_t(n), 0.0);
  Complex acc{0.0};
  while (true) {
    double w = 1.0;
    double nrm2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double xi = axes[size_t(i)].nodes[idx[size_t(i)]];
      x[size_t(i)] = xi;
      w *= axes[size_t(i)].weights[idx[size_t(i)]];
      nrm2 += xi * xi;
    }
    double c = cut.chi(eps * std::sqrt(nrm2));
    if (c != 0.0) {
      double phase = 0.0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) phase += x[size_t(i)] * A(i, j) * x[size_t(k + j)];
      acc += w * c * std::exp(Complex(0.0, -phase)) * f(x);
    }
    int d = n - 1;
    while (d >= 0) {
      if (++idx[size_t(d)] < axes[size_t(d)].size()) break;
      idx[size_t(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return acc;
}

// Neville table evaluated at the origin; abscissae t, data v
Complex neville_origin(const VecD& t, std::vector<Complex> v, double& spread) {
  int n = int(v.size());
  if (n == 1) {
    spread = 0.0;
    return v[0];
  }
  Complex prev_head = v[0];
  Complex head = v[0];
  for (int j = 1; j < n; ++j) {
    for (int i = 0; i + j < n; ++i)
      v[size_t(i)] = (t[size_t(i)] * v[size_t(i + 1)] - t[size_t(i + j)] * v[size_t(i)]) /
                     (t[size_t(i)] - t[size_t(i + j)]);
    prev_head = head;
    head = v[0];
  }
  spread = std::abs(head - prev_head);
  return head;
}

// ---- regularized machinery --------------------------------------------------

int angular_nodes(double absa, double r, int h, double scale, double sideband) {
  double z = absa * r * r / 2.0;
  double n = 2.0 * (z + 12.0 * std::cbrt(z + 1.0) + sideband * r) + 8.0 * h + 24.0;
  return int(std::ceil(n * scale));
}

Complex disk_part(const RegularizedDecomposition& d, const OscQuadratureSpec& q, double wscale,
                  double angscale) {
  double absa = std::abs(d.eta.A(0, 0));
  auto radial = quad::panel_grid(0.0, d.delta, 0.25 * wscale, q.gauss_order);
  Complex acc{0.0};
  for (size_t ir = 0; ir < radial.size(); ++ir) {
    double r = radial.nodes[ir];
    auto circle = quad::circle_rule(std::max(r, 1e-12),
                                    angular_nodes(absa, r, 0, angscale, q.angular_sideband));
    Complex ring{0.0};
    for (double a : circle.angles) {
      VecD x = {r * std::cos(a), r * std::sin(a)};
      ring += d.ball_integrand(x);
    }
    acc += radial.weights[ir] * ring * circle.weight;
  }
  return acc;
}

Complex boundary_part(const RegularizedDecomposition& d, int j, int n_nodes) {
  auto circle = quad::circle_rule(d.delta, n_nodes);
  Complex acc{0.0};
  for (double a : circle.angles) {
    VecD x = {d.delta * std::cos(a), d.delta * std::sin(a)};
    acc += d.boundary_integrands[size_t(j)](x);
  }
  return acc * circle.weight;
}

Complex bulk_part(const RegularizedDecomposition& d, const OscQuadratureSpec& q, double r0,
                  double r1, double wscale, double angscale) {
  double absa = std::abs(d.eta.A(0, 0));
  Complex acc{0.0};
  auto gauss = quad::gauss_legendre(q.gauss_order);
  double r = r0;
  while (r < r1) {
    double w = std::min(1.0, q.points_per_wavelength / (absa * std::max(r, 1.0))) * wscale;
    double rb = std::min(r1, r + w);
    for (int g = 0; g < q.gauss_order; ++g) {
      double rn = 0.5 * (r + rb) + 0.5 * (rb - r) * gauss.nodes[size_t(g)];
      double rw = 0.5 * (rb - r) * gauss.weights[size_t(g)];
      auto circle =
          quad::circle_rule(rn, angular_nodes(absa, rn, d.h, angscale, q.angular_sideband));
      Complex ring{0.0};
      for (double a : circle.angles) {
        VecD x = {rn * std::cos(a), rn * std::sin(a)};
        double eta = d.eta.A(0, 0) * x[0] * x[1];
        ring += std::exp(Complex(0.0, -eta)) * d.bulk_integrand(x);
      }
      acc += rw * ring * circle.weight;
    }
    r = rb;
  }
  return acc;
}

// estimate for the truncated bulk ∫_{r>R} e^{-iη}(M*)^h s: one further
// integration by parts gives the boundary term on the circle of radius R
// (computed exactly) plus ∫_{r>R}|(M*)^{h+1}s|, bounded by extrapolating the
// measured ring integral with the symbol-class decay exponent. When the
// (h+1)-fold integrand is unavailable the h-fold ring bound stands in.
double exterior_tail(const RegularizedDecomposition& d, const OscQuadratureSpec& q, double R) {
  double absa = std::abs(d.eta.A(0, 0));
  auto circle =
      quad::circle_rule(R, angular_nodes(absa, R, d.h + 1, 1.0, q.angular_sideband));
  Complex s_r{0.0};
  double ring_next = 0.0;
  double ring_h = 0.0;
  for (double a : circle.angles) {
    VecD x = {R * std::cos(a), R * std::sin(a)};
    double eta = d.eta.A(0, 0) * x[0] * x[1];
    double phi = absa * absa * (x[0] * x[0] + x[1] * x[1]);
    double xi_dot_rhat = 2.0 * eta / (phi * R);
    Complex bulk = d.bulk_integrand(x);
    s_r += std::exp(Complex(0.0, -eta)) * bulk * xi_dot_rhat * circle.weight;
    ring_h += std::abs(bulk) * circle.weight;
    if (d.tail_integrand) ring_next += std::abs(d.tail_integrand(x)) * circle.weight;
  }
  if (d.tail_integrand) {
    // the ring integral of the (h+1)-fold term decays like r^{d_next + 1}
    double d_next = d.bulk_decay_order - (d.symbol.type() + 1.0);
    return std::abs(s_r) + ring_next * R / (-d_next - 2.0);
  }
  return ring_h * R / (-d.bulk_decay_order - 2.0);
}

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// the minimal admissible count: extra iterations inflate the coefficient
// tables faster than they improve the bulk decay, and the tail estimator
// already looks one step deeper on its own
int auto_iterations(const Symbol& s) {
  return required_iterations(s.order(), s.type(), s.k());
}

// pairwise factorization of an expression symbol over a diagonal form
struct PairSplit {
  std::vector<std::vector<Symbol>> terms;
  std::vector<BilinearForm> forms;
};

std::optional<PairSplit> split_pairs(const Symbol& s, const BilinearForm& eta) {
  int k = s.k();
  if (k < 2 || !s.has_expression() || !eta.is_diagonal(1e-12)) return std::nullopt;
  for (int p = 0; p < k; ++p)
    if (std::abs(eta.A(p, p)) < 1e-12) return std::nullopt;
  PairSplit out;
  for (int p = 0; p < k; ++p) {
    MatD a(1, 1);
    a(0, 0) = eta.A(p, p);
    out.forms.push_back(BilinearForm::from_matrix(a));
  }
  for (const auto& term : expr::sum_terms(s.expression())) {
    auto factors = expr::pair_factorize(term, k);
    if (!factors) return std::nullopt;
    std::vector<Symbol> fs;
    for (int p = 0; p < k; ++p)
      fs.push_back(Symbol::from_expression((*factors)[size_t(p)], 1, s.order(), s.type()));
    out.terms.push_back(std::move(fs));
  }
  return out;
}

}  // namespace

OscResult eval_cutoff(const Symbol& s, const BilinearForm& eta, const CutoffSpec& cutoff,
                      const OscQuadratureSpec& quad) {
  require(s.k() == eta.k, "symbol and bilinear form must share the same k");
  OscResult res;
  res.method = "cutoff";
  if (s.is_zero_symbol()) {
    res.note = "zero symbol";
    return res;
  }
  int k = s.k();
  int n = 2 * k;
  double norm = std::pow(2.0 * PI, -k);
  auto f = make_point_eval(s);
  VecD probe = probe_boxes(f, n, quad);
  VecD schedule = cutoff.schedule();
  std::vector<Complex> vals;
  VecD errs;
  bool truncated = false;
  for (double eps : schedule) {
    double chi_box = cutoff.radius / eps;
    VecD box(size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
      if (probe[size_t(i)] >= quad.max_box && chi_box > quad.max_box) truncated = true;
      box[size_t(i)] = std::min({probe[size_t(i)], chi_box, quad.max_box});
    }
    double wscale = 1.0;
    auto axes = build_axes(k, eta.A, box, quad, wscale);
    if (axes_node_count(axes) > quad.node_budget)
      throw EvaluationError("cutoff tensor grid exceeds the node budget");
    auto coarse = build_axes(k, eta.A, box, quad, 2.0);
    Complex vc = norm * tensor_eval(coarse, k, eta.A, eps, cutoff, f);
    Complex v = norm * tensor_eval(axes, k, eta.A, eps, cutoff, f);
    double err = std::abs(v - vc);
    int refs = 0;
    while (err > quad.tol && refs < quad.max_refinements) {
      wscale *= 0.5;
      auto finer = build_axes(k, eta.A, box, quad, wscale);
      if (axes_node_count(finer) > quad.node_budget) {
        res.note = append_note(res.note, "refinement stopped at the node budget");
        break;
      }
      vc = v;
      v = norm * tensor_eval(finer, k, eta.A, eps, cutoff, f);
      err = std::abs(v - vc);
      ++refs;
    }
    if (!finite(v))
      throw DivergenceError("cutoff quadrature is non-finite at eps = " + std::to_string(eps));
    vals.push_back(v);
    errs.push_back(err);
    res.eps_used.push_back(eps);
  }
  res.partials = vals;
  int nv = int(vals.size());
  int use = nv;
  if (cutoff.richardson_depth >= 0) use = std::min(nv, cutoff.richardson_depth + 1);
  std::vector<Complex> tailv(vals.end() - use, vals.end());
  VecD t(size_t(use), 0.0);
  for (int i = 0; i < use; ++i) {
    double e = res.eps_used[size_t(nv - use + i)];
    t[size_t(i)] = e * e;
  }
  double spread = 0.0;
  res.value = neville_origin(t, std::move(tailv), spread);
  if (!finite(res.value)) throw DivergenceError("extrapolation of the cutoff values diverged");
  double qerr = 0.0;
  for (double e : errs) qerr = std::max(qerr, e);
  res.error_estimate = spread + qerr;
  if (truncated) res.note = append_note(res.note, "cutoff support truncated at max_box");
  res.converged = res.error_estimate <= 1e-3 * (1.0 + std::abs(res.value));
  if (!res.converged)
    res.note = append_note(res.note, "extrapolation spread " + std::to_string(spread));
  return res;
}

RegularizedDecomposition build_regularization(const Symbol& s, const BilinearForm& eta,
                                              double delta, int h) {
  require(s.k() == eta.k, "symbol and bilinear form must share the same k");
  require(delta > 0.0, "ball radius must be positive");
  require(h >= 0, "iteration count must be nonnegative");
  int k = s.k();
  if (h < required_iterations(s.order(), s.type(), k)) {
    std::ostringstream msg;
    msg << "bulk decay order " << s.order() - h * (s.type() + 1.0)
        << " does not beat the dimension threshold " << -2 * k
        << "; the boundary recursion needs more iterations";
    throw InsufficientRegularizationError(msg.str());
  }
  if (!s.has_expression() && s.max_derivative_order() < h)
    throw UnsupportedOrderError(
        "symbol provides analytic derivatives only to order " +
        std::to_string(s.max_derivative_order()) + ", the decomposition needs order " +
        std::to_string(h));

  auto bd = std::make_shared<BuildData>();
  bd->geom = make_geometry(eta);
  bd->s = s;
  Rational div_xi = make_div_xi(bd->geom);
  ZMap z;
  Rational one;
  MonoKey unit_key;
  unit_key.e.assign(size_t(2 * k), 0);
  rat_add(one, unit_key, 1.0);
  z[mi_zero(2 * k)] = one;
  bd->steps.push_back(flatten_step(z, k, bd->max_p));
  bool with_tail_step = s.has_expression() || s.max_derivative_order() > h;
  int top = with_tail_step ? h + 1 : h;  // one extra step feeds the tail estimator
  for (int j = 1; j <= top; ++j) {
    z = zmap_next(z, bd->geom, div_xi);
    bd->steps.push_back(flatten_step(z, k, bd->max_p));
  }
  require(bd->max_p < 64, "iterated coefficient tables exceed the supported depth");

  RegularizedDecomposition d;
  d.k = k;
  d.delta = delta;
  d.h = h;
  d.bulk_decay_order = s.order() - h * (s.type() + 1.0);
  d.eta = eta;
  d.symbol = s;

  std::vector<expr::ExprPtr> squares;
  for (int i = 0; i < 2 * k; ++i)
    squares.push_back(expr::pow(linear_form_expr(bd->geom.xi_num[size_t(i)]), 2));
  d.phi = expr::add(squares);
  for (int i = 0; i < 2 * k; ++i)
    d.xi.push_back(expr::div(linear_form_expr(bd->geom.xi_num[size_t(i)]), d.phi));
  std::vector<expr::ExprPtr> divs;
  for (int i = 0; i < 2 * k; ++i) divs.push_back(expr::derivative(d.xi[size_t(i)], i));
  d.div_xi = expr::add(divs);

  d.ball_integrand = [bd](const VecD& x) {
    return std::exp(Complex(0.0, -bd->geom.eta_value(x))) * bd->s.eval(x);
  };
  for (int j = 0; j < h; ++j)
    d.boundary_integrands.push_back([bd, j](const VecD& x) {
      double phi = bd->geom.phi(x);
      if (!(phi > 1e-30))
        throw GeometryError("phase gradient form vanishes on the boundary circle");
      double nrm = norm2(x);
      double xi_dot_nu = 0.0;
      for (size_t i = 0; i < x.size(); ++i)
        xi_dot_nu -= dot(bd->geom.xi_num[i], x) / phi * x[i] / nrm;
      return std::exp(Complex(0.0, -bd->geom.eta_value(x))) * apply_step(*bd, j, x) * xi_dot_nu;
    });
  d.bulk_integrand = [bd, h](const VecD& x) { return apply_step(*bd, h, x); };
  if (with_tail_step)
    d.tail_integrand = [bd, h](const VecD& x) { return apply_step(*bd, h + 1, x); };
  return d;
}

OscResult eval_regularized(const RegularizedDecomposition& d, const OscQuadratureSpec& quad) {
  if (d.k != 1)
    throw UnsupportedOrderError(
        "regularized evaluation runs at k = 1; factor separable symbols pairwise");
  if (!(d.bulk_decay_order < -2.0 * d.k))
    throw InsufficientRegularizationError("bulk term is not absolutely integrable");
  OscResult res;
  res.method = "regularized";
  double norm = std::pow(2.0 * PI, -d.k);
  double R = std::max(quad.bulk_radius, 2.0 * d.delta);

  Complex ball0 = disk_part(d, quad, 1.0, 1.0);
  Complex ball1 = disk_part(d, quad, 0.5, 1.5);
  double err_quad = std::abs(ball1 - ball0);
  std::vector<Complex> bnd(d.boundary_integrands.size());
  for (size_t j = 0; j < bnd.size(); ++j) {
    Complex b0 = boundary_part(d, int(j), quad.boundary_nodes);
    Complex b1 = boundary_part(d, int(j), 2 * quad.boundary_nodes);
    err_quad += std::abs(b1 - b0);
    bnd[j] = b1;
  }
  Complex bulk0 = bulk_part(d, quad, d.delta, R, 1.0, 1.0);
  Complex bulk1 = bulk_part(d, quad, d.delta, R, 0.5, 1.5);
  err_quad += std::abs(bulk1 - bulk0);
  double tail = exterior_tail(d, quad, R);

  auto assemble = [&](Complex bulk) {
    Complex acc = ball1;
    for (size_t j = 0; j < bnd.size(); ++j)
      acc += I_UNIT * std::pow(-I_UNIT, double(j)) * bnd[j];
    acc += std::pow(-I_UNIT, double(d.h)) * bulk;
    return norm * acc;
  };

  Complex value = assemble(bulk1);
  res.partials.push_back(norm * ball1);
  for (size_t j = 0; j < bnd.size(); ++j)
    res.partials.push_back(norm * I_UNIT * std::pow(-I_UNIT, double(j)) * bnd[j]);
  res.partials.push_back(norm * std::pow(-I_UNIT, double(d.h)) * bulk1);
  res.converged = true;

  if (quad.check_r_doubling) {
    Complex ext = bulk_part(d, quad, R, 2.0 * R, 0.5, 1.5);
    double tail2 = exterior_tail(d, quad, 2.0 * R);
    Complex value2 = assemble(bulk1 + ext);
    double diff = std::abs(value2 - value);
    double allowance = norm * (tail + tail2 + 2.0 * err_quad) + 1e-10 * (1.0 + std::abs(value));
    if (diff > allowance) {
      res.converged = false;
      res.note = append_note(res.note, "bulk truncation unstable under R-doubling");
    } else {
      res.note = append_note(res.note, "R-doubling drift " + std::to_string(diff));
    }
    value = value2;
    tail = tail2;
    res.partials.back() = norm * std::pow(-I_UNIT, double(d.h)) * (bulk1 + ext);
  }

  res.value = value;
  res.error_estimate = norm * (tail + err_quad);
  for (const auto& p : res.partials)
    if (!finite(p)) throw EvaluationError("regularized decomposition produced a non-finite part");
  if (!finite(res.value))
    throw EvaluationError("regularized decomposition produced a non-finite value");
  return res;
}

OscResult eval_oscint(const Symbol& s, const BilinearForm& eta, const std::string& method,
                      const CutoffSpec& cutoff, const OscQuadratureSpec& quad) {
  require(method == "cutoff" || method == "regularized",
          "method must be 'cutoff' or 'regularized'");
  require(s.k() == eta.k, "symbol and bilinear form must share the same k");
  if (s.is_zero_symbol()) {
    OscResult res;
    res.method = method;
    res.note = "zero symbol";
    return res;
  }
  if (s.k() == 1) {
    if (method == "cutoff") return eval_cutoff(s, eta, cutoff, quad);
    return eval_regularized(build_regularization(s, eta, quad.delta, auto_iterations(s)), quad);
  }
  auto split = split_pairs(s, eta);
  if (!split) {
    if (method == "cutoff") return eval_cutoff(s, eta, cutoff, quad);
    throw UnsupportedOrderError(
        "regularized evaluation needs k = 1 or a pair-separable expression symbol over a "
        "diagonal form");
  }
  OscResult res;
  res.method = method;
  res.converged = true;
  Complex total{0.0};
  double err_total = 0.0;
  for (const auto& term : split->terms) {
    Complex prod{1.0};
    double perr = 0.0;
    for (size_t p = 0; p < term.size(); ++p) {
      OscResult rp = eval_oscint(term[p], split->forms[p], method, cutoff, quad);
      perr = (std::abs(prod) + perr) * (std::abs(rp.value) + rp.error_estimate) -
             std::abs(prod) * std::abs(rp.value);
      prod *= rp.value;
      res.converged = res.converged && rp.converged;
    }
    total += prod;
    err_total += perr;
    res.partials.push_back(prod);
  }
  res.value = total;
  res.error_estimate = err_total;
  res.note = "pair-factorized over a diagonal form";
  return res;
}

Complex oscillate_distribution(const ExtendedSymbol& u, const TestFunction& f,
                               const BilinearForm& eta, const std::string& method,
                               const XQuadratureSpec& xq, const CutoffSpec& cutoff,
                               const OscQuadratureSpec& quad) {
  Symbol paired = pair_symbolic_distribution(u, f, xq);
  return eval_oscint(paired, eta, method, cutoff, quad).value;
}

Complex oscint_pure_phase(const BilinearForm& eta, const VecD& u, const VecD& v) {
  require(int(u.size()) == eta.k && int(v.size()) == eta.k,
          "phase vectors must have length k");
  return std::exp(I_UNIT * dot(mat_apply(mat_inverse(eta.A), u), v));
}

VecD radial_power_truncations(double m, int k, const VecD& radii) {
  require(k >= 1, "dimension parameter k must be at least 1");
  double surface = 2.0 * std::pow(PI, k) / std::tgamma(double(k));
  VecD out;
  out.reserve(radii.size());
  for (double R : radii) {
    require(R > 0.0, "truncation radii must be positive");
    Complex v = quad::integrate_adaptive(
        [m, k](double r) {
          return Complex(std::pow(1.0 + r, m) * std::pow(r, 2 * k - 1), 0.0);
        },
        0.0, R, 1e-10);
    out.push_back(surface * v.real());
  }
  return out;
}

}  // namespace warpfield
