#include "warpfield/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace warpfield {

void validate_type(double rho) {
  require(rho > -1.0 && rho <= 1.0, "symbol type rho must lie in (-1, 1]");
}

BilinearForm BilinearForm::standard(int k) {
  require(k >= 1, "BilinearForm: k >= 1 required");
  BilinearForm b;
  b.k = k;
  b.A = MatD::identity(k);
  return b;
}

BilinearForm BilinearForm::from_matrix(const MatD& A) {
  require(A.rows == A.cols && A.rows >= 1, "BilinearForm: square matrix required");
  double det = mat_det(A);
  if (std::abs(det) < 1e-12)
    throw GeometryError("BilinearForm: |det| below degeneracy floor 1e-12");
  BilinearForm b;
  b.k = A.rows;
  b.A = A;
  return b;
}

BilinearForm BilinearForm::minkowski2() {
  MatD A = MatD::identity(2);
  A(1, 1) = -1.0;
  return from_matrix(A);
}

double BilinearForm::operator()(const VecD& theta, const VecD& xi) const {
  require(int(theta.size()) == k && int(xi.size()) == k, "BilinearForm: dimension mismatch");
  double s = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) s += theta[i] * A(i, j) * xi[j];
  return s;
}

bool BilinearForm::is_diagonal(double tol) const {
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && std::abs(A(i, j)) > tol) return false;
  return true;
}

Symbol Symbol::from_expression(expr::ExprPtr e, int k, double m, double rho) {
  require(k >= 1, "Symbol: k >= 1 required");
  validate_type(rho);
  require(expr::max_var_index(e) < 2 * k, "Symbol: expression uses variables beyond 2k");
  Symbol s;
  s.k_ = k;
  s.m_ = m;
  s.rho_ = rho;
  s.max_order_ = 64;
  s.expr_ = std::move(e);
  s.deriv_cache_ = std::make_shared<std::map<std::vector<int>, expr::ExprPtr>>();
  return s;
}

Symbol Symbol::from_callable(EvalFn f, int k, double m, double rho, int max_derivative_order) {
  require(k >= 1, "Symbol: k >= 1 required");
  require(max_derivative_order >= 0, "Symbol: negative derivative ceiling");
  validate_type(rho);
  Symbol s;
  s.k_ = k;
  s.m_ = m;
  s.rho_ = rho;
  s.max_order_ = max_derivative_order;
  s.fn_ = std::move(f);
  return s;
}

Symbol Symbol::zero(int k) { return from_expression(expr::constant(0.0), k, -1e9, 1.0); }

Symbol Symbol::with_class(double m, double rho) const {
  validate_type(rho);
  Symbol s = *this;
  s.m_ = m;
  s.rho_ = rho;
  return s;
}

expr::ExprPtr Symbol::derivative_expr(const MultiIndex& alpha, const MultiIndex& beta) const {
  require(expr_ != nullptr, "Symbol::derivative_expr: not expression-backed");
  std::vector<int> key;
  key.reserve(2 * k_);
  key.insert(key.end(), alpha.begin(), alpha.end());
  key.insert(key.end(), beta.begin(), beta.end());
  auto it = deriv_cache_->find(key);
  if (it != deriv_cache_->end()) return it->second;
  expr::ExprPtr d = expr_;
  for (int i = 0; i < k_; ++i)      // θ variables are 0..k-1
    for (int rep = 0; rep < beta[i]; ++rep) d = expr::derivative(d, i);
  for (int i = 0; i < k_; ++i)      // ξ variables are k..2k-1
    for (int rep = 0; rep < alpha[i]; ++rep) d = expr::derivative(d, k_ + i);
  (*deriv_cache_)[key] = d;
  return d;
}

Complex Symbol::eval(const VecD& pt) const {
  return eval(pt, mi_zero(k_), mi_zero(k_));
}

Complex Symbol::eval(const VecD& pt, const MultiIndex& alpha, const MultiIndex& beta) const {
  require(int(pt.size()) == 2 * k_, "Symbol::eval: point must have length 2k");
  require(int(alpha.size()) == k_ && int(beta.size()) == k_,
          "Symbol::eval: multi-index dimension mismatch");
  int ord = mi_order(alpha) + mi_order(beta);
  if (expr_) {
    // D^α = (-i)^{|α|} ∂^α
    Complex phase = std::pow(Complex(0.0, -1.0), double(ord));
    return phase * expr::eval(derivative_expr(alpha, beta), pt);
  }
  require(fn_ != nullptr, "Symbol::eval: empty symbol");
  if (ord <= max_order_) return fn_(pt, alpha, beta);
  return eval_fd(pt, alpha, beta);
}

// central finite differences for one derivative order beyond the analytic ceiling,
// recursing until the ceiling is reached; step h = tol^{1/3} (1 + ‖pt‖)
Complex Symbol::eval_fd(const VecD& pt, MultiIndex alpha, MultiIndex beta) const {
  int ord = mi_order(alpha) + mi_order(beta);
  if (ord > max_order_ + 8)
    throw UnsupportedOrderError("Symbol::eval: derivative order too far beyond analytic ceiling");
  if (ord <= max_order_) return fn_(pt, alpha, beta);
  double h = std::cbrt(1e-12) * (1.0 + norm2(pt));
  // reduce the first nonzero entry; θ entries map to point slots 0..k-1, ξ to k..2k-1
  for (int i = 0; i < k_; ++i) {
    if (beta[i] > 0) {
      beta[i] -= 1;
      VecD up = pt, dn = pt;
      up[i] += h;
      dn[i] -= h;
      // D = -i ∂ applied to the lower-order derivative
      return Complex(0.0, -1.0) * (eval_fd(up, alpha, beta) - eval_fd(dn, alpha, beta)) /
             (2.0 * h);
    }
  }
  for (int i = 0; i < k_; ++i) {
    if (alpha[i] > 0) {
      alpha[i] -= 1;
      VecD up = pt, dn = pt;
      up[k_ + i] += h;
      dn[k_ + i] -= h;
      return Complex(0.0, -1.0) * (eval_fd(up, alpha, beta) - eval_fd(dn, alpha, beta)) /
             (2.0 * h);
    }
  }
  return fn_(pt, alpha, beta);  // ord == 0
}

std::vector<VecD> direction_grid(int k, int n_angles) {
  std::vector<VecD> dirs;
  if (k == 1) {
    for (int i = 0; i < n_angles; ++i) {
      double phi = 2 * PI * i / n_angles;
      dirs.push_back({std::cos(phi), std::sin(phi)});
    }
    return dirs;
  }
  // product layout: split angle between θ-block and ξ-block, then a circle grid
  // inside each block (k = 2); higher k reuses the same recursive split per block.
  require(k == 2, "direction_grid: k > 2 not supported");
  int n_split = std::max(4, n_angles / 4);
  int n_block = std::max(8, n_angles / 2);
  for (int a = 0; a < n_split; ++a) {
    double phi = PI * 0.5 * a / (n_split - 1);  // [0, π/2]
    double cb = std::cos(phi), sb = std::sin(phi);
    for (int i = 0; i < n_block; ++i) {
      double u = 2 * PI * i / n_block;
      for (int j = 0; j < n_block; ++j) {
        double v = 2 * PI * j / n_block;
        dirs.push_back({cb * std::cos(u), cb * std::sin(u), sb * std::cos(v), sb * std::sin(v)});
      }
    }
  }
  return dirs;
}

namespace {

VecD radial_samples(const SamplingSpec& spec) {
  VecD rs;
  rs.push_back(0.0);
  double lo = std::log(spec.r_min), hi = std::log(spec.r_max);
  for (int i = 0; i < spec.n_radii; ++i)
    rs.push_back(std::exp(lo + (hi - lo) * i / (spec.n_radii - 1)));
  return rs;
}

// Points with one coordinate pinned at O(1) while the others sit at radius r.
// Rays alone grow every coordinate together and miss anisotropic growth, e.g.
// a θ-independent decaying symbol looks like any type ρ along rays but only
// satisfies the ρ = 0 bounds once θ runs off with ξ held fixed.
std::vector<VecD> pinned_points(int k, double r) {
  std::vector<VecD> pts;
  if (r <= 0.0) return pts;
  int n = 2 * k;
  const double pins[] = {0.5, -0.5, 1.0, -1.0};
  for (int i = 0; i < n; ++i) {
    std::vector<VecD> dirs;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      VecD e(n, 0.0);
      e[j] = 1.0;
      dirs.push_back(e);
      e[j] = -1.0;
      dirs.push_back(e);
    }
    if (n > 2) {
      VecD diag(n, 1.0 / std::sqrt(double(n - 1)));
      diag[i] = 0.0;
      dirs.push_back(diag);
      dirs.push_back(vec_scale(-1.0, diag));
    }
    for (double c : pins) {
      for (const auto& d : dirs) {
        VecD pt = vec_scale(r, d);
        pt[i] = c;
        pts.push_back(std::move(pt));
      }
    }
  }
  return pts;
}

}  // namespace

SeminormEstimate estimate_seminorm(const Symbol& s, const MultiIndex& alpha,
                                   const MultiIndex& beta, const SamplingSpec& spec) {
  return estimate_seminorm(s, alpha, beta, s.order(), s.type(), spec);
}

SeminormEstimate estimate_seminorm(const Symbol& s, const MultiIndex& alpha,
                                   const MultiIndex& beta, double m, double rho,
                                   const SamplingSpec& spec) {
  validate_type(rho);
  int k = s.k();
  int n_ang = k == 1 ? spec.n_angles : std::max(8, spec.n_angles / 2);
  std::vector<VecD> dirs = direction_grid(k, n_ang);
  VecD radii = radial_samples(spec);
  double w = -m + rho * (mi_order(alpha) + mi_order(beta));

  SeminormEstimate est;
  est.alpha = alpha;
  est.beta = beta;
  est.m = m;
  est.rho = rho;
  est.argmax = VecD(2 * k, 0.0);
  for (double r : radii) {
    if (r == 0.0) {
      VecD origin(2 * k, 0.0);
      double v = std::abs(s.eval(origin, alpha, beta));
      if (v > est.value) { est.value = v; est.argmax = origin; }
      continue;
    }
    for (const auto& d : dirs) {
      VecD pt = vec_scale(r, d);
      double v = std::abs(s.eval(pt, alpha, beta)) * std::pow(1.0 + norm2(pt), w);
      if (v > est.value) { est.value = v; est.argmax = pt; }
    }
    for (auto& pt : pinned_points(k, r)) {
      double v = std::abs(s.eval(pt, alpha, beta)) * std::pow(1.0 + norm2(pt), w);
      if (v > est.value) { est.value = v; est.argmax = std::move(pt); }
    }
  }
  return est;
}

MembershipReport verify_membership(const Symbol& s, double m, double rho, int up_to_order,
                                   const SamplingSpec& spec, double growth_tolerance) {
  validate_type(rho);
  int k = s.k();
  int n_ang = k == 1 ? spec.n_angles : std::max(8, spec.n_angles / 2);
  std::vector<VecD> dirs = direction_grid(k, n_ang);
  VecD radii = radial_samples(spec);

  MembershipReport report;
  report.m = m;
  report.rho = rho;
  report.up_to_order = up_to_order;
  report.pass = true;

  const double floor = 1e-280;
  auto alphas = mi_up_to_order(k, up_to_order);
  for (const auto& alpha : alphas) {
    for (const auto& beta : alphas) {
      if (mi_order(alpha) + mi_order(beta) > up_to_order) continue;
      double w = -m + rho * (mi_order(alpha) + mi_order(beta));
      MembershipFit fit;
      fit.alpha = alpha;
      fit.beta = beta;
      // per-radius max ratio over directions
      VecD log_r, log_ratio;
      double c_sup = 0.0;
      bool overflowed = false;
      for (double r : radii) {
        double ratio = 0.0;
        if (r == 0.0) {
          VecD origin(2 * k, 0.0);
          ratio = std::abs(s.eval(origin, alpha, beta));
        } else {
          for (const auto& d : dirs) {
            VecD pt = vec_scale(r, d);
            ratio = std::max(ratio,
                             std::abs(s.eval(pt, alpha, beta)) * std::pow(1.0 + norm2(pt), w));
          }
          for (const auto& pt : pinned_points(k, r))
            ratio = std::max(ratio,
                             std::abs(s.eval(pt, alpha, beta)) * std::pow(1.0 + norm2(pt), w));
        }
        if (!std::isfinite(ratio)) { overflowed = true; break; }
        c_sup = std::max(c_sup, ratio);
        // fit window: top decade of radii
        if (r >= spec.r_max / 10.0 && ratio > floor) {
          log_r.push_back(std::log(1.0 + r));
          log_ratio.push_back(std::log(ratio));
        }
      }
      fit.constant = c_sup;
      if (overflowed) {
        fit.exponent = std::numeric_limits<double>::infinity();
        fit.constant = std::numeric_limits<double>::infinity();
        fit.pass = false;
      } else if (log_r.size() < 4) {
        // decayed below floor across the fit window: super-polynomially small
        fit.all_below_floor = true;
        fit.exponent = -1e9;
        fit.pass = true;
      } else {
        // least-squares slope
        double n = double(log_r.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < log_r.size(); ++i) {
          sx += log_r[i];
          sy += log_ratio[i];
          sxx += log_r[i] * log_r[i];
          sxy += log_r[i] * log_ratio[i];
        }
        fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        fit.pass = fit.exponent <= growth_tolerance;
      }
      if (!fit.pass) report.pass = false;
      report.fits.push_back(std::move(fit));
    }
  }
  return report;
}

Symbol symbol_product(const Symbol& a, const Symbol& b) {
  if (a.k() != b.k()) throw IncompatibilityError("symbol_product: mixed k");
  if (a.type() != b.type()) throw IncompatibilityError("symbol_product: mixed type rho");
  double m = a.order() + b.order();
  double rho = a.type();
  if (a.has_expression() && b.has_expression())
    return Symbol::from_expression(expr::mul({a.expression(), b.expression()}), a.k(), m, rho);
  // Leibniz rule on D-derivatives (binomial weights carry over unchanged)
  int k = a.k();
  Symbol ac = a, bc = b;
  auto f = [ac, bc, k](const VecD& pt, const MultiIndex& alpha, const MultiIndex& beta) {
    Complex sum = 0;
    for (const auto& g : mi_below(alpha)) {
      for (const auto& d : mi_below(beta)) {
        double coef = mi_binomial(alpha, g) * mi_binomial(beta, d);
        sum += coef * ac.eval(pt, g, d) * bc.eval(pt, mi_sub(alpha, g), mi_sub(beta, d));
      }
    }
    return sum;
  };
  int max_ord = std::min(a.max_derivative_order(), b.max_derivative_order());
  return Symbol::from_callable(f, k, m, rho, max_ord);
}

Symbol symbol_derivative(const Symbol& s, const MultiIndex& alpha, const MultiIndex& beta) {
  require(int(alpha.size()) == s.k() && int(beta.size()) == s.k(),
          "symbol_derivative: multi-index dimension mismatch");
  int shift = mi_order(alpha) + mi_order(beta);
  double m = s.order() - s.type() * shift;
  if (s.has_expression()) {
    expr::ExprPtr d = s.derivative_expr(alpha, beta);
    Complex phase = std::pow(Complex(0.0, -1.0), double(shift));
    return Symbol::from_expression(expr::mul({expr::constant(phase), d}), s.k(), m, s.type());
  }
  Symbol sc = s;
  MultiIndex a0 = alpha, b0 = beta;
  auto f = [sc, a0, b0](const VecD& pt, const MultiIndex& alpha, const MultiIndex& beta) {
    MultiIndex a(alpha), b(beta);
    for (size_t i = 0; i < a.size(); ++i) a[i] += a0[i];
    for (size_t i = 0; i < b.size(); ++i) b[i] += b0[i];
    return sc.eval(pt, a, b);
  };
  int max_ord = std::max(0, s.max_derivative_order() - shift);
  return Symbol::from_callable(f, s.k(), m, s.type(), max_ord);
}

namespace {

// ∂^γ (u^q) = Σ_j P_{γ,j}(x) u^{q-j} with u = 1 + ‖x‖²; the polynomials follow
// the chain recursion P_{γ+e_i, j} = ∂_i P_{γ,j} + 2(q-j+1) x_i P_{γ,j-1}
struct RadialPowerTable {
  int n = 2;
  double q = 0.0;
  using Poly = std::map<std::vector<int>, double>;
  std::map<std::vector<int>, std::map<int, Poly>> cache;

  const std::map<int, Poly>& table(const std::vector<int>& gamma) {
    auto it = cache.find(gamma);
    if (it != cache.end()) return it->second;
    std::map<int, Poly> cur;
    if (mi_order(gamma) == 0) {
      cur[0][std::vector<int>(size_t(n), 0)] = 1.0;
    } else {
      int i = 0;
      while (gamma[size_t(i)] == 0) ++i;
      std::vector<int> prev_g = gamma;
      prev_g[size_t(i)] -= 1;
      const auto& prev = table(prev_g);
      for (const auto& [j, poly] : prev)
        for (const auto& [e, c] : poly) {
          if (e[size_t(i)] > 0) {
            auto e2 = e;
            e2[size_t(i)] -= 1;
            cur[j][e2] += c * e[size_t(i)];
          }
          auto e2 = e;
          e2[size_t(i)] += 1;
          cur[j + 1][e2] += 2.0 * (q - j) * c;
        }
    }
    return cache.emplace(gamma, std::move(cur)).first->second;
  }
};

}  // namespace

Symbol radial_power_symbol(int k, double m) {
  require(k >= 1, "radial_power_symbol: k must be at least 1");
  auto tab = std::make_shared<RadialPowerTable>();
  tab->n = 2 * k;
  tab->q = m / 2.0;
  auto f = [tab, k](const VecD& pt, const MultiIndex& alpha, const MultiIndex& beta) -> Complex {
    std::vector<int> gamma(size_t(2 * k));
    for (int i = 0; i < k; ++i) {
      gamma[size_t(i)] = beta[size_t(i)];
      gamma[size_t(k + i)] = alpha[size_t(i)];
    }
    const auto& terms = tab->table(gamma);
    double u = 1.0;
    for (double x : pt) u += x * x;
    double acc = 0.0;
    for (const auto& [j, poly] : terms) {
      double pj = 0.0;
      for (const auto& [e, c] : poly) {
        double t = c;
        for (size_t jj = 0; jj < e.size(); ++jj)
          for (int rep = 0; rep < e[jj]; ++rep) t *= pt[jj];
        pj += t;
      }
      acc += pj * std::pow(u, tab->q - j);
    }
    return std::pow(Complex(0.0, -1.0), double(mi_order(gamma))) * acc;
  };
  return Symbol::from_callable(f, k, m, 1.0, 64);
}

}  // namespace warpfield
