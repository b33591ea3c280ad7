#include "warpfield/warp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "warpfield/expressions.hpp"

namespace warpfield {

namespace {

MatD minkowski_matrix(int d) {
  MatD eta(d, d);
  eta(0, 0) = 1.0;
  for (int i = 1; i < d; ++i) eta(i, i) = -1.0;
  return eta;
}

VecD eta_apply(const VecD& x) {
  VecD y = x;
  for (size_t i = 1; i < y.size(); ++i) y[i] = -y[i];
  return y;
}

double admissibility_residual(const MatD& q) {
  const MatD m = mat_mul(minkowski_matrix(q.rows), q);
  double r = 0.0;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) r = std::max(r, std::abs(m(i, j) + m(j, i)));
  return r;
}

// orthonormal basis of the row space of Q (= range(Qᵀ)) by modified Gram-Schmidt
std::vector<VecD> row_space_basis(const MatD& q) {
  std::vector<VecD> basis;
  for (int r = 0; r < q.rows; ++r) {
    VecD w(size_t(q.cols));
    for (int c = 0; c < q.cols; ++c) w[c] = q(r, c);
    for (const auto& b : basis) w = vec_sub(w, vec_scale(dot(w, b), b));
    const double n = norm2(w);
    if (n > 1e-10) basis.push_back(vec_scale(1.0 / n, w));
  }
  return basis;
}

// θ- and ξ-coefficients of the pure phase behind entry (i, j)
void phase_vectors(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj, VecD& u, VecD& v) {
  u = mat_apply(mat_transpose(Q.q), eta_apply(dP));
  v = eta_apply(Pj);
}

Complex oscint_phase_value(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj,
                           const std::string& method, const CutoffSpec& cutoff,
                           const OscQuadratureSpec& quad) {
  VecD u, v;
  phase_vectors(Q, dP, Pj, u, v);
  const int d = Q.dimension();
  // keep the exponent a plain sum of single-variable terms so the evaluator
  // can factorize it pairwise
  std::vector<expr::ExprPtr> lin;
  for (int c = 0; c < d; ++c) {
    if (u[c] != 0.0) lin.push_back(expr::mul({expr::constant(I_UNIT * u[c]), expr::var(c)}));
    if (v[c] != 0.0) lin.push_back(expr::mul({expr::constant(I_UNIT * v[c]), expr::var(d + c)}));
  }
  expr::ExprPtr e = lin.empty() ? expr::constant(1.0)
                                : expr::exp(lin.size() == 1 ? lin[0] : expr::add(lin));
  const auto s = Symbol::from_expression(e, d, 0.0, 0.0);
  const auto form = (d == 2) ? BilinearForm::minkowski2()
                             : BilinearForm::from_matrix(minkowski_matrix(d));
  return eval_oscint(s, form, method, cutoff, quad).value;
}

}  // namespace

DeformationMatrix DeformationMatrix::zero(int d) {
  require(d >= 1, "DeformationMatrix: dimension must be positive");
  DeformationMatrix m;
  m.q = MatD(d, d);
  return m;
}

DeformationMatrix DeformationMatrix::standard2(double kappa) {
  DeformationMatrix m;
  m.q = MatD(2, 2);
  m.q(0, 1) = kappa;
  m.q(1, 0) = kappa;
  return m;
}

DeformationMatrix DeformationMatrix::from_matrix(const MatD& q) {
  require(q.rows >= 1 && q.rows == q.cols, "DeformationMatrix: square matrix required");
  require(admissibility_residual(q) <= 1e-12,
          "DeformationMatrix: ηQ must be antisymmetric to 1e-12");
  DeformationMatrix m;
  m.q = q;
  return m;
}

LorentzElement LorentzElement::boost2(double rapidity) {
  LorentzElement l;
  l.lambda = MatD(2, 2);
  l.lambda(0, 0) = l.lambda(1, 1) = std::cosh(rapidity);
  l.lambda(0, 1) = l.lambda(1, 0) = std::sinh(rapidity);
  return l;
}

LorentzElement LorentzElement::from_matrix(const MatD& m) {
  require(m.rows >= 2 && m.rows == m.cols, "LorentzElement: square matrix, d >= 2");
  const MatD eta = minkowski_matrix(m.rows);
  const MatD res = mat_mul(mat_transpose(m), mat_mul(eta, m));
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      require(std::abs(res(i, j) - eta(i, j)) <= 1e-12,
              "LorentzElement: metric preservation violated");
  require(std::abs(mat_det(m) - 1.0) <= 1e-10, "LorentzElement: proper (det = 1) required");
  require(m(0, 0) >= 1.0 - 1e-12, "LorentzElement: orthochronous (Λ⁰₀ ≥ 1) required");
  LorentzElement l;
  l.lambda = m;
  return l;
}

DeformationMatrix lorentz_transport(const DeformationMatrix& Q, const LorentzElement& L) {
  require(Q.dimension() == L.dimension(), "lorentz_transport: dimension mismatch");
  const MatD eta = minkowski_matrix(Q.dimension());
  const MatD tensor = mat_mul(Q.q, eta);
  const MatD moved = mat_mul(L.lambda, mat_mul(tensor, mat_transpose(L.lambda)));
  const MatD qp = mat_mul(moved, eta);
  if (admissibility_residual(qp) > 1e-12)
    throw ConditioningError("lorentz_transport: transported matrix lost admissibility");
  DeformationMatrix out;
  out.q = qp;
  return out;
}

double warp_phase(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj) {
  require(int(dP.size()) == Q.dimension() && int(Pj.size()) == Q.dimension(),
          "warp_phase: dimension mismatch");
  return minkowski_pair(dP, mat_apply(Q.q, Pj));
}

double restricted_warp_phase(const DeformationMatrix& Q, const VecD& dP, const VecD& Pj) {
  require(int(dP.size()) == Q.dimension() && int(Pj.size()) == Q.dimension(),
          "restricted_warp_phase: dimension mismatch");
  VecD u, v;
  phase_vectors(Q, dP, Pj, u, v);
  const VecD ev = eta_apply(v);
  double phase = 0.0;
  for (const auto& b : row_space_basis(Q.q)) phase += dot(u, b) * dot(b, ev);
  return phase;
}

FockOperator warp_operator(const FockOperator& A, const DeformationMatrix& Q,
                           const FockBasis& basis, const WarpSettings& settings) {
  require(A.dim == basis.dimension(), "warp_operator: operator does not match the basis");
  require(Q.dimension() == 2, "warp_operator: d = 2 momenta");
  const bool closed = settings.method == "closed";
  require(closed || settings.method == "oscint-cutoff" || settings.method == "oscint-regularized",
          "warp_operator: unknown method");

  std::vector<VecD> momenta(basis.dimension());
  for (size_t i = 0; i < basis.dimension(); ++i) momenta[i] = basis.total_momentum(i);

  // distinct (ΔP, P_j) pairs are few; the numeric path caches by quantized key
  std::map<std::vector<long long>, Complex> cache;
  const auto numeric_phase = [&](const VecD& dP, const VecD& Pj) {
    std::vector<long long> key;
    for (double x : dP) key.push_back(llround(x * 1e12));
    for (double x : Pj) key.push_back(llround(x * 1e12));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const Complex val = oscint_phase_value(Q, dP, Pj, settings.method.substr(7),
                                           settings.cutoff, settings.quad);
    cache.emplace(std::move(key), val);
    return val;
  };

  FockOperator out = FockOperator::zero(A.dim);
  for (size_t j = 0; j < A.dim; ++j) {
    for (size_t i = 0; i < A.dim; ++i) {
      const Complex a = A.at(i, j);
      if (a == Complex(0.0)) continue;
      const VecD dP = vec_sub(momenta[i], momenta[j]);
      const Complex factor = closed ? std::polar(1.0, warp_phase(Q, dP, momenta[j]))
                                    : numeric_phase(dP, momenta[j]);
      out.at(i, j) = a * factor;
    }
  }
  return out;
}

WarpCheckReport alternate_form_check(const FockOperator& A, const DeformationMatrix& Q,
                                     const FockBasis& basis, std::uint64_t seed) {
  require(A.dim == basis.dimension(), "alternate_form_check: operator does not match the basis");
  std::mt19937_64 rng(seed);
  std::vector<size_t> columns{0};
  if (A.dim > 1)
    columns.push_back(1 + std::uniform_int_distribution<size_t>(0, A.dim - 2)(rng));

  WarpCheckReport rep;
  for (size_t j : columns) {
    const VecD pj = basis.total_momentum(j);
    for (size_t i = 0; i < A.dim; ++i) {
      const Complex a = A.at(i, j);
      if (a == Complex(0.0)) continue;
      const VecD pi = basis.total_momentum(i);
      const VecD dP = vec_sub(pi, pj);
      const Complex first = std::polar(1.0, warp_phase(Q, dP, pj));
      const Complex second = std::polar(1.0, warp_phase(Q, dP, pi));
      rep.max_abs_discrepancy = std::max(rep.max_abs_discrepancy, std::abs(a) * std::abs(first - second));
      ++rep.entries_checked;
    }
  }
  return rep;
}

WarpCheckReport kernel_restriction_check(const FockOperator& A, const DeformationMatrix& Q,
                                         const FockBasis& basis) {
  require(A.dim == basis.dimension(), "kernel_restriction_check: operator does not match the basis");
  WarpCheckReport rep;
  for (size_t j = 0; j < A.dim; ++j) {
    const VecD pj = basis.total_momentum(j);
    for (size_t i = 0; i < A.dim; ++i) {
      const Complex a = A.at(i, j);
      if (a == Complex(0.0)) continue;
      const VecD dP = vec_sub(basis.total_momentum(i), pj);
      const Complex full = std::polar(1.0, warp_phase(Q, dP, pj));
      const Complex restricted = std::polar(1.0, restricted_warp_phase(Q, dP, pj));
      rep.max_abs_discrepancy =
          std::max(rep.max_abs_discrepancy, std::abs(a) * std::abs(full - restricted));
      ++rep.entries_checked;
    }
  }
  return rep;
}

WarpedSymbolResult warped_symbol(const std::vector<Complex>& psi1,
                                 const std::vector<Complex>& psi2, const TestFunction& f,
                                 const DeformationMatrix& Q, const FockBasis& basis) {
  require(psi1.size() == basis.dimension() && psi2.size() == basis.dimension(),
          "warped_symbol: state dimension mismatch");
  require(Q.dimension() == 2, "warped_symbol: d = 2 momenta");

  const auto fr = build_field_operator(f, basis);
  std::vector<VecD> momenta(basis.dimension());
  for (size_t i = 0; i < basis.dimension(); ++i) momenta[i] = basis.total_momentum(i);

  std::vector<expr::ExprPtr> terms;
  for (size_t j = 0; j < basis.dimension(); ++j) {
    if (psi2[j] == Complex(0.0)) continue;
    for (size_t i = 0; i < basis.dimension(); ++i) {
      const Complex c = std::conj(psi1[i]) * psi2[j] * fr.op.at(i, j);
      if (c == Complex(0.0)) continue;
      VecD u, v;
      phase_vectors(Q, vec_sub(momenta[i], momenta[j]), momenta[j], u, v);
      std::vector<expr::ExprPtr> lin;
      for (int comp = 0; comp < 2; ++comp) {
        if (u[comp] != 0.0)
          lin.push_back(expr::mul({expr::constant(I_UNIT * u[comp]), expr::var(comp)}));
        if (v[comp] != 0.0)
          lin.push_back(expr::mul({expr::constant(I_UNIT * v[comp]), expr::var(2 + comp)}));
      }
      if (lin.empty()) {
        terms.push_back(expr::constant(c));
      } else {
        terms.push_back(expr::mul(
            {expr::constant(c), expr::exp(lin.size() == 1 ? lin[0] : expr::add(lin))}));
      }
    }
  }

  WarpedSymbolResult out;
  const auto e = terms.empty() ? expr::constant(0.0) : expr::add(terms);
  out.symbol = Symbol::from_expression(e, 2, 0.0, 0.0);
  out.leakage = fr.leakage;
  out.quad_error = fr.quad_error;
  return out;
}

WarpedNPointResult warped_npoint(const WarpedNPointSpec& spec, const FockBasis& basis) {
  require(spec.psi.size() == basis.dimension(), "warped_npoint: state dimension mismatch");
  require(std::abs(inner(spec.psi, spec.psi) - Complex(1.0)) < 1e-9,
          "warped_npoint: state must be normalized");
  const int n = int(spec.factors.size());
  require(n >= 1, "warped_npoint: at least one factor");
  for (const auto& fac : spec.factors)
    require(fac.q.dimension() == 2, "warped_npoint: d = 2 deformations");

  int psi_max_number = 0;
  for (size_t i = 0; i < spec.psi.size(); ++i)
    if (std::abs(spec.psi[i]) > 0.0) psi_max_number = std::max(psi_max_number, basis.total_number(i));

  WarpedNPointResult r;
  r.headroom_ok = psi_max_number + n <= basis.n_total;

  std::vector<OnShellTransforms> transforms;
  transforms.reserve(spec.factors.size());
  for (const auto& fac : spec.factors)
    transforms.push_back(on_shell_transforms(fac.f, basis.lattice));

  const auto evaluate = [&](const FockBasis& b, const std::vector<Complex>& state,
                            const WarpSettings& settings, double& quad_error) {
    auto v = state;
    for (int i = n - 1; i >= 0; --i) {
      const auto fr = build_field_operator(transforms[i], b);
      quad_error = std::max(quad_error, fr.quad_error);
      v = op_apply(warp_operator(fr.op, spec.factors[i].q, b, settings), v);
    }
    return inner(state, v);
  };

  r.value = evaluate(basis, spec.psi, spec.settings, r.quad_error);

  const auto big = FockBasis::create(basis.lattice, std::min(basis.n_max + n, basis.n_total + n),
                                     basis.n_total + n);
  std::vector<Complex> embedded(big.dimension(), Complex(0.0));
  for (size_t i = 0; i < spec.psi.size(); ++i) {
    if (spec.psi[i] == Complex(0.0)) continue;
    auto idx = big.index_of(basis.states[i]);
    require(idx.has_value(), "warped_npoint: embedding failed");
    embedded[*idx] = spec.psi[i];
  }
  double ignored = 0.0;
  r.leakage = std::abs(evaluate(big, embedded, spec.settings, ignored) - r.value);

  if (spec.cross_check) {
    require(n <= 2, "warped_npoint: oscint cross-check is limited to n <= 2");
    WarpSettings numeric = spec.settings;
    numeric.method = spec.cross_check_method;
    double ignored2 = 0.0;
    r.cross_check_gap = std::abs(evaluate(basis, spec.psi, numeric, ignored2) - r.value);
  }
  return r;
}

BoostResample boost_resample(const ModeLattice& lattice, double rapidity) {
  const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
  BoostResample r;
  std::vector<bool> hit(size_t(lattice.mode_count()), false);
  for (int p = 0; p < lattice.mode_count(); ++p) {
    const double w = lattice.omega(p);
    const double bw = ch * w + sh * lattice.momenta[p];
    const double bk = sh * w + ch * lattice.momenta[p];
    int best = 0;
    for (int m = 1; m < lattice.mode_count(); ++m)
      if (std::abs(lattice.momenta[m] - bk) < std::abs(lattice.momenta[best] - bk)) best = m;
    r.mode_map.push_back(best);
    r.max_covector_error = std::max(
        r.max_covector_error, std::hypot(lattice.omega(best) - bw, lattice.momenta[best] - bk));
    if (hit[best]) r.injective = false;
    hit[best] = true;
  }
  return r;
}

FockOperator lorentz_unitary(const BoostResample& resample, const FockBasis& basis) {
  require(resample.injective, "lorentz_unitary: resampling map must be injective");
  require(int(resample.mode_map.size()) == basis.lattice.mode_count(),
          "lorentz_unitary: map does not match the lattice");
  FockOperator u = FockOperator::zero(basis.dimension());
  for (size_t j = 0; j < basis.dimension(); ++j) {
    std::vector<int> moved(basis.states[j].size(), 0);
    for (size_t p = 0; p < basis.states[j].size(); ++p)
      moved[resample.mode_map[p]] = basis.states[j][p];
    const auto idx = basis.index_of(moved);
    require(idx.has_value(), "lorentz_unitary: permuted tuple left the basis");
    u.at(*idx, j) = Complex(1.0);
  }
  return u;
}

ModeLattice boosted_lattice(const ModeLattice& lattice, double rapidity) {
  const double ch = std::cosh(rapidity), sh = std::sinh(rapidity);
  ModeLattice out = lattice;
  for (int p = 0; p < lattice.mode_count(); ++p)
    out.momenta[p] = sh * lattice.omega(p) + ch * lattice.momenta[p];
  return out;
}

BoostCovarianceReport boost_covariance_report(const TestFunction& f, const DeformationMatrix& Q,
                                              double rapidity, const FockBasis& basis) {
  require(Q.dimension() == 2, "boost_covariance_report: d = 2");
  BoostCovarianceReport rep;
  rep.resample = boost_resample(basis.lattice, rapidity);

  // ladder coefficients are shared: covariance moves only the momenta that
  // feed the warp phases
  const auto op = build_field_operator(f, basis).op;
  const auto base = warp_operator(op, Q, basis);

  const auto exact = FockBasis::create(boosted_lattice(basis.lattice, rapidity), basis.n_max,
                                       basis.n_total);
  rep.exact_lattice_gap = op_max_abs_diff(warp_operator(op, Q, exact), base);

  ModeLattice snapped = basis.lattice;
  for (int p = 0; p < snapped.mode_count(); ++p)
    snapped.momenta[p] = basis.lattice.momenta[rep.resample.mode_map[p]];
  const auto resampled = FockBasis::create(snapped, basis.n_max, basis.n_total);
  rep.resampled_gap =
      op_max_abs_diff(warp_operator(op, Q, resampled), warp_operator(op, Q, exact));

  double a_max = 0.0;
  for (const auto& z : op.a) a_max = std::max(a_max, std::abs(z));
  double q_norm = 0.0;
  for (double x : Q.q.a) q_norm += x * x;
  q_norm = std::sqrt(q_norm);
  double p_max = 0.0, dp_max = 0.0;
  for (size_t i = 0; i < exact.dimension(); ++i)
    p_max = std::max(p_max, norm2(exact.total_momentum(i)));
  for (int p = 0; p < exact.lattice.mode_count(); ++p)
    dp_max = std::max(dp_max, norm2(exact.lattice.on_shell(p)));
  const double eps = rep.resample.max_covector_error;
  rep.budget = a_max * q_norm * eps * (p_max + double(basis.n_total) * (dp_max + eps));
  return rep;
}

}  // namespace warpfield
