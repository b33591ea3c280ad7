#pragma once

#include <vector>

#include "warpfield/extended_symbol.hpp"
#include "warpfield/fock.hpp"
#include "warpfield/grid.hpp"

namespace warpfield {

// On-shell spacetime transforms of a test function over its support box,
//   f̃(k) = ∫ f(x) e^{iη(x,k)} dx,  η = diag(1,-1),
// with plus[p] = f̃(k_p) on the future shell k_p = (ω_p, p) and
// minus[p] = f̃(-k_p). Composite Gauss panels, refined once for the error.
struct OnShellTransforms {
  std::vector<Complex> plus, minus;
  double quad_error = 0.0;  // max |refined - coarse| across entries
};
OnShellTransforms on_shell_transforms(const TestFunction& f, const ModeLattice& lattice);

struct FieldOperatorResult {
  FockOperator op;
  double leakage = 0.0;  // Frobenius norm of the creation block cut off at the boundary
  double quad_error = 0.0;
};

// Φ(f) = Σ_p (2ω_p)^{-1/2} [ f̃(k_p)·a†_p + f̃(-k_p)·a_p ]. Hermitian for real f;
// in general Φ(f)† = Φ(f̄) holds exactly because both ladder truncations drop
// the same boundary transitions.
FieldOperatorResult build_field_operator(const TestFunction& f, const FockBasis& basis);

// assembly from precomputed transforms (they depend only on the lattice, so
// one set serves several bases over it)
FieldOperatorResult build_field_operator(const OnShellTransforms& t, const FockBasis& basis);

// U(a) = e^{iη(a,P)}: diagonal, phase per basis state from its summed on-shell
// momentum; U(a)Ω = Ω and U(a)U(b) = U(a+b) hold exactly.
FockOperator translation_unitary(const VecD& a, const FockBasis& basis);

struct NPointResult {
  Complex value{0.0};
  bool headroom_ok = true;   // field-factor count fits below the total cutoff
  double leakage = 0.0;      // |value in a one-shell-larger basis - value|
  double quad_error = 0.0;
};

// <Ψ, Φ(f₁)…Φ(f_n) Ψ>; Ψ must be normalized. The leakage is measured, not
// estimated: the product is recomputed in a basis enlarged by n particles.
NPointResult npoint(const std::vector<Complex>& psi, const std::vector<TestFunction>& fs,
                    const FockBasis& basis);

// Every truncated-Fock vector is entire under a ↦ U(a) (finite diagonal
// phases); the certificate records the largest total momentum in the support,
// which bounds derivative growth: ‖D_a^β U(a)Ψ‖ ≤ max‖P‖^{|β|}.
struct SmoothnessCertificate {
  bool smooth = true;
  double max_p_norm = 0.0;
  VecD argmax_momentum{0.0, 0.0};
};
SmoothnessCertificate smoothness_certificate(const std::vector<Complex>& psi,
                                             const FockBasis& basis);

// ω₂(f,g) = Σ_p (2ω_p)^{-1} f̃(-k_p) g̃(k_p): the direct mode-sum pairing,
// an independent evaluation path for the vacuum two-point function
struct TwoPointValue {
  Complex value{0.0};
  double quad_error = 0.0;
};
TwoPointValue twopoint_modesum(const TestFunction& f, const TestFunction& g,
                               const ModeLattice& lattice);

// W₂(z) = Σ_p (2ω_p)^{-1} e^{-iη(z,k_p)} sampled over the box (z = x - y): the
// vacuum two-point kernel as a grid distribution, singular covectors on the
// future shell
GridDistribution sample_vacuum_twopoint(const ModeLattice& lattice, const GridBox& box,
                                        const std::vector<int>& resolution);

}  // namespace warpfield
