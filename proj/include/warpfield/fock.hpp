#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warpfield/util.hpp"

namespace warpfield {

// Symmetric finite momentum lattice {±j·Δp : j = 1..M} for a free scalar field
// of mass m > 0 in d = 2 Minkowski spacetime, ω_p = sqrt(p² + m²). The strictly
// positive mass keeps every frequency away from the 2-d infrared divergence.
struct ModeLattice {
  double mass = 1.0;
  double delta_p = 0.35;
  VecD momenta;  // ascending, zero excluded, symmetric under sign flip

  static ModeLattice create(double mass = 1.0, double delta_p = 0.35, int half_modes = 2);

  int mode_count() const { return int(momenta.size()); }
  double omega(int mode) const;
  VecD on_shell(int mode) const;  // future mass-shell covector (ω_p, p)
};

// Occupation tuples over the lattice modes with per-mode occupancy <= n_max and
// total particle number <= n_total; the vacuum (all zeros) is index 0, then
// states sort by (total, lexicographic). The set is downward closed: removing a
// particle never leaves it, so only creation amplitudes are truncated.
struct FockBasis {
  ModeLattice lattice;
  int n_max = 2;
  int n_total = 4;
  std::vector<std::vector<int>> states;

  static FockBasis create(const ModeLattice& lattice, int n_max = 2, int n_total = 4);

  size_t dimension() const { return states.size(); }
  std::optional<size_t> index_of(const std::vector<int>& occupation) const;
  int total_number(size_t i) const;
  VecD total_momentum(size_t i) const;  // summed on-shell covector of the tuple

 private:
  std::map<std::vector<int>, size_t> index_;
};

// Dense operator on the truncated Fock space.
struct FockOperator {
  size_t dim = 0;
  std::vector<Complex> a;  // row-major dim×dim

  static FockOperator zero(size_t dim);
  static FockOperator identity(size_t dim);

  Complex& at(size_t i, size_t j) { return a[i * dim + j]; }
  const Complex& at(size_t i, size_t j) const { return a[i * dim + j]; }
};

FockOperator op_add(const FockOperator& x, const FockOperator& y);
FockOperator op_scale(Complex c, const FockOperator& x);
FockOperator op_mul(const FockOperator& x, const FockOperator& y);
FockOperator op_adjoint(const FockOperator& x);
std::vector<Complex> op_apply(const FockOperator& x, const std::vector<Complex>& v);
double op_frobenius(const FockOperator& x);
double op_max_abs_diff(const FockOperator& x, const FockOperator& y);

Complex inner(const std::vector<Complex>& x, const std::vector<Complex>& y);

// Truncated ladder matrices: <s - e_p| a_p |s> = sqrt(n_p); the creator is the
// exact transpose, so transitions that would leave the basis are dropped on
// both sides consistently.
FockOperator annihilator(const FockBasis& basis, int mode);
FockOperator creator(const FockBasis& basis, int mode);

// flat binary complex64 (float32 re/im) with a JSON sidecar, mirroring the grid
// serialization layout
void write_operator(const FockOperator& op, const std::string& sidecar_path);
FockOperator read_operator(const std::string& sidecar_path);

}  // namespace warpfield
