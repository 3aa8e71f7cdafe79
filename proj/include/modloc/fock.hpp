#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modloc/subspace.hpp"
#include "modloc/types.hpp"

namespace modloc {

// ---------------------------------------------------------------------------
// Fermionic Fock space over ℂ^n, realized exactly on ℂ^(2^n).
//
// The basis is indexed by subsets of the n modes, encoded as bit masks: bit k
// of the index set means mode k is occupied.  Index 0 is the vacuum.  Ladder
// operators follow the ordered-product convention: annihilating mode k from a
// state picks up one minus sign per occupied mode with index below k.  The
// realization depends on this ordering only up to unitary equivalence; all
// exposed identities are ordering-independent.
// ---------------------------------------------------------------------------
struct fermi_fock_t {
  index_t n_modes = 0;
  index_t dim() const { return static_cast<index_t>(1) << n_modes; }
  int particle_number(index_t mask) const;
  cvec_t vacuum() const;
};

// Guard: the total dimension 2^n must not exceed dim_max (default 256).
fermi_fock_t make_fermi_fock(index_t n_modes, index_t dim_max = 256);

// Ladder operator removing one quantum from the given mode.
cmat_t annihilator(const fermi_fock_t& f, index_t mode);

// Self-adjoint field operator a(ξ) + a†(ξ): the creation part is linear in ξ,
// the annihilation part anti-linear, so the whole is real-linear and satisfies
// the anticommutation law {Ψ(ξ), Ψ(η)} = 2 Re⟨ξ, η⟩ · 1 exactly.
cmat_t fermi_field(const fermi_fock_t& f, const cvec_t& xi);

// Diagonal (−1)^N in the number grading.
cmat_t number_parity(const fermi_fock_t& f);

// Twist unitary: +1 on even, −i on odd particle number; equals
// (1 + i·parity)/(1 + i).  Conjugation by it turns fermionic anticommutation
// at "symplectic-complement" separation into ordinary commutation.
cmat_t twist(const fermi_fock_t& f);

// Multiplicative second-quantization lift to antisymmetric tensors: the
// (B, A) entry between equal-size subsets is the minor det t[B, A]; blocks of
// unequal particle number vanish, and the vacuum is fixed.  Functorial:
// lift(s·t) = lift(s)·lift(t); unitaries lift to unitaries; positive
// operators lift compatibly with their imaginary powers.
cmat_t gamma_minus(const fermi_fock_t& f, const cmat_t& t);
// Anti-linear one-particle maps lift to anti-linear maps with the lifted
// matrix part (basis vectors are real, so conjugation commutes with minors).
anti_linear_t gamma_minus(const fermi_fock_t& f, const anti_linear_t& t);

// ---------------------------------------------------------------------------
// Finite-dimensional *-algebras of D×D matrices, stored as an orthonormal
// (Frobenius) column basis of vectorized elements plus the generating set.
// ---------------------------------------------------------------------------
struct star_algebra_t {
  index_t ambient_dim = 0;
  cmat_t basis;  // ambient_dim² × dim, orthonormal columns
  std::vector<cmat_t> generators;
  tolerance_policy tol;
  index_t dim() const { return basis.cols(); }
  cmat_t element(index_t k) const;
  // Distance of x/|x| to the span; 0 means x belongs to the algebra.
  scalar_t containment_residual(const cmat_t& x) const;
};

// Close the span of {1, generators, adjoints} under products and adjoints
// until the dimension stabilizes.  Throws dimension_overflow when the ambient
// dimension exceeds dim_max and empty_family when no generator fixes it.
star_algebra_t generate_algebra(const std::vector<cmat_t>& generators,
                                index_t dim_max = 256);

// Solution space of [x, g] = 0 against every generator and its adjoint; a
// *-algebra containing the identity.  The finite-dimensional bicommutant
// theorem makes commutant(commutant(a)) reproduce a exactly.
star_algebra_t commutant(const star_algebra_t& a);

// Intersection of the two spans (itself an algebra when both inputs are).
star_algebra_t algebra_meet(const star_algebra_t& a, const star_algebra_t& b);

// Unitary conjugation u · a · u*.
star_algebra_t conjugate_algebra(const cmat_t& u, const star_algebra_t& a);

// Mutual-containment deviation: 1 when dimensions differ, otherwise the worst
// distance of a unit basis element of either algebra from the other's span.
scalar_t algebra_deviation(const star_algebra_t& a, const star_algebra_t& b);

// Worst containment residual over identity, adjoints, and sampled products —
// how far the stored span is from being a *-algebra.
scalar_t closure_deviation(const star_algebra_t& a);

// Von Neumann algebra generated by the field operators of vectors in h
// (the scalars when h = {0}).
star_algebra_t field_algebra(const fermi_fock_t& f, const real_subspace_t& h);

// Modular data of (a, Ω) from the closure of x·Ω ↦ x*·Ω: requires Ω cyclic
// and separating (x ↦ xΩ injective with full range), else
// not_cyclic_separating.  Returns the same spectral form used for
// one-particle subspaces, so all subspace machinery applies downstream.
modular_data_t vacuum_tomita(const star_algebra_t& a, const cvec_t& omega);

// Closed real span of {x·Ω : x self-adjoint in a} — the subspace the modular
// data of (a, Ω) fixes pointwise.
real_subspace_t selfadjoint_cyclic_subspace(const star_algebra_t& a, const cvec_t& omega);

// ---------------------------------------------------------------------------
// Second-quantization identity report: for a standard subspace h of ℂ^n (and
// an optional family for the lattice laws) the checked identities are
//   a-:s      fock Tomita operator  = twist · lift(i·s)
//   a-:j      fock conjugation      = twist · lift(i·j)
//   a-:delta  fock modular operator = lift(delta)
//   reversed-product  S(Ψ(ξ₁)…Ψ(ξ_k)Ω) = Ψ(ξ_k)…Ψ(ξ₁)Ω on sampled strings
//   b         commutant(R(h)) = Z · R(i·h′) · Z*
//   c         R(join of family) = algebra generated by the R(H_a)
//   d         R(meet of family) = intersection of the R(H_a)
// ---------------------------------------------------------------------------
struct secquant_identity_t {
  std::string identity;
  scalar_t deviation = 0;
};

struct secquant_report_t {
  index_t n = 0;
  std::uint64_t seed = 0;
  std::vector<secquant_identity_t> identities;
  scalar_t max_deviation() const;
  std::string to_json() const;  // one record per identity
};

secquant_report_t verify_secquant(const real_subspace_t& h,
                                  const std::vector<real_subspace_t>& family = {},
                                  std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Bose branch: symmetric-tensor truncation carrying only the functorial lift
// (no algebra claims — the Weyl unitaries live beyond any finite truncation).
// Basis: occupation vectors with at most max_particles total quanta, graded
// by particle number.
// ---------------------------------------------------------------------------
struct bose_fock_t {
  index_t n_modes = 0;
  index_t max_particles = 0;
  std::vector<std::vector<int>> occupations;
  index_t dim() const { return static_cast<index_t>(occupations.size()); }
};

bose_fock_t make_bose_fock(index_t n_modes, index_t max_particles, index_t dim_max = 256);

// Symmetric-power lift: the (β, α) entry is the permanent of the row/column
// expanded matrix over sqrt(β!·α!); functorial like the fermionic lift.
cmat_t gamma_plus(const bose_fock_t& f, const cmat_t& t);

}  // namespace modloc
