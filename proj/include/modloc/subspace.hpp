#pragma once

#include <vector>

#include "modloc/types.hpp"

namespace modloc {

// Anti-linear map on ℂ^n, stored as the matrix part of  x -> a * conj(x).
struct anti_linear_t {
  cmat_t a;
  cvec_t operator()(const cvec_t& x) const { return a * x.conjugate(); }
  index_t dim() const { return a.rows(); }
};

// Adjoint of an anti-linear map S satisfies <S* x, y> = <S y, x>; its matrix
// part is the plain transpose.
inline anti_linear_t adjoint(const anti_linear_t& s) { return {s.a.transpose()}; }

// Composition of two anti-linear maps is linear: (S ∘ T)(x) = a_s conj(a_t) x.
inline cmat_t compose(const anti_linear_t& s, const anti_linear_t& t) {
  return s.a * t.a.conjugate();
}

// Realification ℂ^n ≅ ℝ^{2n}, z -> (Re z; Im z).
rvec_t realify(const cvec_t& z);
cvec_t complexify(const rvec_t& x);
rmat_t realify_columns(const cmat_t& cols);
cmat_t complexify_columns(const rmat_t& cols);
rmat_t realify_linear(const cmat_t& m);           // [[P,-Q],[Q,P]]
rmat_t realify_anti_linear(const anti_linear_t& s);  // [[P,Q],[Q,-P]]

// Closed real subspace of ℂ^n, kept as a Re⟨,⟩-orthonormal column basis.
struct real_subspace_t {
  index_t ambient_dim = 0;
  cmat_t basis;  // ambient_dim x dim
  tolerance_policy tol;
  index_t dim() const { return basis.cols(); }
};

struct subspace_flags_t {
  bool cyclic = false;     // H + iH dense (here: spans ℂ^n)
  bool separating = false; // H ∩ iH = {0}
  bool standard() const { return cyclic && separating; }
};

// Modular data: anti-unitary involution j and positive invertible delta with
// j delta conj(j) = delta^{-1}. Spectral form of delta is kept for calculus.
struct modular_data_t {
  anti_linear_t j;
  cmat_t delta;
  cmat_t delta_evec;
  rvec_t delta_eval;
  cmat_t delta_pow(complex_t z) const;  // delta^z by spectral calculus
  anti_linear_t s() const;              // S = J delta^{1/2}
  index_t dim() const { return delta.rows(); }
};

real_subspace_t make_real_subspace(const cmat_t& spanning, tolerance_policy tol = {});
real_subspace_t random_standard_subspace(index_t n, std::uint64_t seed,
                                         tolerance_policy tol = {});

subspace_flags_t classify(const real_subspace_t& h);
real_subspace_t times_i(const real_subspace_t& h);
real_subspace_t symplectic_complement(const real_subspace_t& h);
real_subspace_t meet(const real_subspace_t& h, const real_subspace_t& k);
real_subspace_t join(const real_subspace_t& h, const real_subspace_t& k);
real_subspace_t meet_all(const std::vector<real_subspace_t>& hs);
real_subspace_t join_all(const std::vector<real_subspace_t>& hs);

// Principal-angle cosines between the realified bases (sorted descending).
rvec_t principal_cosines(const real_subspace_t& h, const real_subspace_t& k);
// ||P_H - P_K||_2; equals 1 whenever the dimensions differ.
scalar_t projection_distance(const real_subspace_t& h, const real_subspace_t& k);
// Distance of a single vector to the subspace.
scalar_t distance_to(const real_subspace_t& h, const cvec_t& x);

anti_linear_t tomita_s(const real_subspace_t& h);
modular_data_t tomita_from_subspace(const real_subspace_t& h);
real_subspace_t subspace_from_tomita(const modular_data_t& md, tolerance_policy tol = {});

real_subspace_t apply_linear(const cmat_t& u, const real_subspace_t& h);
real_subspace_t apply_anti_linear(const anti_linear_t& s, const real_subspace_t& h);

// max_a || (∩_a H_a)' - Σ_a H_a' || over a finite family (projection distance).
scalar_t duality_deviation(const std::vector<real_subspace_t>& hs);

real_subspace_t tensor_product(const real_subspace_t& h, const real_subspace_t& k);

// max over basis pairs and sample times of
// |<eta, delta^{1-it} xi> - <delta^{-it} xi, eta>|.
scalar_t kms_deviation(const real_subspace_t& h, const modular_data_t& md,
                       const std::vector<scalar_t>& ts);

// For unitary u with u H = H: how far u is from commuting with (j, delta).
scalar_t commuting_unitary_deviation(const real_subspace_t& h, const modular_data_t& md,
                                     const cmat_t& u);

scalar_t op_norm(const cmat_t& m);
scalar_t op_norm(const rmat_t& m);

}  // namespace modloc
