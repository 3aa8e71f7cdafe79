#pragma once

#include "modloc/types.hpp"

namespace modloc {

// Euclidean group of the plane, tracked in the universal cover: g = (phi, z)
// acts as w -> e^{i phi} w + z, with phi a real number (not reduced mod 2pi).
struct e2_element_t {
  scalar_t phi = 0.0;
  complex_t z{0.0, 0.0};
};

inline e2_element_t e2_rotation(scalar_t phi) { return {phi, {0.0, 0.0}}; }
inline e2_element_t e2_translation(complex_t z) { return {0.0, z}; }

e2_element_t e2_mul(const e2_element_t& a, const e2_element_t& b);
e2_element_t e2_inv(const e2_element_t& a);
// conjugation by the dilation w -> e^t w: rotations fixed, translations scaled
e2_element_t e2_dilate(const e2_element_t& a, scalar_t t);

// Finite model of the translation-faithful irreducible representation living
// on the momentum circle of radius kappa: n equispaced sample points, with
// helicity offset eps in {0, 1/2} (eps = 1/2 only closes on the double cover).
struct circle_rep_t {
  index_t n = 0;
  scalar_t kappa = 0.0;
  scalar_t eps = 0.0;
  scalar_t theta(index_t j) const { return 2.0 * pi * static_cast<scalar_t>(j) / static_cast<scalar_t>(n); }
};

circle_rep_t make_circle_rep(index_t n, scalar_t kappa, scalar_t eps);

// Unitary matrix of g; rotations must be multiples of the grid step.
cmat_t circle_rep_apply(const circle_rep_t& rep, const e2_element_t& g);

// Sorted spectrum of the self-adjoint generator of translations along the
// given direction: {kappa cos(theta_j - arg direction)}.
rvec_t circle_translation_spectrum(const circle_rep_t& rep, complex_t direction);

// Dilation conjugation rescales the circle radius: kappa -> e^{-t} kappa.
circle_rep_t circle_dilation_rescale(const circle_rep_t& rep, scalar_t t);

}  // namespace modloc
