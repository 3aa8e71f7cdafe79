#pragma once

#include "modloc/types.hpp"

namespace modloc {

// 2+1-dimensional Minkowski space, coordinates (x0, x1, x2), metric (+,-,-).

inline scalar_t minkowski(const vec3_t& a, const vec3_t& b) {
  return a(0) * b(0) - a(1) * b(1) - a(2) * b(2);
}

mat3_t gen_boost1();    // boost generator along x1
mat3_t gen_boost2();    // boost generator along x2
mat3_t gen_rotation();  // rotation generator in the (x1,x2) plane

mat3_t lorentz_boost1(scalar_t t);
mat3_t lorentz_boost2(scalar_t t);
mat3_t lorentz_rotation(scalar_t phi);

// proper orthochronous check: preserves the metric, det=1, positive (0,0)
bool is_lorentz(const mat3_t& m, scalar_t tol = 1e-9);

// Reference null ray q = (1, 0, 1) and its pointwise stabilizer, the
// one-parameter parabolic subgroup exp(c (K1 + R)).
vec3_t reference_null();
mat3_t parabolic(scalar_t c);
// Extract c from a stabilizer element; rejects matrices outside the subgroup.
scalar_t parabolic_parameter(const mat3_t& g, scalar_t tol = 1e-8);

}  // namespace modloc
