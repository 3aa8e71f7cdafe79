#include "modloc/lorentz.hpp"

#include <cmath>

namespace modloc {

mat3_t gen_boost1() {
  mat3_t k;
  k << 0, 1, 0,
       1, 0, 0,
       0, 0, 0;
  return k;
}

mat3_t gen_boost2() {
  mat3_t k;
  k << 0, 0, 1,
       0, 0, 0,
       1, 0, 0;
  return k;
}

mat3_t gen_rotation() {
  mat3_t r;
  r << 0, 0, 0,
       0, 0, -1,
       0, 1, 0;
  return r;
}

mat3_t lorentz_boost1(scalar_t t) {
  mat3_t m = mat3_t::Identity();
  m(0, 0) = std::cosh(t);
  m(0, 1) = std::sinh(t);
  m(1, 0) = std::sinh(t);
  m(1, 1) = std::cosh(t);
  return m;
}

mat3_t lorentz_boost2(scalar_t t) {
  mat3_t m = mat3_t::Identity();
  m(0, 0) = std::cosh(t);
  m(0, 2) = std::sinh(t);
  m(2, 0) = std::sinh(t);
  m(2, 2) = std::cosh(t);
  return m;
}

mat3_t lorentz_rotation(scalar_t phi) {
  mat3_t m = mat3_t::Identity();
  m(1, 1) = std::cos(phi);
  m(1, 2) = -std::sin(phi);
  m(2, 1) = std::sin(phi);
  m(2, 2) = std::cos(phi);
  return m;
}

bool is_lorentz(const mat3_t& m, scalar_t tol) {
  mat3_t eta = mat3_t::Zero();
  eta(0, 0) = 1;
  eta(1, 1) = -1;
  eta(2, 2) = -1;
  if (((m.transpose() * eta * m) - eta).cwiseAbs().maxCoeff() > tol) return false;
  if (std::abs(m.determinant() - 1.0) > tol) return false;
  return m(0, 0) > 0;
}

vec3_t reference_null() { return vec3_t(1, 0, 1); }

mat3_t parabolic(scalar_t c) {
  // exp(c(K1+R)) in closed form: the generator is nilpotent of order 3.
  mat3_t g;
  g << 1 + c * c / 2, c, -c * c / 2,
       c,             1, -c,
       c * c / 2,     c, 1 - c * c / 2;
  return g;
}

scalar_t parabolic_parameter(const mat3_t& g, scalar_t tol) {
  scalar_t c = g(0, 1);
  require((g - parabolic(c)).cwiseAbs().maxCoeff() <= tol, errc::config_invalid,
          "parabolic_parameter: matrix does not stabilize the reference null point");
  return c;
}

}  // namespace modloc
