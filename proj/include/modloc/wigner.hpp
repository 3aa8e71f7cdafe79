#pragma once

#include <string>
#include <utility>

#include "modloc/lorentz.hpp"
#include "modloc/types.hpp"

namespace modloc {

// Grid on the forward light cone p = r (1, cos th, sin th): logarithmic in r
// (u = log r equispaced) and uniform in th. Flat index = iu * n_theta + jt.
struct cone_grid_t {
  index_t n_u = 0, n_theta = 0;
  scalar_t u_min = 0, du = 0;

  scalar_t dtheta() const { return 2.0 * pi / static_cast<scalar_t>(n_theta); }
  index_t size() const { return n_u * n_theta; }
  index_t flat(index_t iu, index_t jt) const { return iu * n_theta + jt; }
  scalar_t u(index_t iu) const { return u_min + static_cast<scalar_t>(iu) * du; }
  scalar_t r(index_t iu) const { return std::exp(u(iu)); }
  scalar_t theta(index_t jt) const { return static_cast<scalar_t>(jt) * dtheta(); }
  vec3_t point(index_t iu, index_t jt) const {
    scalar_t rr = r(iu), th = theta(jt);
    return vec3_t(rr, rr * std::cos(th), rr * std::sin(th));
  }
  // quadrature weight for the invariant measure dr dtheta / 2 = r du dtheta / 2
  scalar_t weight(index_t iu) const { return r(iu) * du * dtheta() / 2.0; }
};

cone_grid_t make_cone_grid(index_t n_u, index_t n_theta, scalar_t r_min, scalar_t r_max);

// Boost-rotation section over the cone: B_p q = p with q = (1,0,1), B_q = 1.
mat3_t cone_section(scalar_t r, scalar_t theta);
mat3_t cone_section(const vec3_t& p);
// (r, theta) of a forward null vector; OffCone otherwise.
std::pair<scalar_t, scalar_t> cone_coords(const vec3_t& p, scalar_t tol = 1e-8);

// Wigner cocycle: B_p^{-1} A B_{A^{-1}p} = parabolic(c(A, p)).
scalar_t cocycle(const mat3_t& a, const vec3_t& p);

struct poincare_t {
  vec3_t a = vec3_t::Zero();
  mat3_t lam = mat3_t::Identity();
  int winding = 0;  // universal-cover sheet bookkeeping
};
poincare_t poincare_mul(const poincare_t& g, const poincare_t& h);
poincare_t poincare_inv(const poincare_t& g);

// Massless representation induced from the stabilizer character e^{i kappa c}.
// kappa > 0 pairs with -kappa on a doubled space; only the doubled version
// admits the reflection operator below.
struct cone_rep_t {
  cone_grid_t grid;
  scalar_t kappa = 0.0;
  bool doubled = false;
  complex_t central{1.0, 0.0};  // phase attached to one full winding of the cover
  index_t dim() const { return (doubled ? 2 : 1) * grid.size(); }
};

cone_rep_t make_cone_rep(const cone_grid_t& grid, scalar_t kappa, bool doubled);

// (U(a, A) phi)(p) = e^{i p.a} e^{i kappa c(A,p)} central^winding phi(A^{-1} p),
// with bilinear interpolation in (u, theta) (periodic theta, zero outside the
// u-window). Grid rotations and pure translations act exactly.
cvec_t rep_apply(const cone_rep_t& rep, const poincare_t& g, const cvec_t& phi);

// (D(t) phi)(p) = e^{t/2} phi(e^t p); conjugation rescales kappa to e^{-t} kappa.
cvec_t dilation_apply(const cone_rep_t& rep, scalar_t t, const cvec_t& phi);
cone_rep_t dilation_rescale(const cone_rep_t& rep, scalar_t t);

// Anti-unitary reflection (componentwise on each kappa-summand):
// (J phi)(p) = conj(phi(T p)) with T: theta -> -theta. NoPCT when kappa > 0
// on an undoubled space.
cvec_t pct_apply(const cone_rep_t& rep, const cvec_t& phi);

complex_t weighted_inner(const cone_rep_t& rep, const cvec_t& x, const cvec_t& y);
scalar_t weighted_norm(const cone_rep_t& rep, const cvec_t& x);

// d/dt c(exp(t K1), p) at t = 0 as a grid multiplier: sin(theta) / r.
rvec_t cocycle_rate_w0(const cone_grid_t& grid);

// state serialization: JSON descriptor at <path>.json, little-endian
// float64 (re, im) amplitude pairs at <path>.bin
void save_cone_state(const std::string& path, const cone_rep_t& rep, const cvec_t& phi);
std::pair<cone_rep_t, cvec_t> load_cone_state(const std::string& path);

}  // namespace modloc
