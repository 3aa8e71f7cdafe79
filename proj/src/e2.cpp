#include "modloc/e2.hpp"

#include <cmath>

namespace modloc {

e2_element_t e2_mul(const e2_element_t& a, const e2_element_t& b) {
  return {a.phi + b.phi, a.z + std::exp(complex_t(0, a.phi)) * b.z};
}

e2_element_t e2_inv(const e2_element_t& a) {
  return {-a.phi, -std::exp(complex_t(0, -a.phi)) * a.z};
}

e2_element_t e2_dilate(const e2_element_t& a, scalar_t t) {
  return {a.phi, std::exp(t) * a.z};
}

circle_rep_t make_circle_rep(index_t n, scalar_t kappa, scalar_t eps) {
  require(n > 0, errc::config_invalid, "make_circle_rep: need at least one sample point");
  require(kappa > 0, errc::config_invalid, "make_circle_rep: kappa must be positive");
  require(eps == 0.0 || eps == 0.5, errc::config_invalid, "make_circle_rep: eps must be 0 or 1/2");
  return {n, kappa, eps};
}

cmat_t circle_rep_apply(const circle_rep_t& rep, const e2_element_t& g) {
  const index_t n = rep.n;
  const scalar_t step = 2.0 * pi / static_cast<scalar_t>(n);
  const scalar_t ratio = g.phi / step;
  const scalar_t nearest = std::round(ratio);
  require(std::abs(ratio - nearest) < 1e-9, errc::incompatible_step,
          "circle_rep_apply: rotation angle is not a multiple of the grid step");
  const auto shift = static_cast<long long>(nearest);

  // U(g) = U(translation) U(rotation): (U psi)(theta) picks up the momentum
  // phase at theta and reads psi at theta - phi.
  cmat_t u = cmat_t::Zero(n, n);
  const complex_t rot_phase = std::exp(complex_t(0, rep.eps * g.phi));
  for (index_t j = 0; j < n; ++j) {
    scalar_t th = rep.theta(j);
    complex_t trans_phase =
        std::exp(complex_t(0, rep.kappa * (std::conj(g.z) * std::exp(complex_t(0, th))).real()));
    index_t src = static_cast<index_t>(((j - shift) % n + n) % n);
    u(j, src) = trans_phase * rot_phase;
  }
  return u;
}

rvec_t circle_translation_spectrum(const circle_rep_t& rep, complex_t direction) {
  require(std::abs(direction) > 0, errc::config_invalid,
          "circle_translation_spectrum: direction must be nonzero");
  const scalar_t arg = std::arg(direction);
  rvec_t spec(rep.n);
  for (index_t j = 0; j < rep.n; ++j) spec(j) = rep.kappa * std::cos(rep.theta(j) - arg);
  std::sort(spec.data(), spec.data() + spec.size());
  return spec;
}

circle_rep_t circle_dilation_rescale(const circle_rep_t& rep, scalar_t t) {
  circle_rep_t out = rep;
  out.kappa = std::exp(-t) * rep.kappa;
  return out;
}

}  // namespace modloc
