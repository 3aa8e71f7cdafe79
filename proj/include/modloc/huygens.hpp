#pragma once

#include <string>
#include <utility>

#include "modloc/types.hpp"
#include "modloc/wigner.hpp"

namespace modloc {

// ---------------------------------------------------------------------------
// Uniform periodic box grid in (t, x, y). The time axis is the FFT axis and
// must have power-of-two length; coordinates are cell-centered on
// [-len/2, len/2) so that index reversal (n - i) % n realizes the point
// reflection of the torus.
// ---------------------------------------------------------------------------
struct box_grid_t {
  index_t n_t = 0, n_x = 0, n_y = 0;
  scalar_t len_t = 0, len_x = 0, len_y = 0;

  scalar_t dt() const { return len_t / static_cast<scalar_t>(n_t); }
  scalar_t dx() const { return len_x / static_cast<scalar_t>(n_x); }
  scalar_t dy() const { return len_y / static_cast<scalar_t>(n_y); }
  scalar_t t(index_t i) const { return -0.5 * len_t + dt() * static_cast<scalar_t>(i); }
  scalar_t x(index_t i) const { return -0.5 * len_x + dx() * static_cast<scalar_t>(i); }
  scalar_t y(index_t i) const { return -0.5 * len_y + dy() * static_cast<scalar_t>(i); }
  index_t size() const { return n_t * n_x * n_y; }
  index_t flat(index_t it, index_t ix, index_t iy) const {
    return (it * n_x + ix) * n_y + iy;
  }
};

box_grid_t make_box_grid(index_t n_t, index_t n_x, index_t n_y, scalar_t len_t,
                         scalar_t len_x, scalar_t len_y);

// ---------------------------------------------------------------------------
// Two-point kernels in s = 2 space dimensions.
//
// delta_plus is the regulated positive-frequency kernel
//   (1/(2 pi)^2) \int d^2p / (2|p|) e^{-i(|p| (t - i eps) - p.x)}
//     = kernel_norm_2d / sqrt(rho^2 - (t - i eps)^2),   rho = |x|,
// with the principal square root.  The normalization constant below is frozen
// against the momentum-space quadrature of that integral (see the test-side
// oracle); it makes delta_plus((0,1,0)) -> kernel_norm_2d as eps -> 0.
// The kernel is real and even at spacelike separation, imaginary and odd at
// timelike separation, with opposite signs in the future and past cones.
//
// The real derived kernels:
//   delta_zero       = 2 Im delta_plus   (odd,  supported timelike as eps->0)
//   delta_zero_prime = 2 Re delta_plus   (even, supported spacelike as eps->0)
// They are Hilbert-transform partners along the time axis:
//   hilbert(delta_zero) = delta_zero_prime.
// ---------------------------------------------------------------------------
inline constexpr scalar_t kernel_norm_2d = 1.0 / (4.0 * pi);

complex_t delta_plus(scalar_t t, scalar_t x, scalar_t y, scalar_t eps);
scalar_t delta_zero(scalar_t t, scalar_t x, scalar_t y, scalar_t eps);
scalar_t delta_zero_prime(scalar_t t, scalar_t x, scalar_t y, scalar_t eps);

// ---------------------------------------------------------------------------
// Hilbert transform in the time variable: multiplier -i sign(omega) on the
// discrete frequencies; the zero mode and (for even length) the Nyquist mode
// are annihilated.  On zero-mean band-limited data the square is -identity.
// hilbert_line transforms one periodic sample line; hilbert_time applies it
// along the t-axis of every (x, y) column of a box field.
// ---------------------------------------------------------------------------
rvec_t hilbert_line(const rvec_t& samples);
rvec_t hilbert_time(const box_grid_t& g, const rvec_t& field);

// ---------------------------------------------------------------------------
// Cone amplitudes: a(p) sampled on a momentum cone grid defines the real
// wave-equation solution
//   f(x) = sum_j W_j (a_j e^{-i p_j . x} + conj(a_j) e^{+i p_j . x}),
// where W_j is the invariant cone measure cell weight divided by (2 pi)^2 so
// that a = 1 with a Gaussian damping reproduces the regulated kernels above.
// Each summand solves the wave equation exactly in the continuum.
// ---------------------------------------------------------------------------
struct cone_amplitude_t {
  cone_grid_t pgrid;
  cvec_t a;
};

// Smooth compactly supported source: the product bump
//   h(t, x) = exp(-1/(1 - (t/t_width)^2)) * exp(-1/(1 - (|x|/s_width)^2))
// supported in {|t| < t_width} x {|x| < s_width}, hence inside the double
// cone of radius region_radius whenever t_width + s_width <= region_radius.
struct bump_spec_t {
  scalar_t t_width = 0.22;
  scalar_t s_width = 0.22;
};

// Amplitude of the solution obtained by smearing the odd kernel with the
// bump: a(p) = -i * hhat(p) restricted to the cone, so that the synthesized
// field equals (h * delta_zero) up to the frozen normalization.  Throws
// support_violation if the bump does not fit inside the double cone of
// radius region_radius.
cone_amplitude_t bump_solution_amplitude(const cone_grid_t& pgrid, const bump_spec_t& bump,
                                         scalar_t region_radius);

// Complex positive-frequency field F(x) = sum_j W_j a_j e^{-i p_j . x} and
// the real solution 2 Re F sampled on the box grid.
cvec_t cone_field_complex(const box_grid_t& g, const cone_amplitude_t& amp);
rvec_t cone_field(const box_grid_t& g, const cone_amplitude_t& amp);

// Second-order d'Alembertian stencil D_t^2 - D_x^2 - D_y^2, evaluated on the
// interior points of the box; boundary planes of the result are zero (sampled
// solutions are not box-periodic, so no wrap-around is attempted).
rvec_t dalembertian(const box_grid_t& g, const rvec_t& field);

// ---------------------------------------------------------------------------
// Support verification.  For a solution synthesized from a bump in the double
// cone of radius r, pass region_radius = 2r.  The solution must vanish on the
// spacelike complement {|x| > R + |t|} and its Hilbert transform in time on
// the timelike complement {|t| > R + |x|}; both complements are sampled with
// a guard band of two grid cells around the bounding light cone.  The partner
// field is evaluated spectrally (amplitude i a, the continuum transform of
// the synthesis); hilbert_two_route_dev records the relative deviation of the
// grid-FFT route from it.  residual_wave is the relative l2 norm of the
// discrete d'Alembertian, a pure stencil error for exact cone solutions.
// ---------------------------------------------------------------------------
struct support_report_t {
  box_grid_t grid;
  scalar_t region_radius = 0;
  scalar_t leakage_spacelike = 0;
  scalar_t leakage_timelike = 0;
  scalar_t residual_wave = 0;
  scalar_t hilbert_two_route_dev = 0;
  index_t n_spacelike_samples = 0;
  index_t n_timelike_samples = 0;

  std::string to_json() const;
};

support_report_t verify_support(const box_grid_t& g, const cone_amplitude_t& amp,
                                scalar_t region_radius);

// Grid-function files: one JSON header line, then raw little-endian float64
// in (t, x, y) order.
void write_field(const std::string& path, const box_grid_t& g, const rvec_t& field);
std::pair<box_grid_t, rvec_t> read_field(const std::string& path);

}  // namespace modloc
