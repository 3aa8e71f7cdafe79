#include "modloc/huygens.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace modloc {

namespace {

bool power_of_two(index_t n) { return n > 0 && (n & (n - 1)) == 0; }

// C-infinity bump on (-1, 1), vanishing to all orders at the endpoints.
scalar_t bump(scalar_t s) {
  const scalar_t s2 = s * s;
  return s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
}

// int_{-w}^{w} bump(t/w) cos(omega t) dt  (the bump is even, so this is the
// full 1-d Fourier transform of the time factor).
scalar_t bump_time_transform(scalar_t w, scalar_t omega) {
  const int n = 512;  // Simpson intervals; the integrand is C-infinity
  const scalar_t h = 1.0 / static_cast<scalar_t>(n);
  scalar_t acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const scalar_t s = h * static_cast<scalar_t>(k);
    const scalar_t val = bump(s) * std::cos(omega * w * s);
    const scalar_t coef = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += coef * val;
  }
  return 2.0 * w * acc * h / 3.0;
}

// int_{R^2} bump(|x|/w) e^{-i q.x} d^2x = 2 pi w^2 int_0^1 bump(s) J0(qws) s ds
scalar_t bump_radial_transform(scalar_t w, scalar_t q) {
  const int n = 512;
  const scalar_t h = 1.0 / static_cast<scalar_t>(n);
  scalar_t acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const scalar_t s = h * static_cast<scalar_t>(k);
    const scalar_t val = bump(s) * std::cyl_bessel_j(0.0, q * w * s) * s;
    const scalar_t coef = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += coef * val;
  }
  return 2.0 * pi * w * w * acc * h / 3.0;
}

}  // namespace

box_grid_t make_box_grid(index_t n_t, index_t n_x, index_t n_y, scalar_t len_t,
                         scalar_t len_x, scalar_t len_y) {
  require(power_of_two(n_t), errc::config_invalid,
          "time axis length must be a power of two for the FFT");
  require(n_x > 1 && n_y > 1, errc::config_invalid, "spatial axes need at least two samples");
  require(len_t > 0 && len_x > 0 && len_y > 0, errc::config_invalid,
          "box extents must be positive");
  box_grid_t g;
  g.n_t = n_t;
  g.n_x = n_x;
  g.n_y = n_y;
  g.len_t = len_t;
  g.len_x = len_x;
  g.len_y = len_y;
  return g;
}

complex_t delta_plus(scalar_t t, scalar_t x, scalar_t y, scalar_t eps) {
  require(eps > 0, errc::config_invalid, "kernel regulator must be positive");
  const scalar_t rho2 = x * x + y * y;
  const complex_t tc(t, -eps);
  return kernel_norm_2d / std::sqrt(complex_t(rho2, 0.0) - tc * tc);
}

scalar_t delta_zero(scalar_t t, scalar_t x, scalar_t y, scalar_t eps) {
  return 2.0 * delta_plus(t, x, y, eps).imag();
}

scalar_t delta_zero_prime(scalar_t t, scalar_t x, scalar_t y, scalar_t eps) {
  return 2.0 * delta_plus(t, x, y, eps).real();
}

rvec_t hilbert_line(const rvec_t& samples) {
  const index_t n = samples.size();
  require(n >= 2, errc::config_invalid, "hilbert transform needs at least two samples");
  Eigen::FFT<scalar_t> fft;
  cvec_t line = samples.cast<complex_t>();
  cvec_t spec(n);
  fft.fwd(spec, line);
  spec(0) = 0.0;
  for (index_t k = 1; k < n; ++k) {
    if (2 * k < n)
      spec(k) *= complex_t(0.0, -1.0);
    else if (2 * k == n)
      spec(k) = 0.0;  // Nyquist has no sign of frequency
    else
      spec(k) *= complex_t(0.0, 1.0);
  }
  fft.inv(line, spec);
  return line.real();
}

rvec_t hilbert_time(const box_grid_t& g, const rvec_t& field) {
  require(field.size() == g.size(), errc::ambient_mismatch, "field size mismatch");
  Eigen::FFT<scalar_t> fft;
  const index_t nt = g.n_t, stride = g.n_x * g.n_y;
  rvec_t out(field.size());
  cvec_t line(nt), spec(nt);
  for (index_t col = 0; col < stride; ++col) {
    for (index_t it = 0; it < nt; ++it) line(it) = complex_t(field(it * stride + col), 0.0);
    fft.fwd(spec, line);
    spec(0) = 0.0;
    for (index_t k = 1; k < nt; ++k) {
      if (2 * k < nt)
        spec(k) *= complex_t(0.0, -1.0);
      else if (2 * k == nt)
        spec(k) = 0.0;
      else
        spec(k) *= complex_t(0.0, 1.0);
    }
    fft.inv(line, spec);
    for (index_t it = 0; it < nt; ++it) out(it * stride + col) = line(it).real();
  }
  return out;
}

cone_amplitude_t bump_solution_amplitude(const cone_grid_t& pgrid, const bump_spec_t& bump_in,
                                         scalar_t region_radius) {
  require(bump_in.t_width > 0 && bump_in.s_width > 0, errc::config_invalid,
          "bump widths must be positive");
  require(bump_in.t_width + bump_in.s_width <= region_radius, errc::support_violation,
          "source bump does not fit inside the double cone of the requested radius");
  cone_amplitude_t amp;
  amp.pgrid = pgrid;
  amp.a = cvec_t::Zero(pgrid.size());
  for (index_t i = 0; i < pgrid.n_u; ++i) {
    const scalar_t r = pgrid.r(i);
    // on the cone the frequency and the spatial wavenumber coincide
    const scalar_t hhat =
        bump_time_transform(bump_in.t_width, r) * bump_radial_transform(bump_in.s_width, r);
    const complex_t av = complex_t(0.0, -1.0) * hhat;
    for (index_t k = 0; k < pgrid.n_theta; ++k) amp.a(pgrid.flat(i, k)) = av;
  }
  return amp;
}

cvec_t cone_field_complex(const box_grid_t& g, const cone_amplitude_t& amp) {
  const cone_grid_t& pg = amp.pgrid;
  require(amp.a.size() == pg.size(), errc::ambient_mismatch, "amplitude size mismatch");
  const index_t nu = pg.n_u, nth = pg.n_theta, nt = g.n_t, nx = g.n_x, ny = g.n_y;
  const scalar_t meas = 1.0 / (4.0 * pi * pi);  // momentum-space normalization

  // radial-shell synthesis: G_i(x,y) = sum_k W_ik a_ik e^{i r_i (x cos + y sin)}
  cmat_t gmat(nu, nx * ny);
  cmat_t qx(nx, nth), sy(nth, ny);
  cvec_t coef(nth);
  for (index_t i = 0; i < nu; ++i) {
    const scalar_t r = pg.r(i);
    const scalar_t w = pg.weight(i) * meas;
    for (index_t k = 0; k < nth; ++k) {
      const scalar_t px = r * std::cos(pg.theta(k));
      const scalar_t py = r * std::sin(pg.theta(k));
      for (index_t ix = 0; ix < nx; ++ix)
        qx(ix, k) = std::exp(complex_t(0.0, px * g.x(ix)));
      for (index_t iy = 0; iy < ny; ++iy)
        sy(k, iy) = std::exp(complex_t(0.0, py * g.y(iy)));
      coef(k) = w * amp.a(pg.flat(i, k));
    }
    cmat_t slab = qx * (coef.asDiagonal() * sy);
    for (index_t ix = 0; ix < nx; ++ix)
      for (index_t iy = 0; iy < ny; ++iy) gmat(i, ix * ny + iy) = slab(ix, iy);
  }

  // time synthesis: F(t, x, y) = sum_i e^{-i r_i t} G_i(x, y)
  cmat_t et(nt, nu);
  for (index_t it = 0; it < nt; ++it)
    for (index_t i = 0; i < nu; ++i)
      et(it, i) = std::exp(complex_t(0.0, -pg.r(i) * g.t(it)));
  cmat_t fmat = et * gmat;

  cvec_t out(g.size());
  const index_t stride = nx * ny;
  for (index_t it = 0; it < nt; ++it)
    for (index_t c = 0; c < stride; ++c) out(it * stride + c) = fmat(it, c);
  return out;
}

rvec_t cone_field(const box_grid_t& g, const cone_amplitude_t& amp) {
  return 2.0 * cone_field_complex(g, amp).real();
}

rvec_t dalembertian(const box_grid_t& g, const rvec_t& field) {
  require(field.size() == g.size(), errc::ambient_mismatch, "field size mismatch");
  const index_t nt = g.n_t, nx = g.n_x, ny = g.n_y;
  const scalar_t it2 = 1.0 / (g.dt() * g.dt());
  const scalar_t ix2 = 1.0 / (g.dx() * g.dx());
  const scalar_t iy2 = 1.0 / (g.dy() * g.dy());
  // The sampled solution is not box-periodic, so a wrap-around stencil would
  // pick up an O(1/h^2) seam term that grows under refinement.  Evaluate the
  // operator on interior points only and leave zero on the boundary planes.
  rvec_t out = rvec_t::Zero(field.size());
  for (index_t it = 1; it + 1 < nt; ++it) {
    for (index_t ix = 1; ix + 1 < nx; ++ix) {
      for (index_t iy = 1; iy + 1 < ny; ++iy) {
        const scalar_t c = field(g.flat(it, ix, iy));
        const scalar_t d2t =
            field(g.flat(it + 1, ix, iy)) - 2.0 * c + field(g.flat(it - 1, ix, iy));
        const scalar_t d2x =
            field(g.flat(it, ix + 1, iy)) - 2.0 * c + field(g.flat(it, ix - 1, iy));
        const scalar_t d2y =
            field(g.flat(it, ix, iy + 1)) - 2.0 * c + field(g.flat(it, ix, iy - 1));
        out(g.flat(it, ix, iy)) = d2t * it2 - d2x * ix2 - d2y * iy2;
      }
    }
  }
  return out;
}

support_report_t verify_support(const box_grid_t& g, const cone_amplitude_t& amp,
                                scalar_t region_radius) {
  require(region_radius > 0, errc::config_invalid, "region radius must be positive");
  support_report_t rep;
  rep.grid = g;
  rep.region_radius = region_radius;

  const rvec_t f = cone_field(g, amp);
  cone_amplitude_t partner_amp{amp.pgrid, complex_t(0.0, 1.0) * amp.a};
  const rvec_t partner = cone_field(g, partner_amp);  // continuum hilbert transform of f
  const rvec_t partner_grid = hilbert_time(g, f);

  const scalar_t pn = partner.norm();
  rep.hilbert_two_route_dev = pn > 0 ? (partner_grid - partner).norm() / pn : 0.0;

  const scalar_t fn = f.norm();
  rep.residual_wave = fn > 0 ? dalembertian(g, f).norm() / fn : 0.0;

  const scalar_t guard = 2.0 * std::max({g.dt(), g.dx(), g.dy()});
  scalar_t sup_f = 0, sup_p = 0, sup_f_space = 0, sup_p_time = 0;
  for (index_t it = 0; it < g.n_t; ++it) {
    const scalar_t at = std::abs(g.t(it));
    for (index_t ix = 0; ix < g.n_x; ++ix) {
      for (index_t iy = 0; iy < g.n_y; ++iy) {
        const scalar_t rho = std::hypot(g.x(ix), g.y(iy));
        const index_t id = g.flat(it, ix, iy);
        sup_f = std::max(sup_f, std::abs(f(id)));
        sup_p = std::max(sup_p, std::abs(partner(id)));
        if (rho >= region_radius + at + guard) {
          sup_f_space = std::max(sup_f_space, std::abs(f(id)));
          ++rep.n_spacelike_samples;
        }
        if (at >= region_radius + rho + guard) {
          sup_p_time = std::max(sup_p_time, std::abs(partner(id)));
          ++rep.n_timelike_samples;
        }
      }
    }
  }
  require(rep.n_spacelike_samples > 0 && rep.n_timelike_samples > 0, errc::config_invalid,
          "box too small to sample the complement regions");
  rep.leakage_spacelike = sup_f > 0 ? sup_f_space / sup_f : 0.0;
  rep.leakage_timelike = sup_p > 0 ? sup_p_time / sup_p : 0.0;
  return rep;
}

std::string support_report_t::to_json() const {
  nlohmann::json j;
  j["grid"] = {{"n_t", grid.n_t},     {"n_x", grid.n_x},     {"n_y", grid.n_y},
               {"len_t", grid.len_t}, {"len_x", grid.len_x}, {"len_y", grid.len_y}};
  j["region"] = {{"radius", region_radius}};
  j["leakage_spacelike"] = leakage_spacelike;
  j["leakage_timelike"] = leakage_timelike;
  j["residual_wave"] = residual_wave;
  j["hilbert_two_route_dev"] = hilbert_two_route_dev;
  j["n_spacelike_samples"] = n_spacelike_samples;
  j["n_timelike_samples"] = n_timelike_samples;
  return j.dump(2);
}

void write_field(const std::string& path, const box_grid_t& g, const rvec_t& field) {
  require(field.size() == g.size(), errc::ambient_mismatch, "field size mismatch");
  std::ofstream out(path, std::ios::binary);
  require(out.good(), errc::io_error, "cannot open field file for writing");
  nlohmann::json j;
  j["n_t"] = g.n_t;
  j["n_x"] = g.n_x;
  j["n_y"] = g.n_y;
  j["len_t"] = g.len_t;
  j["len_x"] = g.len_x;
  j["len_y"] = g.len_y;
  j["dtype"] = "float64";
  j["order"] = "t,x,y";
  out << j.dump() << '\n';
  out.write(reinterpret_cast<const char*>(field.data()),
            static_cast<std::streamsize>(sizeof(scalar_t) * static_cast<std::size_t>(field.size())));
  require(out.good(), errc::io_error, "field write failed");
}

std::pair<box_grid_t, rvec_t> read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), errc::io_error, "cannot open field file for reading");
  std::string header;
  std::getline(in, header);
  nlohmann::json j = nlohmann::json::parse(header, nullptr, false);
  require(!j.is_discarded() && j.value("dtype", "") == "float64", errc::io_error,
          "bad field file header");
  box_grid_t g = make_box_grid(j.at("n_t").get<index_t>(), j.at("n_x").get<index_t>(),
                               j.at("n_y").get<index_t>(), j.at("len_t").get<scalar_t>(),
                               j.at("len_x").get<scalar_t>(), j.at("len_y").get<scalar_t>());
  rvec_t field(g.size());
  in.read(reinterpret_cast<char*>(field.data()),
          static_cast<std::streamsize>(sizeof(scalar_t) * static_cast<std::size_t>(field.size())));
  require(in.gcount() ==
              static_cast<std::streamsize>(sizeof(scalar_t) * static_cast<std::size_t>(field.size())),
          errc::io_error, "field file truncated");
  return {g, std::move(field)};
}

}  // namespace modloc
