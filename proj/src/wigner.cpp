#include "modloc/wigner.hpp"

#include <cmath>

#include <json.hpp>

#include "modloc/serialize.hpp"

namespace modloc {

cone_grid_t make_cone_grid(index_t n_u, index_t n_theta, scalar_t r_min, scalar_t r_max) {
  require(n_u >= 2 && n_theta >= 2, errc::config_invalid, "make_cone_grid: grid too small");
  require(r_min > 0 && r_max > r_min, errc::config_invalid,
          "make_cone_grid: need 0 < r_min < r_max");
  cone_grid_t g;
  g.n_u = n_u;
  g.n_theta = n_theta;
  g.u_min = std::log(r_min);
  g.du = (std::log(r_max) - std::log(r_min)) / static_cast<scalar_t>(n_u - 1);
  return g;
}

mat3_t cone_section(scalar_t r, scalar_t theta) {
  return lorentz_rotation(theta - pi / 2.0) * lorentz_boost2(std::log(r));
}

mat3_t cone_section(const vec3_t& p) {
  auto [r, theta] = cone_coords(p);
  return cone_section(r, theta);
}

std::pair<scalar_t, scalar_t> cone_coords(const vec3_t& p, scalar_t tol) {
  require(p(0) > 0, errc::off_cone, "cone_coords: not forward-pointing");
  require(std::abs(minkowski(p, p)) <= tol * p(0) * p(0), errc::off_cone,
          "cone_coords: not a null vector");
  scalar_t theta = std::atan2(p(2), p(1));
  if (theta < 0) theta += 2.0 * pi;
  return {p(0), theta};
}

scalar_t cocycle(const mat3_t& a, const vec3_t& p) {
  auto [r, theta] = cone_coords(p);
  // Lorentz inverse: eta a^T eta
  mat3_t eta = mat3_t::Identity();
  eta(1, 1) = -1;
  eta(2, 2) = -1;
  mat3_t a_inv = eta * a.transpose() * eta;
  vec3_t q = a_inv * p;
  auto [rq, thq] = cone_coords(q, 1e-6);
  // closed-form inverse of the section keeps the conditioning tame
  mat3_t b_p_inv = lorentz_boost2(-std::log(r)) * lorentz_rotation(-(theta - pi / 2.0));
  mat3_t w = b_p_inv * a * cone_section(rq, thq);
  return parabolic_parameter(w, 1e-6);
}

poincare_t poincare_mul(const poincare_t& g, const poincare_t& h) {
  return {g.a + g.lam * h.a, g.lam * h.lam, g.winding + h.winding};
}

poincare_t poincare_inv(const poincare_t& g) {
  mat3_t eta = mat3_t::Identity();
  eta(1, 1) = -1;
  eta(2, 2) = -1;
  mat3_t lam_inv = eta * g.lam.transpose() * eta;
  return {-(lam_inv * g.a), lam_inv, -g.winding};
}

cone_rep_t make_cone_rep(const cone_grid_t& grid, scalar_t kappa, bool doubled) {
  require(kappa >= 0, errc::config_invalid, "make_cone_rep: kappa must be nonnegative");
  cone_rep_t rep;
  rep.grid = grid;
  rep.kappa = kappa;
  rep.doubled = doubled;
  return rep;
}

namespace {

// Bilinear sample of one grid block at (u, theta): periodic in theta, zero
// outside the u-window. Coordinates within 1e-9 of a node snap onto it so
// that exact grid maps stay exact.
complex_t sample_block(const cone_grid_t& g, const cvec_t& block, scalar_t u, scalar_t theta) {
  scalar_t s = (u - g.u_min) / g.du;
  scalar_t t = theta / g.dtheta();
  if (std::abs(s - std::round(s)) < 1e-9) s = std::round(s);
  if (std::abs(t - std::round(t)) < 1e-9) t = std::round(t);

  scalar_t s0 = std::floor(s), t0 = std::floor(t);
  scalar_t fs = s - s0, ft = t - t0;
  auto iu0 = static_cast<index_t>(s0);
  auto jt0 = static_cast<index_t>(t0);

  complex_t acc(0, 0);
  const scalar_t wu[2] = {1.0 - fs, fs};
  const scalar_t wt[2] = {1.0 - ft, ft};
  for (int du_ = 0; du_ < 2; ++du_) {
    index_t iu = iu0 + du_;
    if (iu < 0 || iu >= g.n_u || wu[du_] == 0.0) continue;
    for (int dt_ = 0; dt_ < 2; ++dt_) {
      if (wt[dt_] == 0.0) continue;
      index_t jt = (((jt0 + dt_) % g.n_theta) + g.n_theta) % g.n_theta;
      acc += wu[du_] * wt[dt_] * block(g.flat(iu, jt));
    }
  }
  return acc;
}

complex_t ipow(complex_t z, int n) {
  if (n == 0) return {1.0, 0.0};
  return std::exp(static_cast<scalar_t>(n) * std::log(z));
}

}  // namespace

cvec_t rep_apply(const cone_rep_t& rep, const poincare_t& g, const cvec_t& phi) {
  require(phi.size() == rep.dim(), errc::ambient_mismatch, "rep_apply: state size mismatch");
  const cone_grid_t& grid = rep.grid;
  const index_t block = grid.size();
  const bool identity_lam = (g.lam - mat3_t::Identity()).cwiseAbs().maxCoeff() == 0.0;

  cvec_t out(phi.size());
  mat3_t eta = mat3_t::Identity();
  eta(1, 1) = -1;
  eta(2, 2) = -1;
  mat3_t lam_inv = eta * g.lam.transpose() * eta;
  const complex_t wind = ipow(rep.central, g.winding);

  for (index_t iu = 0; iu < grid.n_u; ++iu) {
    for (index_t jt = 0; jt < grid.n_theta; ++jt) {
      const vec3_t p = grid.point(iu, jt);
      const complex_t trans = std::exp(complex_t(0, minkowski(p, g.a)));
      scalar_t c = 0.0;
      complex_t val_plus, val_minus;
      if (identity_lam) {
        val_plus = phi(grid.flat(iu, jt));
        if (rep.doubled) val_minus = phi(block + grid.flat(iu, jt));
      } else {
        c = cocycle(g.lam, p);
        vec3_t pp = lam_inv * p;
        auto [rr, th] = cone_coords(pp, 1e-6);
        val_plus = sample_block(grid, phi.head(block), std::log(rr), th);
        if (rep.doubled) val_minus = sample_block(grid, phi.tail(block), std::log(rr), th);
      }
      const complex_t phase_plus = std::exp(complex_t(0, rep.kappa * c));
      out(grid.flat(iu, jt)) = trans * wind * phase_plus * val_plus;
      if (rep.doubled)
        out(block + grid.flat(iu, jt)) = trans * wind * std::conj(phase_plus) * val_minus;
    }
  }
  return out;
}

cvec_t dilation_apply(const cone_rep_t& rep, scalar_t t, const cvec_t& phi) {
  require(phi.size() == rep.dim(), errc::ambient_mismatch, "dilation_apply: state size mismatch");
  const cone_grid_t& grid = rep.grid;
  const index_t block = grid.size();
  const scalar_t amp = std::exp(t / 2.0);
  cvec_t out(phi.size());
  for (index_t iu = 0; iu < grid.n_u; ++iu) {
    const scalar_t u_src = grid.u(iu) + t;
    for (index_t jt = 0; jt < grid.n_theta; ++jt) {
      out(grid.flat(iu, jt)) = amp * sample_block(grid, phi.head(block), u_src, grid.theta(jt));
      if (rep.doubled)
        out(block + grid.flat(iu, jt)) =
            amp * sample_block(grid, phi.tail(block), u_src, grid.theta(jt));
    }
  }
  return out;
}

cone_rep_t dilation_rescale(const cone_rep_t& rep, scalar_t t) {
  cone_rep_t out = rep;
  out.kappa = std::exp(-t) * rep.kappa;
  return out;
}

cvec_t pct_apply(const cone_rep_t& rep, const cvec_t& phi) {
  require(phi.size() == rep.dim(), errc::ambient_mismatch, "pct_apply: state size mismatch");
  require(rep.kappa == 0.0 || rep.doubled, errc::no_pct,
          "pct_apply: kappa > 0 requires the doubled space");
  const cone_grid_t& grid = rep.grid;
  const index_t block = grid.size();
  cvec_t out(phi.size());
  for (index_t iu = 0; iu < grid.n_u; ++iu)
    for (index_t jt = 0; jt < grid.n_theta; ++jt) {
      index_t jr = (grid.n_theta - jt) % grid.n_theta;
      out(grid.flat(iu, jt)) = std::conj(phi(grid.flat(iu, jr)));
      if (rep.doubled) out(block + grid.flat(iu, jt)) = std::conj(phi(block + grid.flat(iu, jr)));
    }
  return out;
}

complex_t weighted_inner(const cone_rep_t& rep, const cvec_t& x, const cvec_t& y) {
  require(x.size() == rep.dim() && y.size() == rep.dim(), errc::ambient_mismatch,
          "weighted_inner: state size mismatch");
  const cone_grid_t& grid = rep.grid;
  const index_t block = grid.size();
  complex_t acc(0, 0);
  for (index_t iu = 0; iu < grid.n_u; ++iu) {
    const scalar_t w = grid.weight(iu);
    for (index_t jt = 0; jt < grid.n_theta; ++jt) {
      const index_t k = grid.flat(iu, jt);
      acc += w * std::conj(x(k)) * y(k);
      if (rep.doubled) acc += w * std::conj(x(block + k)) * y(block + k);
    }
  }
  return acc;
}

scalar_t weighted_norm(const cone_rep_t& rep, const cvec_t& x) {
  return std::sqrt(std::abs(weighted_inner(rep, x, x)));
}

rvec_t cocycle_rate_w0(const cone_grid_t& grid) {
  rvec_t rate(grid.size());
  for (index_t iu = 0; iu < grid.n_u; ++iu)
    for (index_t jt = 0; jt < grid.n_theta; ++jt)
      rate(grid.flat(iu, jt)) = std::sin(grid.theta(jt)) / grid.r(iu);
  return rate;
}

void save_cone_state(const std::string& path, const cone_rep_t& rep, const cvec_t& phi) {
  require(phi.size() == rep.dim(), errc::ambient_mismatch, "save_cone_state: size mismatch");
  nlohmann::json desc = {
      {"n_u", rep.grid.n_u},
      {"n_theta", rep.grid.n_theta},
      {"u_min", rep.grid.u_min},
      {"du", rep.grid.du},
      {"kappa", rep.kappa},
      {"doubled", rep.doubled},
      {"central", {rep.central.real(), rep.central.imag()}},
  };
  write_text_file(path + ".json", desc.dump(2));
  write_complex_binary(path + ".bin", phi);
}

std::pair<cone_rep_t, cvec_t> load_cone_state(const std::string& path) {
  nlohmann::json desc;
  try {
    desc = nlohmann::json::parse(read_text_file(path + ".json"));
    cone_rep_t rep;
    rep.grid.n_u = desc.at("n_u").get<index_t>();
    rep.grid.n_theta = desc.at("n_theta").get<index_t>();
    rep.grid.u_min = desc.at("u_min").get<scalar_t>();
    rep.grid.du = desc.at("du").get<scalar_t>();
    rep.kappa = desc.at("kappa").get<scalar_t>();
    rep.doubled = desc.at("doubled").get<bool>();
    rep.central = complex_t(desc.at("central").at(0).get<scalar_t>(),
                            desc.at("central").at(1).get<scalar_t>());
    cvec_t phi = read_complex_binary(path + ".bin");
    require(phi.size() == rep.dim(), errc::io_error, "load_cone_state: amplitude count mismatch");
    return {rep, phi};
  } catch (const nlohmann::json::exception& e) {
    fail(errc::io_error, std::string("load_cone_state: ") + e.what());
  }
}

}  // namespace modloc
