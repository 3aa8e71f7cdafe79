#include "modloc/bw_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "modloc/random.hpp"

namespace modloc {
namespace {

// single kappa block of the generator, grid.size() x grid.size(), flat coords
Eigen::SparseMatrix<complex_t> boost_block(const cone_grid_t& g, scalar_t kappa_signed) {
  const index_t n = g.size();
  std::vector<Eigen::Triplet<complex_t>> trip;
  trip.reserve(static_cast<std::size_t>(5 * n));
  const complex_t im{0.0, 1.0};
  const scalar_t inv2du = 1.0 / (2.0 * g.du);
  const scalar_t inv2dth = 1.0 / (2.0 * g.dtheta());
  for (index_t i = 0; i < g.n_u; ++i) {
    for (index_t j = 0; j < g.n_theta; ++j) {
      const index_t row = g.flat(i, j);
      const scalar_t c = std::cos(g.theta(j)), s = std::sin(g.theta(j));
      if (i + 1 < g.n_u) trip.emplace_back(row, g.flat(i + 1, j), im * (c * inv2du));
      if (i > 0) trip.emplace_back(row, g.flat(i - 1, j), -im * (c * inv2du));
      const index_t jp = (j + 1) % g.n_theta, jm = (j + g.n_theta - 1) % g.n_theta;
      const scalar_t sp = std::sin(g.theta(jp)), sm = std::sin(g.theta(jm));
      trip.emplace_back(row, g.flat(i, jp), -im * ((s + sp) * 0.5 * inv2dth));
      trip.emplace_back(row, g.flat(i, jm), im * ((s + sm) * 0.5 * inv2dth));
      const scalar_t diag = kappa_signed * s / g.r(i);
      if (diag != 0.0) trip.emplace_back(row, row, complex_t{diag, 0.0});
    }
  }
  Eigen::SparseMatrix<complex_t> k(n, n);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

int color(const cone_grid_t& g, index_t a) {
  return static_cast<int>((a / g.n_theta + a % g.n_theta) & 1);
}

complex_t ipow4(int p) {
  switch (p & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// eigensystem of one kappa block through the checkerboard gauge (real
// symmetric); eigenvectors returned still gauged
void block_eigensystem_real(const cone_grid_t& g, scalar_t kappa_signed, rvec_t& evals,
                            rmat_t& evecs_gauged) {
  require(g.n_theta % 2 == 0, errc::config_invalid,
          "spectral machinery needs an even n_theta (checkerboard gauge)");
  const index_t n = g.size();
  auto kb = boost_block(g, kappa_signed);
  rmat_t m = rmat_t::Zero(n, n);
  for (int o = 0; o < kb.outerSize(); ++o)
    for (Eigen::SparseMatrix<complex_t>::InnerIterator it(kb, o); it; ++it) {
      const complex_t w = it.value() * ipow4(color(g, it.col()) - color(g, it.row()));
      m(it.row(), it.col()) = w.real();
    }
  Eigen::SelfAdjointEigenSolver<rmat_t> es(m);
  require(es.info() == Eigen::Success, errc::config_invalid, "generator eigensolve failed");
  evals = es.eigenvalues();
  evecs_gauged = es.eigenvectors();
}

cmat_t ungauge(const cone_grid_t& g, const rmat_t& cols) {
  cmat_t out(cols.rows(), cols.cols());
  for (index_t a = 0; a < cols.rows(); ++a)
    out.row(a) = ipow4(color(g, a)) * cols.row(a).cast<complex_t>();
  return out;
}

ivec_t theta_reflection_perm(const cone_grid_t& g) {
  ivec_t perm(g.size());
  for (index_t i = 0; i < g.n_u; ++i)
    for (index_t j = 0; j < g.n_theta; ++j)
      perm[g.flat(i, j)] = g.flat(i, (g.n_theta - j) % g.n_theta);
  return perm;
}

cvec_t reflect_conj(const ivec_t& perm, const cvec_t& x) {
  cvec_t y(x.size());
  for (index_t a = 0; a < x.size(); ++a) y[perm[a]] = std::conj(x[a]);
  return y;
}

cmat_t reflect_rows(const ivec_t& perm, const cmat_t& x) {
  cmat_t y(x.rows(), x.cols());
  for (index_t a = 0; a < x.rows(); ++a) y.row(perm[a]) = x.row(a);
  return y;
}

// standard-subspace basis of one block from its kept modes; the block
// reflection is conj composed with the theta flip. opposite=true builds the
// fixed points of J delta^{-1/2} instead (the reflected wedge).
cmat_t block_standard_basis(const cone_grid_t& g, const rvec_t& lam, const cmat_t& modes,
                            scalar_t pair_tol, bool opposite) {
  const auto perm = theta_reflection_perm(g);
  std::vector<index_t> pos, zero;
  for (index_t a = 0; a < lam.size(); ++a) {
    if (lam[a] > pair_tol)
      pos.push_back(a);
    else if (std::abs(lam[a]) <= pair_tol)
      zero.push_back(a);
  }
  cmat_t pair_cols(modes.rows(), 2 * static_cast<index_t>(pos.size()));
  index_t col = 0;
  for (index_t a : pos) {
    const scalar_t alpha = std::exp((opposite ? -pi : pi) * lam[a]);
    const scalar_t nrm = std::sqrt(1.0 + alpha * alpha);
    const cvec_t e = modes.col(a);
    const cvec_t f = reflect_conj(perm, e);
    pair_cols.col(col++) = (alpha * e + f) / nrm;
    pair_cols.col(col++) = complex_t{0.0, 1.0} * (f - alpha * e) / nrm;
  }
  cmat_t zero_cols(modes.rows(), 0);
  if (!zero.empty()) {
    // reflection-fixed real combinations of the zero modes
    cmat_t cand(modes.rows(), 2 * static_cast<index_t>(zero.size()));
    index_t q = 0;
    for (index_t a : zero) {
      const cvec_t z = modes.col(a);
      const cvec_t fz = reflect_conj(perm, z);
      cand.col(q++) = z + fz;
      cand.col(q++) = complex_t{0.0, 1.0} * (z - fz);
    }
    zero_cols = make_real_subspace(cand).basis;
  }
  cmat_t out(modes.rows(), pair_cols.cols() + zero_cols.cols());
  out << pair_cols, zero_cols;
  return out;
}

}  // namespace

boost_generator_t build_boost_generator(const cone_rep_t& rep) {
  boost_generator_t gen;
  gen.rep = rep;
  const index_t n = rep.grid.size();
  if (!rep.doubled) {
    gen.k = boost_block(rep.grid, rep.kappa);
    return gen;
  }
  auto kp = boost_block(rep.grid, rep.kappa);
  auto km = boost_block(rep.grid, -rep.kappa);
  std::vector<Eigen::Triplet<complex_t>> trip;
  trip.reserve(static_cast<std::size_t>(kp.nonZeros() + km.nonZeros()));
  for (int o = 0; o < kp.outerSize(); ++o)
    for (Eigen::SparseMatrix<complex_t>::InnerIterator it(kp, o); it; ++it)
      trip.emplace_back(it.row(), it.col(), it.value());
  for (int o = 0; o < km.outerSize(); ++o)
    for (Eigen::SparseMatrix<complex_t>::InnerIterator it(km, o); it; ++it)
      trip.emplace_back(n + it.row(), n + it.col(), it.value());
  Eigen::SparseMatrix<complex_t> k(2 * n, 2 * n);
  k.setFromTriplets(trip.begin(), trip.end());
  gen.k = std::move(k);
  return gen;
}

cvec_t pct_flat(const cone_rep_t& rep, const cvec_t& psi) {
  // the weight depends on u only, so the density-coordinate reflection matrix
  // is also the flat-coordinate one
  return pct_apply(rep, psi);
}

cvec_t to_flat(const cone_rep_t& rep, const cvec_t& phi) {
  require(phi.size() == rep.dim(), errc::ambient_mismatch, "state size mismatch");
  const cone_grid_t& g = rep.grid;
  const index_t n = g.size(), blocks = rep.doubled ? 2 : 1;
  cvec_t psi(phi.size());
  for (index_t b = 0; b < blocks; ++b)
    for (index_t i = 0; i < g.n_u; ++i) {
      const scalar_t sw = std::sqrt(g.weight(i));
      for (index_t j = 0; j < g.n_theta; ++j) {
        const index_t a = b * n + g.flat(i, j);
        psi[a] = phi[a] * sw;
      }
    }
  return psi;
}

cvec_t from_flat(const cone_rep_t& rep, const cvec_t& psi) {
  require(psi.size() == rep.dim(), errc::ambient_mismatch, "state size mismatch");
  const cone_grid_t& g = rep.grid;
  const index_t n = g.size(), blocks = rep.doubled ? 2 : 1;
  cvec_t phi(psi.size());
  for (index_t b = 0; b < blocks; ++b)
    for (index_t i = 0; i < g.n_u; ++i) {
      const scalar_t sw = std::sqrt(g.weight(i));
      for (index_t j = 0; j < g.n_theta; ++j) {
        const index_t a = b * n + g.flat(i, j);
        phi[a] = psi[a] / sw;
      }
    }
  return phi;
}

void boost_eigensystem(const boost_generator_t& gen, rvec_t& evals, cmat_t& evecs) {
  const cone_grid_t& g = gen.rep.grid;
  const index_t n = g.size();
  rvec_t ev;
  rmat_t w;
  block_eigensystem_real(g, gen.rep.kappa, ev, w);
  cmat_t vp = ungauge(g, w);
  if (!gen.rep.doubled) {
    evals = ev;
    evecs = vp;
    return;
  }
  // the -kappa block is the theta reflection of the +kappa block
  const auto perm = theta_reflection_perm(g);
  evals.resize(2 * n);
  evals << ev, ev;
  evecs = cmat_t::Zero(2 * n, 2 * n);
  evecs.topLeftCorner(n, n) = vp;
  evecs.bottomRightCorner(n, n) = reflect_rows(perm, vp);
}

wedge_modular_t wedge_subspace_w0(const cone_rep_t& rep, const wedge_options_t& opt) {
  require(rep.kappa == 0.0 || rep.doubled, errc::no_pct,
          "wedge modular data needs the reflection: use the doubled space when kappa > 0");
  require(opt.cutoff > 0.0 && opt.pair_tol >= 0.0 && opt.min_keep_fraction >= 0.0 &&
              opt.min_keep_fraction <= 1.0,
          errc::config_invalid, "bad wedge options");
  const cone_grid_t& g = rep.grid;
  const index_t n = g.size();

  rvec_t ev;
  rmat_t w;
  block_eigensystem_real(g, rep.kappa, ev, w);

  std::vector<index_t> keep;
  for (index_t a = 0; a < n; ++a)
    if (std::abs(2.0 * pi * ev[a]) <= opt.cutoff) keep.push_back(a);
  const scalar_t frac = static_cast<scalar_t>(keep.size()) / static_cast<scalar_t>(n);
  if (frac < opt.min_keep_fraction)
    fail(errc::cutoff_too_aggressive,
         "spectral cutoff keeps a fraction " + std::to_string(frac) +
             " of the modes, below the configured minimum " +
             std::to_string(opt.min_keep_fraction));

  const index_t m = static_cast<index_t>(keep.size());
  rmat_t wk(n, m);
  rvec_t lk(m);
  for (index_t c = 0; c < m; ++c) {
    wk.col(c) = w.col(keep[static_cast<std::size_t>(c)]);
    lk[c] = ev[keep[static_cast<std::size_t>(c)]];
  }
  w.resize(0, 0);
  cmat_t vp = ungauge(g, wk);
  wk.resize(0, 0);

  wedge_modular_t wm;
  wm.rep = rep;
  wm.cutoff = opt.cutoff;
  wm.pair_tol = opt.pair_tol;
  cmat_t bp = block_standard_basis(g, lk, vp, opt.pair_tol, false);
  if (!rep.doubled) {
    wm.lambda = lk;
    wm.modes = std::move(vp);
    wm.h = real_subspace_t{n, std::move(bp), {}};
    wm.n_modes_total = n;
    wm.n_modes_kept = m;
    return wm;
  }
  const auto perm = theta_reflection_perm(g);
  cmat_t vm = reflect_rows(perm, vp);
  cmat_t bm = block_standard_basis(g, lk, vm, opt.pair_tol, false);
  wm.lambda.resize(2 * m);
  wm.lambda << lk, lk;
  wm.modes = cmat_t::Zero(2 * n, 2 * m);
  wm.modes.topLeftCorner(n, m) = vp;
  wm.modes.bottomRightCorner(n, m) = vm;
  cmat_t basis = cmat_t::Zero(2 * n, bp.cols() + bm.cols());
  basis.topLeftCorner(n, bp.cols()) = bp;
  basis.bottomRightCorner(n, bm.cols()) = bm;
  wm.h = real_subspace_t{2 * n, std::move(basis), {}};
  wm.n_modes_total = 2 * n;
  wm.n_modes_kept = 2 * m;
  return wm;
}

cvec_t wedge_modular_t::delta_power(complex_t z, const cvec_t& psi) const {
  require(psi.size() == modes.rows(), errc::ambient_mismatch, "state size mismatch");
  cvec_t c = modes.adjoint() * psi;
  for (index_t a = 0; a < c.size(); ++a)
    c[a] *= std::exp(complex_t{-2.0 * pi, 0.0} * z * lambda[a]);
  return modes * c;
}

cvec_t wedge_modular_t::delta_it(scalar_t t, const cvec_t& psi) const {
  return delta_power(complex_t{0.0, t}, psi);
}

cvec_t wedge_modular_t::project_kept(const cvec_t& psi) const {
  require(psi.size() == modes.rows(), errc::ambient_mismatch, "state size mismatch");
  return modes * (modes.adjoint() * psi);
}

real_subspace_t wedge_subspace_opposite(const wedge_modular_t& wm) {
  const cone_grid_t& g = wm.rep.grid;
  const index_t n = g.size();
  if (!wm.rep.doubled) {
    cmat_t b = block_standard_basis(g, wm.lambda, wm.modes, wm.pair_tol, true);
    return real_subspace_t{n, std::move(b), wm.h.tol};
  }
  const index_t m = wm.modes.cols() / 2;
  const cmat_t vp = wm.modes.topLeftCorner(n, m);
  const cmat_t vm = wm.modes.bottomRightCorner(n, m);
  const rvec_t lk = wm.lambda.head(m);
  cmat_t bp = block_standard_basis(g, lk, vp, wm.pair_tol, true);
  cmat_t bm = block_standard_basis(g, lk, vm, wm.pair_tol, true);
  cmat_t basis = cmat_t::Zero(2 * n, bp.cols() + bm.cols());
  basis.topLeftCorner(n, bp.cols()) = bp;
  basis.bottomRightCorner(n, bm.cols()) = bm;
  return real_subspace_t{2 * n, std::move(basis), wm.h.tol};
}

real_subspace_t complement_in_kept(const wedge_modular_t& wm) {
  // work in the coefficient frame of the kept modes (an isometry), take the
  // symplectic complement there, and map back
  cmat_t hc = wm.modes.adjoint() * wm.h.basis;
  real_subspace_t in_frame{wm.modes.cols(), std::move(hc), wm.h.tol};
  real_subspace_t comp = symplectic_complement(in_frame);
  return real_subspace_t{wm.modes.rows(), wm.modes * comp.basis, wm.h.tol};
}

scalar_t modular_flow_vs_rep(const wedge_modular_t& wm, scalar_t t, const cvec_t& psi) {
  const cone_rep_t& rep = wm.rep;
  const cvec_t psi0 = wm.project_kept(psi);
  const scalar_t nrm = psi0.norm();
  require(nrm > 0.0, errc::config_invalid, "probe has no component in the kept span");
  const cvec_t a = wm.delta_it(t, psi0);
  poincare_t gb;
  gb.lam = lorentz_boost1(-2.0 * pi * t);
  const cvec_t b = to_flat(rep, rep_apply(rep, gb, from_flat(rep, psi0)));
  return (a - b).norm() / nrm;
}

wedge_family_t make_wedge_family(const cone_rep_t& rep, index_t n_wedges, scalar_t radius,
                                 scalar_t margin) {
  require(n_wedges >= 2, errc::config_invalid, "need at least two wedges");
  require(rep.grid.n_theta % n_wedges == 0, errc::config_invalid,
          "wedge rotations must be grid rotations: n_wedges must divide n_theta");
  require(radius > 0.0 && margin > 0.0, errc::config_invalid,
          "radius and margin must be positive");
  wedge_family_t fam;
  fam.rep = rep;
  const scalar_t s = radius + margin;
  for (index_t k = 0; k < n_wedges; ++k) {
    poincare_t rot;
    rot.lam = lorentz_rotation(2.0 * pi * static_cast<scalar_t>(k) /
                               static_cast<scalar_t>(n_wedges));
    poincare_t tr;
    tr.a = vec3_t(0.0, -s, 0.0);
    fam.transports.push_back(poincare_mul(rot, tr));
  }
  return fam;
}

localization_result_t localization_score(const wedge_modular_t& wm, const wedge_family_t& fam,
                                         index_t power_iters, std::uint64_t seed) {
  const cone_rep_t& rep = wm.rep;
  require(fam.rep.grid.size() == rep.grid.size() && fam.rep.doubled == rep.doubled,
          errc::ambient_mismatch, "family and wedge data use different representations");
  require(!fam.transports.empty(), errc::empty_family, "no wedges in the family");
  const cmat_t& b = wm.h.basis;
  const index_t nw = static_cast<index_t>(fam.transports.size());

  localization_result_t res;
  res.subspace_dim = b.cols();
  res.n_modes_kept = wm.n_modes_kept;
  res.n_modes_total = wm.n_modes_total;
  if (b.cols() == 0) return res;

  std::vector<poincare_t> inv;
  inv.reserve(static_cast<std::size_t>(nw));
  for (const auto& gk : fam.transports) inv.push_back(poincare_inv(gk));

  // power iteration on the mean of the transported wedge projections (a
  // real-linear PSD contraction; the iterate is kept as a complex vector)
  rng_t rng(seed);
  cvec_t v = rng.cgauss_vec(b.rows());
  v /= v.norm();
  scalar_t lam = 0.0, lam_prev = -1.0;
  for (index_t it = 0; it < power_iters; ++it) {
    cvec_t mv = cvec_t::Zero(v.size());
    for (index_t k = 0; k < nw; ++k) {
      const cvec_t z = rep_apply(rep, inv[static_cast<std::size_t>(k)], v);
      const rvec_t c = (b.adjoint() * z).real();
      const cvec_t y = b * c.cast<complex_t>();
      mv += rep_apply(rep, fam.transports[static_cast<std::size_t>(k)], y);
    }
    mv /= static_cast<scalar_t>(nw);
    lam = v.dot(mv).real();
    const scalar_t nm = mv.norm();
    if (nm == 0.0) break;
    v = mv / nm;
    if (it > 10 && std::abs(lam - lam_prev) < 1e-13) break;
    lam_prev = lam;
  }
  res.score = lam;

  // smallest principal cosine over adjacent wedge pairs
  auto transported = [&](index_t k) {
    cmat_t c(b.rows(), b.cols());
    for (index_t a = 0; a < b.cols(); ++a)
      c.col(a) = rep_apply(rep, fam.transports[static_cast<std::size_t>(k)], b.col(a));
    return c;
  };
  scalar_t minc = 1.0;
  cmat_t prev = transported(0);
  for (index_t k = 0; k < nw; ++k) {
    cmat_t next = transported((k + 1) % nw);
    const rmat_t gram = (prev.adjoint() * next).real();
    Eigen::BDCSVD<rmat_t> svd(gram);
    minc = std::min(minc, svd.singularValues().minCoeff());
    if (k + 2 <= nw) prev = std::move(next);
  }
  res.min_principal_cosine = minc;
  return res;
}

cvec_t gaussian_probe(const cone_rep_t& rep, scalar_t u0, scalar_t theta0, scalar_t su,
                      scalar_t sth) {
  require(su > 0.0 && sth > 0.0, errc::config_invalid, "probe widths must be positive");
  const cone_grid_t& g = rep.grid;
  const index_t n = g.size();
  cvec_t psi = cvec_t::Zero(rep.dim());
  for (index_t i = 0; i < g.n_u; ++i)
    for (index_t j = 0; j < g.n_theta; ++j) {
      const scalar_t x = (g.u(i) - u0) / su;
      const scalar_t d = std::remainder(g.theta(j) - theta0, 2.0 * pi) / sth;
      const scalar_t val = std::exp(-0.5 * (x * x + d * d));
      psi[g.flat(i, j)] = val;
      if (rep.doubled) psi[n + g.flat(i, j)] = val;
    }
  const scalar_t nm = psi.norm();
  require(nm > 0.0, errc::config_invalid, "probe vanished on the grid");
  return psi / nm;
}

cvec_t expmv_herm(const Eigen::SparseMatrix<complex_t>& k, scalar_t alpha, const cvec_t& v,
                  index_t krylov_m) {
  require(k.rows() == k.cols() && k.rows() == v.size(), errc::ambient_mismatch,
          "operator/state size mismatch");
  require(krylov_m >= 2, errc::config_invalid, "krylov space too small");
  if (alpha == 0.0 || v.norm() == 0.0) return v;

  // crude deterministic spectral-radius estimate for substepping
  scalar_t knorm = 0.0;
  {
    rng_t rng(0x5eed);
    cvec_t w = rng.cgauss_vec(k.rows());
    w /= w.norm();
    for (int it = 0; it < 20; ++it) {
      cvec_t kw = k * w;
      knorm = kw.norm();
      if (knorm == 0.0) break;
      w = kw / knorm;
    }
  }
  const index_t nsub = std::max<index_t>(
      1, static_cast<index_t>(std::ceil(std::abs(alpha) * std::max(knorm, 1e-30) / 10.0)));
  const scalar_t tau = alpha / static_cast<scalar_t>(nsub);

  cvec_t x = v;
  for (index_t step = 0; step < nsub; ++step) {
    const scalar_t beta0 = x.norm();
    if (beta0 == 0.0) return x;
    const index_t mm = std::min<index_t>(krylov_m, k.rows());
    cmat_t vv(x.size(), mm);
    rvec_t diag = rvec_t::Zero(mm), off = rvec_t::Zero(std::max<index_t>(mm - 1, 1));
    vv.col(0) = x / beta0;
    index_t built = 0;
    for (index_t j = 0; j < mm; ++j) {
      cvec_t w = k * vv.col(j);
      diag[j] = vv.col(j).dot(w).real();
      w -= diag[j] * vv.col(j);
      if (j > 0) w -= off[j - 1] * vv.col(j - 1);
      // full reorthogonalization keeps the recurrence honest at small m
      for (index_t i = 0; i <= j; ++i) w -= vv.col(i) * vv.col(i).dot(w);
      built = j + 1;
      if (j + 1 < mm) {
        const scalar_t bj = w.norm();
        if (bj < 1e-14 * beta0) break;  // invariant subspace reached
        off[j] = bj;
        vv.col(j + 1) = w / bj;
      }
    }
    rmat_t t = rmat_t::Zero(built, built);
    for (index_t j = 0; j < built; ++j) {
      t(j, j) = diag[j];
      if (j + 1 < built) {
        t(j, j + 1) = off[j];
        t(j + 1, j) = off[j];
      }
    }
    Eigen::SelfAdjointEigenSolver<rmat_t> es(t);
    require(es.info() == Eigen::Success, errc::config_invalid, "krylov eigensolve failed");
    cvec_t small(built);
    for (index_t j = 0; j < built; ++j)
      small[j] = std::exp(complex_t{0.0, tau * es.eigenvalues()[j]}) * es.eigenvectors()(0, j);
    x = beta0 * (vv.leftCols(built) * (es.eigenvectors().cast<complex_t>() * small));
  }
  return x;
}

borchers_result_t borchers_check(const cone_rep_t& rep, const std::vector<scalar_t>& ss,
                                 const std::vector<scalar_t>& ts, index_t n_probes,
                                 std::uint64_t seed) {
  require(!ss.empty() && !ts.empty() && n_probes > 0, errc::config_invalid,
          "need scaling parameters, translation parameters and probes");
  const auto gen = build_boost_generator(rep);
  const cone_grid_t& g = rep.grid;
  rng_t rng(seed);
  borchers_result_t res;
  res.n_u = g.n_u;
  res.n_theta = g.n_theta;
  const scalar_t u_lo = g.u(0), uspan = g.u(g.n_u - 1) - g.u(0);
  const vec3_t edge(1.0, 1.0, 0.0);
  for (index_t p = 0; p < n_probes; ++p) {
    const scalar_t u0 = rng.uniform(u_lo + 0.35 * uspan, u_lo + 0.65 * uspan);
    const scalar_t th0 = rng.uniform(0.0, 2.0 * pi);
    const scalar_t su = rng.uniform(0.08, 0.14) * uspan;
    const scalar_t sth = rng.uniform(0.5, 0.9);
    const cvec_t psi = gaussian_probe(rep, u0, th0, su, sth);
    for (scalar_t s : ss)
      for (scalar_t t : ts) {
        cvec_t x = expmv_herm(gen.k, 2.0 * pi * s, psi);  // delta^{-is}
        poincare_t tr;
        tr.a = t * edge;
        x = rep_apply(rep, tr, x);  // diagonal phase: identical in flat coords
        x = expmv_herm(gen.k, -2.0 * pi * s, x);  // delta^{is}
        poincare_t scaled;
        scaled.a = std::exp(-2.0 * pi * s) * t * edge;
        const cvec_t y = rep_apply(rep, scaled, psi);
        res.residual = std::max(res.residual, (x - y).norm());
      }
  }
  return res;
}

namespace {

cmat_t kron_mat(const cmat_t& a, const cmat_t& b) {
  cmat_t out(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t r = 0; r < a.rows(); ++r)
    for (index_t c = 0; c < a.cols(); ++c)
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return out;
}

cmat_t rot2(scalar_t ang) {
  cmat_t v(2, 2);
  v << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
  return v;
}

}  // namespace

counterexample_result_t counterexample_check(scalar_t omega, const std::vector<scalar_t>& ts,
                                             std::uint64_t seed) {
  require(!ts.empty(), errc::config_invalid, "need at least one sample time");
  counterexample_result_t res;
  res.ts = ts;

  // rotation-invariant factor: the real axis subspace of C^2
  real_subspace_t k2{2, cmat_t::Identity(2, 2), {}};
  // abstract wedge factor carrying its own modular flow
  const real_subspace_t hb = random_standard_subspace(3, seed);
  const modular_data_t mdb = tomita_from_subspace(hb);
  const real_subspace_t h6 = tensor_product(k2, hb);
  res.standard_ok = classify(h6).standard() && classify(k2).standard();
  const modular_data_t md6 = tomita_from_subspace(h6);

  // the tensor modular operator ignores the rotation factor entirely
  const cmat_t expect = kron_mat(cmat_t::Identity(2, 2), mdb.delta);
  res.tensor_modular_dev = op_norm(cmat_t(md6.delta - expect)) / op_norm(expect);

  for (scalar_t t : ts) {
    const cmat_t lhs = md6.delta_pow(complex_t{0.0, t});
    const cmat_t rhs = kron_mat(rot2(-2.0 * pi * omega * t), mdb.delta_pow(complex_t{0.0, t}));
    const scalar_t gap = op_norm(cmat_t(lhs - rhs));
    res.gaps.push_back(gap);
    res.max_gap = std::max(res.max_gap, gap);
    res.expected_gap_dev =
        std::max(res.expected_gap_dev, std::abs(gap - 2.0 * std::abs(std::sin(pi * omega * t))));
  }

  // the assigned boost unitaries do preserve the wedge subspace (covariance)
  for (scalar_t t : ts) {
    const cmat_t u = kron_mat(rot2(omega * t), mdb.delta_pow(complex_t{0.0, -t / (2.0 * pi)}));
    res.covariance_dev = std::max(res.covariance_dev, projection_distance(apply_linear(u, h6), h6));
  }

  // the rotation is a symmetry of the factor's modular data
  res.factor_symmetry_dev = commuting_unitary_deviation(k2, tomita_from_subspace(k2), rot2(0.777));

  // joins interchange with the common factor
  const real_subspace_t h1 = random_standard_subspace(3, seed + 1);
  const real_subspace_t h2 = random_standard_subspace(3, seed + 2);
  res.interchange_dev = projection_distance(
      join(tensor_product(k2, h1), tensor_product(k2, h2)), tensor_product(k2, join(h1, h2)));
  return res;
}

}  // namespace modloc
