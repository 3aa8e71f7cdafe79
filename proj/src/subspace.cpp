#include "modloc/subspace.hpp"

#include <Eigen/SVD>

#include "modloc/random.hpp"

namespace modloc {

const char* errc_name(errc code) {
  switch (code) {
    case errc::not_standard: return "NotStandard";
    case errc::invalid_modular_data: return "InvalidModularData";
    case errc::ambient_mismatch: return "AmbientMismatch";
    case errc::off_cone: return "OffCone";
    case errc::section_singular: return "SectionSingular";
    case errc::off_grid: return "OffGrid";
    case errc::incompatible_step: return "IncompatibleStep";
    case errc::no_pct: return "NoPCT";
    case errc::cutoff_too_aggressive: return "CutoffTooAggressive";
    case errc::empty_family: return "EmptyFamily";
    case errc::not_edge_direction: return "NotEdgeDirection";
    case errc::generator_not_invariant: return "GeneratorNotInvariant";
    case errc::subspace_not_invariant: return "SubspaceNotInvariant";
    case errc::dimension_overflow: return "DimensionOverflow";
    case errc::not_cyclic_separating: return "NotCyclicSeparating";
    case errc::support_violation: return "SupportViolation";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::io_error: return "IoError";
    case errc::check_failed: return "CheckFailed";
    case errc::replay_mismatch: return "ReplayMismatch";
  }
  return "UnknownError";
}

rvec_t realify(const cvec_t& z) {
  rvec_t x(2 * z.size());
  x.head(z.size()) = z.real();
  x.tail(z.size()) = z.imag();
  return x;
}

cvec_t complexify(const rvec_t& x) {
  const index_t n = x.size() / 2;
  cvec_t z(n);
  z.real() = x.head(n);
  z.imag() = x.tail(n);
  return z;
}

rmat_t realify_columns(const cmat_t& cols) {
  rmat_t out(2 * cols.rows(), cols.cols());
  out.topRows(cols.rows()) = cols.real();
  out.bottomRows(cols.rows()) = cols.imag();
  return out;
}

cmat_t complexify_columns(const rmat_t& cols) {
  const index_t n = cols.rows() / 2;
  cmat_t out(n, cols.cols());
  out.real() = cols.topRows(n);
  out.imag() = cols.bottomRows(n);
  return out;
}

rmat_t realify_linear(const cmat_t& m) {
  const index_t n = m.rows();
  rmat_t out(2 * n, 2 * m.cols());
  out.topLeftCorner(n, m.cols()) = m.real();
  out.topRightCorner(n, m.cols()) = -m.imag();
  out.bottomLeftCorner(n, m.cols()) = m.imag();
  out.bottomRightCorner(n, m.cols()) = m.real();
  return out;
}

rmat_t realify_anti_linear(const anti_linear_t& s) {
  const index_t n = s.a.rows();
  rmat_t out(2 * n, 2 * s.a.cols());
  out.topLeftCorner(n, s.a.cols()) = s.a.real();
  out.topRightCorner(n, s.a.cols()) = s.a.imag();
  out.bottomLeftCorner(n, s.a.cols()) = s.a.imag();
  out.bottomRightCorner(n, s.a.cols()) = -s.a.real();
  return out;
}

scalar_t op_norm(const cmat_t& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<cmat_t>(m).singularValues()(0);
}

scalar_t op_norm(const rmat_t& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<rmat_t>(m).singularValues()(0);
}

real_subspace_t make_real_subspace(const cmat_t& spanning, tolerance_policy tol) {
  real_subspace_t h;
  h.ambient_dim = spanning.rows();
  h.tol = tol;
  if (spanning.cols() == 0) {
    h.basis = cmat_t(spanning.rows(), 0);
    return h;
  }
  // Rank-revealing QR keeps the orthonormal basis inside the span of the
  // input columns even when the column set has exactly repeated singular
  // values; divide-and-conquer SVD vectors are unreliable in that regime.
  rmat_t r = realify_columns(spanning);
  Eigen::ColPivHouseholderQR<rmat_t> qr(r);
  const rvec_t diag = qr.matrixQR().diagonal().cwiseAbs();
  const scalar_t cut = tol.rank_tol(diag.size() ? diag(0) : 0.0);
  index_t rank = 0;
  while (rank < diag.size() && diag(rank) > cut) ++rank;
  rmat_t q = qr.householderQ() * rmat_t::Identity(r.rows(), rank);
  h.basis = complexify_columns(q);
  return h;
}

real_subspace_t random_standard_subspace(index_t n, std::uint64_t seed, tolerance_policy tol) {
  rng_t rng(seed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    real_subspace_t h = make_real_subspace(rng.cgauss_mat(n, n), tol);
    if (h.dim() == n && classify(h).standard()) return h;
  }
  fail(errc::not_standard, "random sampling failed to produce a standard subspace");
}

subspace_flags_t classify(const real_subspace_t& h) {
  subspace_flags_t f;
  const index_t n = h.ambient_dim;
  const index_t d = h.dim();
  if (d == 0) return f;
  {
    Eigen::BDCSVD<cmat_t> svd(h.basis);
    const rvec_t& sv = svd.singularValues();
    const scalar_t cut = h.tol.rank_tol(sv(0));
    index_t rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    f.cyclic = (rank == n);
  }
  {
    cmat_t both(n, 2 * d);
    both.leftCols(d) = h.basis;
    both.rightCols(d) = complex_t(0, 1) * h.basis;
    rmat_t r = realify_columns(both);
    Eigen::BDCSVD<rmat_t> svd(r);
    const rvec_t& sv = svd.singularValues();
    const scalar_t cut = h.tol.rank_tol(sv(0));
    index_t rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    f.separating = (rank == 2 * d);
  }
  return f;
}

real_subspace_t times_i(const real_subspace_t& h) {
  real_subspace_t out = h;
  out.basis = complex_t(0, 1) * h.basis;
  return out;
}

real_subspace_t symplectic_complement(const real_subspace_t& h) {
  const index_t n = h.ambient_dim;
  const index_t d = h.dim();
  real_subspace_t out;
  out.ambient_dim = n;
  out.tol = h.tol;
  if (d == 0) {
    out.basis = complexify_columns(rmat_t::Identity(2 * n, 2 * n));
    return out;
  }
  // H' = (iH)^perp for the real inner product.
  rmat_t r = realify_columns(complex_t(0, 1) * h.basis);
  Eigen::JacobiSVD<rmat_t> svd(r, Eigen::ComputeFullU);
  out.basis = complexify_columns(svd.matrixU().rightCols(2 * n - d));
  return out;
}

rvec_t principal_cosines(const real_subspace_t& h, const real_subspace_t& k) {
  require(h.ambient_dim == k.ambient_dim, errc::ambient_mismatch,
          "principal_cosines: ambient dimensions differ");
  if (h.dim() == 0 || k.dim() == 0) return rvec_t(0);
  rmat_t m = realify_columns(h.basis).transpose() * realify_columns(k.basis);
  return Eigen::BDCSVD<rmat_t>(m).singularValues();
}

real_subspace_t meet(const real_subspace_t& h, const real_subspace_t& k) {
  require(h.ambient_dim == k.ambient_dim, errc::ambient_mismatch,
          "meet: ambient dimensions differ");
  real_subspace_t out;
  out.ambient_dim = h.ambient_dim;
  out.tol = h.tol;
  if (h.dim() == 0 || k.dim() == 0) {
    out.basis = cmat_t(h.ambient_dim, 0);
    return out;
  }
  rmat_t rh = realify_columns(h.basis);
  rmat_t m = rh.transpose() * realify_columns(k.basis);
  // shared directions give exactly repeated unit singular values; use the
  // one-sided Jacobi SVD, whose vectors stay accurate under degeneracy
  Eigen::JacobiSVD<rmat_t> svd(m, Eigen::ComputeFullU);
  const rvec_t& sv = svd.singularValues();
  const scalar_t thr = 1.0 - h.tol.rank_tol(1.0);
  index_t shared = 0;
  while (shared < sv.size() && sv(shared) > thr) ++shared;
  out.basis = complexify_columns(rh * svd.matrixU().leftCols(shared));
  return out;
}

real_subspace_t join(const real_subspace_t& h, const real_subspace_t& k) {
  require(h.ambient_dim == k.ambient_dim, errc::ambient_mismatch,
          "join: ambient dimensions differ");
  cmat_t both(h.ambient_dim, h.dim() + k.dim());
  both.leftCols(h.dim()) = h.basis;
  both.rightCols(k.dim()) = k.basis;
  return make_real_subspace(both, h.tol);
}

real_subspace_t meet_all(const std::vector<real_subspace_t>& hs) {
  require(!hs.empty(), errc::empty_family, "meet_all: empty family");
  real_subspace_t acc = hs.front();
  for (std::size_t i = 1; i < hs.size(); ++i) acc = meet(acc, hs[i]);
  return acc;
}

real_subspace_t join_all(const std::vector<real_subspace_t>& hs) {
  require(!hs.empty(), errc::empty_family, "join_all: empty family");
  real_subspace_t acc = hs.front();
  for (std::size_t i = 1; i < hs.size(); ++i) acc = join(acc, hs[i]);
  return acc;
}

scalar_t projection_distance(const real_subspace_t& h, const real_subspace_t& k) {
  require(h.ambient_dim == k.ambient_dim, errc::ambient_mismatch,
          "projection_distance: ambient dimensions differ");
  if (h.dim() != k.dim()) return 1.0;
  if (h.dim() == 0) return 0.0;
  // For equal dimensions ||P_H - P_K||_2 is the sine of the largest principal
  // angle; the residual form below avoids the cancellation a cosine-based
  // sqrt(1 - sigma^2) would suffer for tiny angles.
  rmat_t rh = realify_columns(h.basis), rk = realify_columns(k.basis);
  rmat_t res_k = rk - rh * (rh.transpose() * rk);
  rmat_t res_h = rh - rk * (rk.transpose() * rh);
  return std::max(op_norm(res_k), op_norm(res_h));
}

scalar_t distance_to(const real_subspace_t& h, const cvec_t& x) {
  require(x.size() == h.ambient_dim, errc::ambient_mismatch,
          "distance_to: vector size differs from ambient dimension");
  rvec_t rx = realify(x);
  if (h.dim() == 0) return rx.norm();
  rmat_t rb = realify_columns(h.basis);
  return (rx - rb * (rb.transpose() * rx)).norm();
}

anti_linear_t tomita_s(const real_subspace_t& h) {
  const index_t n = h.ambient_dim;
  require(h.dim() == n, errc::not_standard, "tomita_s: real dimension must equal ambient dimension");
  require(classify(h).standard(), errc::not_standard, "tomita_s: subspace is not standard");
  // S(E c) = E conj(c)  =>  matrix part  E conj(E)^{-1}.
  Eigen::FullPivLU<cmat_t> lu(h.basis.conjugate());
  require(lu.isInvertible(), errc::not_standard, "tomita_s: basis not complex-invertible");
  return {h.basis * lu.solve(cmat_t::Identity(n, n))};
}

cmat_t modular_data_t::delta_pow(complex_t z) const {
  cvec_t d(delta_eval.size());
  for (index_t i = 0; i < delta_eval.size(); ++i)
    d(i) = std::exp(z * std::log(delta_eval(i)));
  return delta_evec * d.asDiagonal() * delta_evec.adjoint();
}

anti_linear_t modular_data_t::s() const { return {j.a * delta_pow(0.5).conjugate()}; }

modular_data_t tomita_from_subspace(const real_subspace_t& h) {
  anti_linear_t s = tomita_s(h);
  modular_data_t md;
  md.delta = compose(adjoint(s), s);  // S*S, linear and positive
  md.delta = 0.5 * (md.delta + md.delta.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<cmat_t> es(md.delta);
  require(es.info() == Eigen::Success, errc::not_standard, "tomita_from_subspace: eigensolve failed");
  md.delta_eval = es.eigenvalues();
  md.delta_evec = es.eigenvectors();
  require(md.delta_eval(0) > 0, errc::not_standard, "tomita_from_subspace: delta not positive");
  md.j = {s.a * md.delta_pow(-0.5).conjugate()};
  return md;
}

real_subspace_t subspace_from_tomita(const modular_data_t& md, tolerance_policy tol) {
  const index_t n = md.dim();
  require(n > 0 && md.j.a.rows() == n && md.j.a.cols() == n && md.delta.cols() == n,
          errc::invalid_modular_data, "subspace_from_tomita: shape mismatch");
  const scalar_t slack = 1e-8 * static_cast<scalar_t>(n);
  require(op_norm(cmat_t(md.delta - md.delta.adjoint())) <= slack * op_norm(md.delta),
          errc::invalid_modular_data, "subspace_from_tomita: delta not hermitian");
  require(md.delta_eval.size() == n && md.delta_eval(0) > 0, errc::invalid_modular_data,
          "subspace_from_tomita: delta not positive");
  require(op_norm(cmat_t(compose(md.j, md.j) - cmat_t::Identity(n, n))) <= slack,
          errc::invalid_modular_data, "subspace_from_tomita: j is not an involution");
  cmat_t jdj = md.j.a * md.delta.conjugate() * md.j.a.conjugate();
  cmat_t dinv = md.delta_pow(-1.0);
  require(op_norm(cmat_t(jdj - dinv)) <= slack * op_norm(dinv), errc::invalid_modular_data,
          "subspace_from_tomita: j delta j != delta^{-1}");

  rmat_t m = realify_anti_linear(md.s()) - rmat_t::Identity(2 * n, 2 * n);
  Eigen::JacobiSVD<rmat_t> svd(m, Eigen::ComputeFullV);
  const rvec_t& sv = svd.singularValues();
  const scalar_t cut = tol.rank_tol(sv(0));
  index_t kernel = 0;
  while (kernel < sv.size() && sv(2 * n - 1 - kernel) <= cut) ++kernel;
  require(kernel == n, errc::invalid_modular_data,
          "subspace_from_tomita: fixed-point space has wrong dimension");
  real_subspace_t out;
  out.ambient_dim = n;
  out.tol = tol;
  out.basis = complexify_columns(svd.matrixV().rightCols(n));
  return out;
}

real_subspace_t apply_linear(const cmat_t& u, const real_subspace_t& h) {
  require(u.cols() == h.ambient_dim, errc::ambient_mismatch, "apply_linear: shape mismatch");
  return make_real_subspace(u * h.basis, h.tol);
}

real_subspace_t apply_anti_linear(const anti_linear_t& s, const real_subspace_t& h) {
  require(s.a.cols() == h.ambient_dim, errc::ambient_mismatch, "apply_anti_linear: shape mismatch");
  return make_real_subspace(s.a * h.basis.conjugate(), h.tol);
}

scalar_t duality_deviation(const std::vector<real_subspace_t>& hs) {
  require(!hs.empty(), errc::empty_family, "duality_deviation: empty family");
  real_subspace_t lhs = symplectic_complement(meet_all(hs));
  std::vector<real_subspace_t> comps;
  comps.reserve(hs.size());
  for (const auto& h : hs) comps.push_back(symplectic_complement(h));
  real_subspace_t rhs = join_all(comps);
  return projection_distance(lhs, rhs);
}

real_subspace_t tensor_product(const real_subspace_t& h, const real_subspace_t& k) {
  const index_t n = h.ambient_dim, m = k.ambient_dim;
  require(n > 0 && m > 0 && n * m <= (index_t{1} << 20), errc::dimension_overflow,
          "tensor_product: ambient dimension too large");
  cmat_t span(n * m, h.dim() * k.dim());
  for (index_t a = 0; a < h.dim(); ++a)
    for (index_t b = 0; b < k.dim(); ++b) {
      cvec_t col(n * m);
      for (index_t i = 0; i < n; ++i) col.segment(i * m, m) = h.basis(i, a) * k.basis.col(b);
      span.col(a * k.dim() + b) = col;
    }
  return make_real_subspace(span, h.tol);
}

scalar_t kms_deviation(const real_subspace_t& h, const modular_data_t& md,
                       const std::vector<scalar_t>& ts) {
  require(md.dim() == h.ambient_dim, errc::ambient_mismatch, "kms_deviation: shape mismatch");
  scalar_t worst = 0.0;
  for (scalar_t t : ts) {
    cmat_t a = md.delta_pow(complex_t(1.0, -t));  // delta^{1-it}
    cmat_t b = md.delta_pow(complex_t(0.0, -t));  // delta^{-it}
    for (index_t i = 0; i < h.dim(); ++i) {
      cvec_t xi = h.basis.col(i);
      cvec_t axi = a * xi, bxi = b * xi;
      for (index_t jj = 0; jj < h.dim(); ++jj) {
        cvec_t eta = h.basis.col(jj);
        worst = std::max(worst, std::abs(inner(eta, axi) - inner(bxi, eta)));
      }
    }
  }
  return worst;
}

scalar_t commuting_unitary_deviation(const real_subspace_t& h, const modular_data_t& md,
                                     const cmat_t& u) {
  const index_t n = h.ambient_dim;
  require(u.rows() == n && u.cols() == n && md.dim() == n, errc::ambient_mismatch,
          "commuting_unitary_deviation: shape mismatch");
  require(op_norm(cmat_t(u.adjoint() * u - cmat_t::Identity(n, n))) <= 1e-8 * n,
          errc::config_invalid, "commuting_unitary_deviation: matrix is not unitary");
  require(projection_distance(apply_linear(u, h), h) <= 1e-8 * n, errc::subspace_not_invariant,
          "commuting_unitary_deviation: u does not preserve the subspace");
  scalar_t dev_delta = op_norm(cmat_t(u * md.delta - md.delta * u));
  scalar_t dev_j = op_norm(cmat_t(u * md.j.a - md.j.a * u.conjugate()));
  return std::max(dev_delta, dev_j);
}

}  // namespace modloc
