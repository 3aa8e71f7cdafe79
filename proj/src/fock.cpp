#include "modloc/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "modloc/random.hpp"

namespace modloc {

namespace {

int popcount(index_t mask) { return std::popcount(static_cast<std::uint64_t>(mask)); }

cvec_t vec(const cmat_t& m) { return Eigen::Map<const cvec_t>(m.data(), m.size()); }

cmat_t unvec(const cvec_t& v, index_t d) {
  return Eigen::Map<const cmat_t>(v.data(), d, d);
}

// Kronecker product, column-major convention: vec(a·x·b) = (bᵀ ⊗ a)·vec(x).
cmat_t kron(const cmat_t& a, const cmat_t& b) {
  cmat_t out(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Incremental orthonormal span with two-pass re-orthogonalization.
struct span_builder_t {
  cmat_t q;  // ambient × dim
  explicit span_builder_t(index_t ambient) : q(ambient, 0) {}
  index_t dim() const { return q.cols(); }
  // Returns true when v carried a new direction (which is then appended).
  bool add(cvec_t v) {
    const scalar_t scale = v.norm();
    if (!(scale > 1e-13)) return false;
    v /= scale;
    for (int pass = 0; pass < 2; ++pass)
      if (q.cols() > 0) v -= q * (q.adjoint() * v);
    const scalar_t rest = v.norm();
    if (rest < 1e-10) return false;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / rest;
    return true;
  }
};

star_algebra_t algebra_from_span(index_t ambient_dim, cmat_t basis,
                                 std::vector<cmat_t> generators) {
  star_algebra_t a;
  a.ambient_dim = ambient_dim;
  a.basis = std::move(basis);
  a.generators = std::move(generators);
  return a;
}

scalar_t relative_op_deviation(const cmat_t& got, const cmat_t& want) {
  return op_norm(cmat_t(got - want)) / std::max(1.0, op_norm(want));
}

cmat_t imaginary_power(const cmat_t& positive, scalar_t t) {
  Eigen::SelfAdjointEigenSolver<cmat_t> es(positive);
  return es.eigenvectors() *
         (es.eigenvalues().array().pow(complex_t(0, t)).matrix()).asDiagonal() *
         es.eigenvectors().adjoint();
}

complex_t permanent_c(const cmat_t& m) {
  const int k = static_cast<int>(m.rows());
  if (k == 0) return 1.0;
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  complex_t acc = 0.0;
  do {
    complex_t term = 1.0;
    for (int i = 0; i < k; ++i) term *= m(i, idx[i]);
    acc += term;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return acc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fock space and field operators.
// ---------------------------------------------------------------------------

int fermi_fock_t::particle_number(index_t mask) const { return popcount(mask); }

cvec_t fermi_fock_t::vacuum() const {
  cvec_t v = cvec_t::Zero(dim());
  v(0) = 1.0;
  return v;
}

fermi_fock_t make_fermi_fock(index_t n_modes, index_t dim_max) {
  require(n_modes >= 1, errc::config_invalid, "at least one mode required");
  require(n_modes < 63 && (static_cast<index_t>(1) << n_modes) <= dim_max,
          errc::dimension_overflow, "fock dimension exceeds the configured cap");
  return {n_modes};
}

cmat_t annihilator(const fermi_fock_t& f, index_t mode) {
  require(mode < f.n_modes, errc::ambient_mismatch, "mode index out of range");
  const index_t d = f.dim(), bit = static_cast<index_t>(1) << mode;
  cmat_t a = cmat_t::Zero(d, d);
  for (index_t mask = 0; mask < d; ++mask) {
    if (!(mask & bit)) continue;
    const int sign = popcount(mask & (bit - 1)) % 2 ? -1 : 1;
    a(mask ^ bit, mask) = static_cast<scalar_t>(sign);
  }
  return a;
}

cmat_t fermi_field(const fermi_fock_t& f, const cvec_t& xi) {
  require(xi.size() == f.n_modes, errc::ambient_mismatch, "vector/mode count mismatch");
  const index_t d = f.dim();
  cmat_t m = cmat_t::Zero(d, d);
  for (index_t k = 0; k < f.n_modes; ++k) {
    const cmat_t a = annihilator(f, k);
    m += std::conj(xi(k)) * a + xi(k) * a.adjoint();
  }
  return m;
}

cmat_t number_parity(const fermi_fock_t& f) {
  const index_t d = f.dim();
  cmat_t g = cmat_t::Zero(d, d);
  for (index_t mask = 0; mask < d; ++mask)
    g(mask, mask) = popcount(mask) % 2 ? -1.0 : 1.0;
  return g;
}

cmat_t twist(const fermi_fock_t& f) {
  const index_t d = f.dim();
  cmat_t z = cmat_t::Zero(d, d);
  for (index_t mask = 0; mask < d; ++mask)
    z(mask, mask) = popcount(mask) % 2 ? complex_t(0, -1) : complex_t(1, 0);
  return z;
}

cmat_t gamma_minus(const fermi_fock_t& f, const cmat_t& t) {
  require(t.rows() == f.n_modes && t.cols() == f.n_modes, errc::ambient_mismatch,
          "one-particle operator size mismatch");
  const index_t d = f.dim();
  cmat_t lift = cmat_t::Zero(d, d);
  std::vector<index_t> rows, cols;
  for (index_t b = 0; b < d; ++b) {
    const int k = popcount(b);
    rows.clear();
    for (index_t m = 0; m < f.n_modes; ++m)
      if (b & (static_cast<index_t>(1) << m)) rows.push_back(m);
    for (index_t a = 0; a < d; ++a) {
      if (popcount(a) != k) continue;
      if (k == 0) {
        lift(b, a) = 1.0;
        continue;
      }
      cols.clear();
      for (index_t m = 0; m < f.n_modes; ++m)
        if (a & (static_cast<index_t>(1) << m)) cols.push_back(m);
      cmat_t sub(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) sub(i, j) = t(rows[i], cols[j]);
      lift(b, a) = sub.determinant();
    }
  }
  return lift;
}

anti_linear_t gamma_minus(const fermi_fock_t& f, const anti_linear_t& t) {
  return {gamma_minus(f, t.a)};
}

// ---------------------------------------------------------------------------
// Matrix *-algebras.
// ---------------------------------------------------------------------------

cmat_t star_algebra_t::element(index_t k) const {
  require(k < dim(), errc::ambient_mismatch, "basis index out of range");
  return unvec(basis.col(k), ambient_dim);
}

scalar_t star_algebra_t::containment_residual(const cmat_t& x) const {
  cvec_t v = vec(x);
  const scalar_t scale = v.norm();
  if (!(scale > 0)) return 0.0;
  v /= scale;
  return (v - basis * (basis.adjoint() * v)).norm();
}

star_algebra_t generate_algebra(const std::vector<cmat_t>& generators, index_t dim_max) {
  require(!generators.empty(), errc::empty_family,
          "generator list empty; the ambient dimension would be undetermined");
  const index_t d = generators.front().rows();
  require(d >= 1 && d <= dim_max, errc::dimension_overflow,
          "ambient dimension exceeds the configured cap");
  for (const cmat_t& g : generators)
    require(g.rows() == d && g.cols() == d, errc::ambient_mismatch,
            "generators must share one square size");

  span_builder_t span(d * d);
  std::vector<cmat_t> elems;
  auto add = [&](const cmat_t& x) {
    if (span.add(vec(x))) {
      elems.push_back(unvec(span.q.col(span.dim() - 1), d));
      return true;
    }
    return false;
  };

  add(cmat_t::Identity(d, d));
  for (const cmat_t& g : generators) {
    add(g);
    add(g.adjoint());
  }
  // close under products and adjoints: sweep all pairs until stable
  for (std::size_t fresh = 0; fresh < elems.size();) {
    const std::size_t upto = elems.size();
    for (std::size_t i = fresh; i < upto; ++i) {
      add(elems[i].adjoint());
      for (std::size_t j = 0; j < elems.size(); ++j) {
        add(elems[i] * elems[j]);
        if (j < fresh) add(elems[j] * elems[i]);
      }
    }
    fresh = upto;
  }
  return algebra_from_span(d, span.q, generators);
}

star_algebra_t commutant(const star_algebra_t& a) {
  const index_t d = a.ambient_dim, dd = d * d;
  const cmat_t id = cmat_t::Identity(d, d);
  cmat_t m = cmat_t::Zero(dd, dd);
  std::vector<cmat_t> gens = a.generators;
  if (gens.empty())
    for (index_t k = 0; k < a.dim(); ++k) gens.push_back(a.element(k));
  for (const cmat_t& g : gens) {
    for (int pass = 0; pass < 2; ++pass) {
      const cmat_t gg = pass ? cmat_t(g.adjoint()) : g;
      const cmat_t k = kron(gg.transpose(), id) - kron(id, gg);
      m += k.adjoint() * k;
    }
  }
  Eigen::SelfAdjointEigenSolver<cmat_t> es(m);
  const rvec_t ev = es.eigenvalues();
  const scalar_t cut = 1e-10 * std::max(1.0, ev(ev.size() - 1));
  index_t null_dim = 0;
  while (null_dim < ev.size() && ev(null_dim) < cut) ++null_dim;
  cmat_t basis = es.eigenvectors().leftCols(null_dim);
  std::vector<cmat_t> out_gens;
  for (index_t k = 0; k < null_dim; ++k) out_gens.push_back(unvec(basis.col(k), d));
  return algebra_from_span(d, std::move(basis), std::move(out_gens));
}

star_algebra_t algebra_meet(const star_algebra_t& a, const star_algebra_t& b) {
  require(a.ambient_dim == b.ambient_dim, errc::ambient_mismatch,
          "meet requires one ambient dimension");
  const index_t d = a.ambient_dim;
  // shared directions show up as unit cosines between the two orthonormal
  // spans; one-sided Jacobi keeps the vectors reliable in that degenerate limit
  Eigen::JacobiSVD<cmat_t> svd(a.basis.adjoint() * b.basis, Eigen::ComputeFullU);
  span_builder_t span(d * d);
  std::vector<cmat_t> gens;
  for (index_t k = 0; k < svd.singularValues().size(); ++k) {
    if (svd.singularValues()(k) < 1.0 - 1e-8) break;
    if (span.add(a.basis * svd.matrixU().col(k)))
      gens.push_back(unvec(span.q.col(span.dim() - 1), d));
  }
  return algebra_from_span(d, span.q, std::move(gens));
}

star_algebra_t conjugate_algebra(const cmat_t& u, const star_algebra_t& a) {
  require(u.rows() == a.ambient_dim && u.cols() == a.ambient_dim, errc::ambient_mismatch,
          "conjugating unitary size mismatch");
  span_builder_t span(a.ambient_dim * a.ambient_dim);
  for (index_t k = 0; k < a.dim(); ++k)
    span.add(vec(u * a.element(k) * u.adjoint()));
  std::vector<cmat_t> gens;
  for (const cmat_t& g : a.generators) gens.push_back(u * g * u.adjoint());
  return algebra_from_span(a.ambient_dim, span.q, std::move(gens));
}

scalar_t algebra_deviation(const star_algebra_t& a, const star_algebra_t& b) {
  if (a.ambient_dim != b.ambient_dim || a.dim() != b.dim()) return 1.0;
  scalar_t worst = 0;
  for (index_t k = 0; k < a.dim(); ++k) {
    worst = std::max(worst, b.containment_residual(a.element(k)));
    worst = std::max(worst, a.containment_residual(b.element(k)));
  }
  return worst;
}

scalar_t closure_deviation(const star_algebra_t& a) {
  scalar_t worst = a.containment_residual(cmat_t::Identity(a.ambient_dim, a.ambient_dim));
  for (index_t i = 0; i < a.dim(); ++i) {
    const cmat_t x = a.element(i);
    worst = std::max(worst, a.containment_residual(x.adjoint()));
    for (index_t j = 0; j < a.dim(); ++j)
      worst = std::max(worst, a.containment_residual(x * a.element(j)));
  }
  return worst;
}

star_algebra_t field_algebra(const fermi_fock_t& f, const real_subspace_t& h) {
  require(h.ambient_dim == f.n_modes, errc::ambient_mismatch,
          "subspace ambient must match the mode count");
  std::vector<cmat_t> gens;
  for (index_t k = 0; k < h.dim(); ++k) gens.push_back(fermi_field(f, h.basis.col(k)));
  if (gens.empty()) gens.push_back(cmat_t::Identity(f.dim(), f.dim()));
  return generate_algebra(gens, f.dim());
}

// ---------------------------------------------------------------------------
// Vacuum modular data.
// ---------------------------------------------------------------------------

modular_data_t vacuum_tomita(const star_algebra_t& a, const cvec_t& omega) {
  const index_t d = a.ambient_dim;
  require(omega.size() == d, errc::ambient_mismatch, "vector size mismatch");
  // x ↦ xΩ must be injective (separating) with full range (cyclic); on a
  // *-closed span both together force a square invertible coefficient map
  cmat_t m(d, a.dim()), mstar(d, a.dim());
  for (index_t k = 0; k < a.dim(); ++k) {
    const cmat_t x = a.element(k);
    m.col(k) = x * omega;
    mstar.col(k) = x.adjoint() * omega;
  }
  bool invertible = a.dim() == d;
  Eigen::ColPivHouseholderQR<cmat_t> qr(m);
  if (invertible) {
    qr.setThreshold(1e-10);
    invertible = qr.rank() == d;
  }
  require(invertible, errc::not_cyclic_separating,
          "the vector is not cyclic and separating for the algebra");

  // S(xΩ) = x*Ω, extended anti-linearly: matrix part  mstar · conj(m⁻¹)
  const cmat_t m_inv = qr.inverse();
  anti_linear_t s{mstar * m_inv.conjugate()};

  modular_data_t md;
  md.delta = compose(adjoint(s), s);  // positive part of the polar splitting
  Eigen::SelfAdjointEigenSolver<cmat_t> es(md.delta);
  require(es.eigenvalues()(0) > 0, errc::not_cyclic_separating,
          "degenerate closure operator");
  md.delta_evec = es.eigenvectors();
  md.delta_eval = es.eigenvalues();
  md.j = anti_linear_t{s.a * md.delta_pow(-0.5).conjugate()};
  return md;
}

real_subspace_t selfadjoint_cyclic_subspace(const star_algebra_t& a, const cvec_t& omega) {
  const index_t d = a.ambient_dim;
  require(omega.size() == d, errc::ambient_mismatch, "vector size mismatch");
  cmat_t cols(d, 2 * a.dim());
  for (index_t k = 0; k < a.dim(); ++k) {
    const cmat_t x = a.element(k);
    cols.col(2 * k) = (x + x.adjoint()) * omega;
    cols.col(2 * k + 1) = complex_t(0, 1) * (x - x.adjoint()) * omega;
  }
  return make_real_subspace(cols);
}

// ---------------------------------------------------------------------------
// Second-quantization identity report.
// ---------------------------------------------------------------------------

scalar_t secquant_report_t::max_deviation() const {
  scalar_t worst = 0;
  for (const auto& id : identities) worst = std::max(worst, id.deviation);
  return worst;
}

std::string secquant_report_t::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& id : identities)
    arr.push_back({{"identity", id.identity},
                   {"deviation", id.deviation},
                   {"n", n},
                   {"seed", seed}});
  return arr.dump(2);
}

secquant_report_t verify_secquant(const real_subspace_t& h,
                                  const std::vector<real_subspace_t>& family,
                                  std::uint64_t seed) {
  const index_t n = h.ambient_dim;
  require(n >= 1 && n <= 5, errc::dimension_overflow,
          "identity verification is capped at five modes");
  require(classify(h).standard(), errc::not_standard,
          "identity verification needs a standard subspace");

  auto f = make_fermi_fock(n);
  const cvec_t omega = f.vacuum();
  const cmat_t z = twist(f);
  const modular_data_t one = tomita_from_subspace(h);
  star_algebra_t alg = field_algebra(f, h);
  const modular_data_t fock = vacuum_tomita(alg, omega);

  secquant_report_t rep;
  rep.n = n;
  rep.seed = seed;

  const complex_t i1(0, 1);
  rep.identities.push_back(
      {"a-:s", relative_op_deviation(fock.s().a, z * gamma_minus(f, cmat_t(i1 * one.s().a)))});
  rep.identities.push_back(
      {"a-:j", relative_op_deviation(fock.j.a, z * gamma_minus(f, cmat_t(i1 * one.j.a)))});
  rep.identities.push_back(
      {"a-:delta", relative_op_deviation(fock.delta, gamma_minus(f, one.delta))});

  // ordered field products: applying the closure operator reverses them
  rng_t rng(seed * 977 + 13);
  scalar_t rev_worst = 0;
  const anti_linear_t s_fock = fock.s();
  for (index_t k = 1; k <= n; ++k) {
    cvec_t fwd = omega, bwd = omega;
    std::vector<cmat_t> fields;
    for (index_t j = 0; j < k; ++j) {
      cvec_t xi = cvec_t::Zero(n);
      for (index_t b = 0; b < h.dim(); ++b) xi += rng.gauss() * h.basis.col(b);
      fields.push_back(fermi_field(f, xi));
    }
    for (index_t j = 0; j < k; ++j) {
      fwd = fields[k - 1 - j] * fwd;  // Ψ(ξ₁)…Ψ(ξ_k)Ω applied right to left
      bwd = fields[j] * bwd;          // Ψ(ξ_k)…Ψ(ξ₁)Ω
    }
    rev_worst = std::max(rev_worst, (s_fock(fwd) - bwd).norm() / bwd.norm());
  }
  rep.identities.push_back({"reversed-product", rev_worst});

  const star_algebra_t lhs_b = commutant(alg);
  const star_algebra_t rhs_b =
      conjugate_algebra(z, field_algebra(f, times_i(symplectic_complement(h))));
  rep.identities.push_back({"b", algebra_deviation(lhs_b, rhs_b)});

  if (family.size() >= 2) {
    for (const auto& ha : family)
      require(ha.ambient_dim == n, errc::ambient_mismatch,
              "family members must share the ambient space");
    std::vector<cmat_t> all_gens;
    std::vector<star_algebra_t> algs;
    for (const auto& ha : family) {
      algs.push_back(field_algebra(f, ha));
      for (const cmat_t& g : algs.back().generators) all_gens.push_back(g);
    }
    const star_algebra_t joined = generate_algebra(all_gens, f.dim());
    rep.identities.push_back(
        {"c", algebra_deviation(field_algebra(f, join_all(family)), joined)});

    star_algebra_t cap = algs.front();
    for (std::size_t k = 1; k < algs.size(); ++k) cap = algebra_meet(cap, algs[k]);
    rep.identities.push_back(
        {"d", algebra_deviation(field_algebra(f, meet_all(family)), cap)});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Bose branch.
// ---------------------------------------------------------------------------

bose_fock_t make_bose_fock(index_t n_modes, index_t max_particles, index_t dim_max) {
  require(n_modes >= 1, errc::config_invalid, "at least one mode required");
  bose_fock_t f;
  f.n_modes = n_modes;
  f.max_particles = max_particles;
  // enumerate occupation vectors level by level, lexicographically
  std::vector<int> occ(n_modes, 0);
  for (index_t k = 0; k <= max_particles; ++k) {
    std::fill(occ.begin(), occ.end(), 0);
    occ[0] = static_cast<int>(k);
    while (true) {
      f.occupations.push_back(occ);
      require(static_cast<index_t>(f.occupations.size()) <= dim_max,
              errc::dimension_overflow, "bose truncation exceeds the configured cap");
      // next composition of k in lexicographic order
      int i = static_cast<int>(n_modes) - 2;
      while (i >= 0 && occ[i] == 0) --i;
      if (i < 0) break;
      const int tail = occ[static_cast<int>(n_modes) - 1];
      occ[i] -= 1;
      occ[i + 1] = tail + 1;
      if (i + 1 != static_cast<int>(n_modes) - 1) occ[static_cast<int>(n_modes) - 1] = 0;
    }
  }
  return f;
}

cmat_t gamma_plus(const bose_fock_t& f, const cmat_t& t) {
  require(t.rows() == f.n_modes && t.cols() == f.n_modes, errc::ambient_mismatch,
          "one-particle operator size mismatch");
  const index_t d = f.dim();
  std::vector<scalar_t> fact(f.max_particles + 1, 1.0);
  for (index_t k = 1; k <= f.max_particles; ++k)
    fact[k] = fact[k - 1] * static_cast<scalar_t>(k);
  auto weight = [&](const std::vector<int>& occ) {
    scalar_t w = 1.0;
    for (int o : occ) w *= fact[o];
    return w;
  };
  auto total = [](const std::vector<int>& occ) {
    int s = 0;
    for (int o : occ) s += o;
    return s;
  };

  cmat_t lift = cmat_t::Zero(d, d);
  for (index_t b = 0; b < d; ++b) {
    const auto& beta = f.occupations[b];
    const int k = total(beta);
    for (index_t a = 0; a < d; ++a) {
      const auto& alpha = f.occupations[a];
      if (total(alpha) != k) continue;
      if (k == 0) {
        lift(b, a) = 1.0;
        continue;
      }
      cmat_t sub(k, k);
      int row = 0;
      for (index_t i = 0; i < f.n_modes; ++i)
        for (int r = 0; r < beta[i]; ++r, ++row) {
          int col = 0;
          for (index_t j = 0; j < f.n_modes; ++j)
            for (int c = 0; c < alpha[j]; ++c, ++col) sub(row, col) = t(i, j);
        }
      lift(b, a) = permanent_c(sub) / std::sqrt(weight(beta) * weight(alpha));
    }
  }
  return lift;
}

}  // namespace modloc
