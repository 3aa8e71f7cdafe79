#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "modloc/random.hpp"
#include "modloc/subspace.hpp"

using namespace modloc;

// ---- independent oracles ----------------------------------------------------
//
// The routines below re-derive the answers the library is supposed to produce,
// through different linear algebra than the implementation uses. Tests compare
// library output against these.

// Symplectic complement via the defining constraints Im<x, xi_k> = 0: build the
// real constraint matrix row by row and take its LU kernel.
static real_subspace_t oracle_symplectic_complement(const real_subspace_t& h) {
  const index_t n = h.ambient_dim;
  if (h.dim() == 0)
    return make_real_subspace(complexify_columns(rmat_t::Identity(2 * n, 2 * n)), h.tol);
  rmat_t constraints(h.dim(), 2 * n);
  for (index_t k = 0; k < h.dim(); ++k) {
    // Im<x, xi> = sum_i (Re x_i Im xi_i - Im x_i Re xi_i)
    constraints.row(k).head(n) = h.basis.col(k).imag().transpose();
    constraints.row(k).tail(n) = -h.basis.col(k).real().transpose();
  }
  Eigen::FullPivLU<rmat_t> lu(constraints);
  rmat_t kernel = lu.kernel();
  return make_real_subspace(complexify_columns(kernel), h.tol);
}

// Fixed points of an involutive real matrix m as the column space of (m + 1).
static real_subspace_t oracle_fixed_points(const rmat_t& m, tolerance_policy tol) {
  rmat_t p = m + rmat_t::Identity(m.rows(), m.cols());
  return make_real_subspace(complexify_columns(p), tol);
}

static cmat_t kron(const cmat_t& a, const cmat_t& b) {
  cmat_t out(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

static real_subspace_t real_axis_subspace(index_t n) {
  return make_real_subspace(cmat_t::Identity(n, n));
}

// -----------------------------------------------------------------------------

TEST_CASE("inner product is conjugate-linear in the first argument") {
  rng_t rng(11);
  cvec_t x = rng.cgauss_vec(5), y = rng.cgauss_vec(5);
  complex_t a(0.7, -1.3);
  CHECK(std::abs(inner(a * x, y) - std::conj(a) * inner(x, y)) < 1e-12);
  CHECK(std::abs(inner(x, a * y) - a * inner(x, y)) < 1e-12);
}

TEST_CASE("realification carries the complex structure correctly") {
  rng_t rng(12);
  const index_t n = 4;
  cvec_t z = rng.cgauss_vec(n);
  CHECK((complexify(realify(z)) - z).norm() < 1e-15);

  // multiplication by i realifies to [[0,-I],[I,0]]
  rmat_t mi = realify_linear(complex_t(0, 1) * cmat_t::Identity(n, n));
  rmat_t expect(2 * n, 2 * n);
  expect.setZero();
  expect.topRightCorner(n, n) = -rmat_t::Identity(n, n);
  expect.bottomLeftCorner(n, n) = rmat_t::Identity(n, n);
  CHECK((mi - expect).norm() < 1e-15);

  cmat_t m = rng.cgauss_mat(n, n);
  cvec_t w = rng.cgauss_vec(n);
  CHECK((realify_linear(m) * realify(w) - realify(m * w)).norm() < 1e-13);

  anti_linear_t s{rng.cgauss_mat(n, n)};
  CHECK((realify_anti_linear(s) * realify(w) - realify(s(w))).norm() < 1e-13);

  // real inner product of realifications = Re<x,y>
  cvec_t x = rng.cgauss_vec(n);
  CHECK(std::abs(realify(x).dot(realify(w)) - re_inner(x, w)) < 1e-13);
}

TEST_CASE("make_real_subspace orthonormalizes and drops dependent directions") {
  rng_t rng(13);
  cmat_t span(4, 3);
  span.col(0) = rng.cgauss_vec(4);
  span.col(1) = rng.cgauss_vec(4);
  span.col(2) = 2.0 * span.col(0) - 0.5 * span.col(1);  // real-linear combo
  real_subspace_t h = make_real_subspace(span);
  CHECK(h.dim() == 2);
  rmat_t rb = realify_columns(h.basis);
  CHECK((rb.transpose() * rb - rmat_t::Identity(2, 2)).norm() < 1e-12);
  for (index_t k = 0; k < 3; ++k) CHECK(distance_to(h, span.col(k)) < 1e-12);
}

TEST_CASE("classify distinguishes cyclic, separating, standard") {
  const index_t n = 3;
  real_subspace_t reals = real_axis_subspace(n);
  auto f = classify(reals);
  CHECK(f.cyclic);
  CHECK(f.separating);
  CHECK(f.standard());

  // a complex line in C^3: separating but not cyclic
  cmat_t one(3, 1);
  one.setZero();
  one(0, 0) = 1;
  auto f1 = classify(make_real_subspace(one));
  CHECK_FALSE(f1.cyclic);
  CHECK(f1.separating);

  // e1 and i*e1: neither separating nor cyclic in C^3
  cmat_t two(3, 2);
  two.setZero();
  two(0, 0) = 1;
  two(0, 1) = complex_t(0, 1);
  auto f2 = classify(make_real_subspace(two));
  CHECK_FALSE(f2.cyclic);
  CHECK_FALSE(f2.separating);

  real_subspace_t h = random_standard_subspace(5, 21);
  CHECK(h.dim() == 5);
  CHECK(classify(h).standard());
}

TEST_CASE("symplectic complement matches the constraint-kernel oracle") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    real_subspace_t h = random_standard_subspace(4, seed);
    real_subspace_t hp = symplectic_complement(h);
    CHECK(hp.dim() == 4);
    CHECK(projection_distance(hp, oracle_symplectic_complement(h)) < 1e-10);
    // double complement returns h
    CHECK(projection_distance(symplectic_complement(hp), h) < 1e-10);
  }
  // non-standard input: a single real line in C^2
  cmat_t one(2, 1);
  one.setZero();
  one(0, 0) = 1;
  real_subspace_t h = make_real_subspace(one);
  real_subspace_t hp = symplectic_complement(h);
  CHECK(hp.dim() == 3);
  CHECK(projection_distance(hp, oracle_symplectic_complement(h)) < 1e-10);

  // R^n is its own symplectic complement
  real_subspace_t reals = real_axis_subspace(3);
  CHECK(projection_distance(symplectic_complement(reals), reals) < 1e-12);
}

TEST_CASE("tomita_s fixes the subspace pointwise and squares to one") {
  rng_t rng(41);
  real_subspace_t h = random_standard_subspace(5, 42);
  anti_linear_t s = tomita_s(h);
  for (int rep = 0; rep < 20; ++rep) {
    rvec_t c = rng.gauss_mat(5, 1);
    cvec_t xi = h.basis * c.cast<complex_t>();  // real combination lies in H
    CHECK((s(xi) - xi).norm() < 1e-10 * xi.norm());
    cvec_t ixi = complex_t(0, 1) * xi;  // S(i xi) = -i xi
    CHECK((s(ixi) + ixi).norm() < 1e-10 * xi.norm());
  }
  CHECK(op_norm(cmat_t(compose(s, s) - cmat_t::Identity(5, 5))) < 1e-9);
}

TEST_CASE("tomita_s rejects non-standard subspaces") {
  cmat_t one(2, 1);
  one.setZero();
  one(0, 0) = 1;
  CHECK_THROWS_AS(tomita_s(make_real_subspace(one)), error);
  cmat_t two(2, 2);
  two.setZero();
  two(0, 0) = 1;
  two(0, 1) = complex_t(0, 1);
  CHECK_THROWS_AS(tomita_s(make_real_subspace(two)), error);
}

TEST_CASE("modular data of the real axis subspace is trivial") {
  modular_data_t md = tomita_from_subspace(real_axis_subspace(4));
  CHECK(op_norm(cmat_t(md.delta - cmat_t::Identity(4, 4))) < 1e-12);
  CHECK(op_norm(cmat_t(md.j.a - cmat_t::Identity(4, 4))) < 1e-12);
}

TEST_CASE("modular data satisfies the defining identities") {
  for (std::uint64_t seed : {51u, 52u}) {
    const index_t n = 5;
    real_subspace_t h = random_standard_subspace(n, seed);
    modular_data_t md = tomita_from_subspace(h);

    // delta positive
    CHECK(md.delta_eval.minCoeff() > 0);
    // j anti-unitary involution
    CHECK(op_norm(cmat_t(compose(md.j, md.j) - cmat_t::Identity(n, n))) < 1e-9);
    CHECK(op_norm(cmat_t(md.j.a * md.j.a.adjoint() - cmat_t::Identity(n, n))) < 1e-9);
    // j delta j = delta^{-1}
    cmat_t jdj = md.j.a * md.delta.conjugate() * md.j.a.conjugate();
    CHECK(op_norm(cmat_t(jdj - md.delta_pow(-1.0))) < 1e-8 * op_norm(md.delta_pow(-1.0)));
    // S = J delta^{1/2} reproduces the direct construction
    CHECK(op_norm(cmat_t(md.s().a - tomita_s(h).a)) < 1e-8 * op_norm(tomita_s(h).a));

    // J maps H onto its symplectic complement
    real_subspace_t hp = symplectic_complement(h);
    CHECK(projection_distance(apply_anti_linear(md.j, h), hp) < 1e-8);

    // delta^{it} preserves H
    for (scalar_t t : {0.5, -1.3, 2.0}) {
      real_subspace_t moved = apply_linear(md.delta_pow(complex_t(0, t)), h);
      CHECK(projection_distance(moved, h) < 1e-8);
    }

    // the adjoint of S is the Tomita operator of the complement
    CHECK(op_norm(cmat_t(tomita_s(hp).a - adjoint(tomita_s(h)).a)) <
          1e-8 * op_norm(tomita_s(h).a));
  }
}

TEST_CASE("subspace_from_tomita inverts tomita_from_subspace") {
  for (std::uint64_t seed : {61u, 62u, 63u}) {
    real_subspace_t h = random_standard_subspace(4, seed);
    modular_data_t md = tomita_from_subspace(h);
    real_subspace_t back = subspace_from_tomita(md, h.tol);
    CHECK(back.dim() == 4);
    CHECK(projection_distance(back, h) < 1e-8);

    // oracle: fixed points as the column space of (realified S + 1)
    real_subspace_t viaimage = oracle_fixed_points(realify_anti_linear(md.s()), h.tol);
    CHECK(projection_distance(back, viaimage) < 1e-8);
  }
}

TEST_CASE("subspace_from_tomita validates its input") {
  real_subspace_t h = random_standard_subspace(3, 71);
  modular_data_t md = tomita_from_subspace(h);

  modular_data_t bad = md;
  bad.j.a *= 1.5;  // no longer an involution
  CHECK_THROWS_AS(subspace_from_tomita(bad), error);

  modular_data_t bad2 = md;
  bad2.delta(0, 1) += complex_t(0.3, 0.1);  // not hermitian
  CHECK_THROWS_AS(subspace_from_tomita(bad2), error);
}

TEST_CASE("meet and join on axis-aligned real planes") {
  cmat_t e12(3, 2), e23(3, 2), e2(3, 1), e123(3, 3);
  e12.setZero();
  e12(0, 0) = 1;
  e12(1, 1) = 1;
  e23.setZero();
  e23(1, 0) = 1;
  e23(2, 1) = 1;
  e2.setZero();
  e2(1, 0) = 1;
  e123 = cmat_t::Identity(3, 3);
  real_subspace_t h = make_real_subspace(e12), k = make_real_subspace(e23);
  CHECK(projection_distance(meet(h, k), make_real_subspace(e2)) < 1e-12);
  CHECK(projection_distance(join(h, k), make_real_subspace(e123)) < 1e-12);
}

TEST_CASE("meet and join behave lattice-theoretically on random inputs") {
  real_subspace_t h = random_standard_subspace(4, 81);
  real_subspace_t k = random_standard_subspace(4, 82);
  CHECK(projection_distance(meet(h, h), h) < 1e-10);
  CHECK(projection_distance(join(h, h), h) < 1e-10);
  real_subspace_t m = meet(h, k), j = join(h, k);
  for (index_t c = 0; c < m.dim(); ++c) {
    CHECK(distance_to(h, m.basis.col(c)) < 1e-8);
    CHECK(distance_to(k, m.basis.col(c)) < 1e-8);
  }
  for (index_t c = 0; c < h.dim(); ++c) CHECK(distance_to(j, h.basis.col(c)) < 1e-8);
  for (index_t c = 0; c < k.dim(); ++c) CHECK(distance_to(j, k.basis.col(c)) < 1e-8);
  // complement exchanges meet and join
  real_subspace_t lhs = symplectic_complement(meet(h, k));
  real_subspace_t rhs = join(symplectic_complement(h), symplectic_complement(k));
  CHECK(projection_distance(lhs, rhs) < 1e-8);
}

TEST_CASE("duality deviation is tiny for random finite families") {
  std::vector<real_subspace_t> family;
  for (std::uint64_t seed : {91u, 92u, 93u}) family.push_back(random_standard_subspace(5, seed));
  CHECK(duality_deviation(family) < 1e-8);
  CHECK(duality_deviation({family[0]}) < 1e-12);
  CHECK_THROWS_AS(duality_deviation({}), error);
}

TEST_CASE("tensor product carries a tensor-factorized Tomita operator") {
  real_subspace_t h = random_standard_subspace(3, 101);
  real_subspace_t k = random_standard_subspace(2, 102);
  real_subspace_t hk = tensor_product(h, k);
  CHECK(hk.ambient_dim == 6);
  CHECK(hk.dim() == 6);
  CHECK(classify(hk).standard());
  cmat_t expect = kron(tomita_s(h).a, tomita_s(k).a);
  CHECK(op_norm(cmat_t(tomita_s(hk).a - expect)) < 1e-7 * op_norm(expect));
  // modular operator factorizes too
  modular_data_t mh = tomita_from_subspace(h), mk = tomita_from_subspace(k);
  modular_data_t mhk = tomita_from_subspace(hk);
  CHECK(op_norm(cmat_t(mhk.delta - kron(mh.delta, mk.delta))) <
        1e-7 * op_norm(mhk.delta));
}

TEST_CASE("kms boundary identity holds along the modular flow") {
  real_subspace_t h = random_standard_subspace(4, 111);
  modular_data_t md = tomita_from_subspace(h);
  scalar_t dev = kms_deviation(h, md, {0.0, 0.4, -1.1, 3.0});
  CHECK(dev < 1e-8 * (1.0 + op_norm(md.delta)));
}

TEST_CASE("unitaries preserving the subspace commute with its modular data") {
  rng_t rng(121);
  const index_t n = 4;
  cmat_t v = rng.unitary(n);
  real_subspace_t h = apply_linear(v, real_axis_subspace(n));
  modular_data_t md = tomita_from_subspace(h);

  // v O v^* preserves h for real orthogonal O
  rmat_t g = rng.gauss_mat(n, n);
  rmat_t o = Eigen::HouseholderQR<rmat_t>(g).householderQ();
  cmat_t u = v * o.cast<complex_t>() * v.adjoint();
  CHECK(commuting_unitary_deviation(h, md, u) < 1e-8);

  // the modular flow itself preserves any standard subspace
  real_subspace_t hr = random_standard_subspace(n, 122);
  modular_data_t mdr = tomita_from_subspace(hr);
  cmat_t flow = mdr.delta_pow(complex_t(0, 0.7));
  CHECK(commuting_unitary_deviation(hr, mdr, flow) < 1e-7 * (1.0 + op_norm(mdr.delta)));

  // a generic unitary does not preserve the subspace
  CHECK_THROWS_AS(commuting_unitary_deviation(hr, mdr, rng.unitary(n)), error);
}

TEST_CASE("one-parameter flow scaling degenerates in finite dimension") {
  // For U(t)=e^{itA}, A >= 0, the half-sided relation
  //   delta^{is} U(t) delta^{-is} = U(e^{-2 pi s} t)
  // forces A = 0 on a finite-dimensional space: a nonzero A commuting with
  // delta visibly breaks it, while A = 0 satisfies it exactly.
  real_subspace_t h = random_standard_subspace(3, 131);
  modular_data_t md = tomita_from_subspace(h);
  const scalar_t s = 0.3, t = 1.0;
  cmat_t dis = md.delta_pow(complex_t(0, s)), dmis = md.delta_pow(complex_t(0, -s));

  auto flow_gap = [&](const cmat_t& a) {
    cmat_t ut = (complex_t(0, t) * a).exp();
    cmat_t ust = (complex_t(0, std::exp(-2 * pi * s) * t) * a).exp();
    return op_norm(cmat_t(dis * ut * dmis - ust));
  };
  CHECK(flow_gap(cmat_t::Zero(3, 3)) < 1e-12);                   // degenerate case holds
  cmat_t a = md.delta + 2.0 * cmat_t::Identity(3, 3);            // positive, commutes with delta
  CHECK(flow_gap(a) > 0.1);                                      // nonzero generator cannot satisfy it
}

TEST_CASE("ambient mismatch and empty-family errors") {
  real_subspace_t h = random_standard_subspace(3, 141);
  real_subspace_t k = random_standard_subspace(4, 142);
  CHECK_THROWS_AS(meet(h, k), error);
  CHECK_THROWS_AS(join(h, k), error);
  CHECK_THROWS_AS(projection_distance(h, k), error);
  CHECK_THROWS_AS(meet_all({}), error);
  try {
    meet(h, k);
  } catch (const error& e) {
    CHECK(e.code() == errc::ambient_mismatch);
  }
}
