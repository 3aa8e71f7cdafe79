#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "modloc/random.hpp"
#include "modloc/serialize.hpp"

using namespace modloc;

TEST_CASE("subspace json round trip is bit exact") {
  real_subspace_t h = random_standard_subspace(5, 201);
  std::string text = subspace_to_json(h);
  real_subspace_t back = subspace_from_json(text);
  REQUIRE(back.ambient_dim == h.ambient_dim);
  REQUIRE(back.dim() == h.dim());
  CHECK(back.tol.abs_tol_per_dim == h.tol.abs_tol_per_dim);
  CHECK(back.tol.rank_tol_rel == h.tol.rank_tol_rel);
  // bitwise equality of every stored double
  for (index_t c = 0; c < h.dim(); ++c)
    for (index_t r = 0; r < h.ambient_dim; ++r) {
      CHECK(back.basis(r, c).real() == h.basis(r, c).real());
      CHECK(back.basis(r, c).imag() == h.basis(r, c).imag());
    }
  // and the round trip of the round trip is the identical string
  CHECK(subspace_to_json(back) == text);
}

TEST_CASE("subspace json rejects malformed input") {
  CHECK_THROWS_AS(subspace_from_json("not json at all"), error);
  CHECK_THROWS_AS(subspace_from_json("{\"ambient_dim\": 2}"), error);
  // well-formed but non-orthonormal basis
  std::string bad = R"({"ambient_dim":2,
    "basis":[[[1.0,0.0],[0.0,0.0]],[[1.0,0.0],[0.0,0.0]]],
    "tol":{"abs_tol":1e-10,"rank_tol":1e-8}})";
  CHECK_THROWS_AS(subspace_from_json(bad), error);
  try {
    subspace_from_json(bad);
  } catch (const error& e) {
    CHECK(e.code() == errc::io_error);
  }
}

TEST_CASE("subspace file round trip") {
  const char* path = "serialize_roundtrip_tmp.json";
  real_subspace_t h = random_standard_subspace(3, 202);
  save_subspace(path, h);
  real_subspace_t back = load_subspace(path);
  CHECK(back.basis == h.basis);  // bit-identical matrix
  std::remove(path);
  CHECK_THROWS_AS(load_subspace("does_not_exist_anywhere.json"), error);
}

TEST_CASE("complex binary round trip is bit exact") {
  rng_t rng(203);
  cvec_t v = rng.cgauss_vec(257);
  const char* path = "serialize_vec_tmp.bin";
  write_complex_binary(path, v);
  cvec_t back = read_complex_binary(path);
  REQUIRE(back.size() == v.size());
  for (index_t i = 0; i < v.size(); ++i) CHECK(back(i) == v(i));
  std::remove(path);
}
