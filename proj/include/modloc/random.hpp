#pragma once

#include <random>

#include "modloc/types.hpp"

namespace modloc {

// Deterministic RNG helpers; every randomized routine takes an explicit seed.
struct rng_t {
  std::mt19937_64 eng;
  explicit rng_t(std::uint64_t seed) : eng(seed) {}

  scalar_t gauss() {
    std::normal_distribution<scalar_t> d(0.0, 1.0);
    return d(eng);
  }
  scalar_t uniform(scalar_t lo, scalar_t hi) {
    std::uniform_real_distribution<scalar_t> d(lo, hi);
    return d(eng);
  }
  complex_t cgauss() { return complex_t(gauss(), gauss()) / std::sqrt(2.0); }

  rmat_t gauss_mat(index_t rows, index_t cols) {
    rmat_t m(rows, cols);
    for (index_t j = 0; j < cols; ++j)
      for (index_t i = 0; i < rows; ++i) m(i, j) = gauss();
    return m;
  }
  cmat_t cgauss_mat(index_t rows, index_t cols) {
    cmat_t m(rows, cols);
    for (index_t j = 0; j < cols; ++j)
      for (index_t i = 0; i < rows; ++i) m(i, j) = cgauss();
    return m;
  }
  cvec_t cgauss_vec(index_t n) {
    cvec_t v(n);
    for (index_t i = 0; i < n; ++i) v(i) = cgauss();
    return v;
  }
  // Haar-ish unitary via QR of a complex Gaussian.
  cmat_t unitary(index_t n) {
    Eigen::HouseholderQR<cmat_t> qr(cgauss_mat(n, n));
    cmat_t q = qr.householderQ() * cmat_t::Identity(n, n);
    cmat_t r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (index_t i = 0; i < n; ++i) {
      complex_t d = r(i, i);
      q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : complex_t(1, 0);
    }
    return q;
  }
};

}  // namespace modloc
